//! C ABI over the mpid library.
//!
//! Every object crossing the boundary is an opaque heap handle created and
//! destroyed here; every fallible call returns an `int32_t` status code and
//! writes results through out-pointers. The most recent failure message is
//! kept per thread and read back with [`mpid_last_error`].
//!
//! Null handling: output pointers must be non-null, input handles must be
//! live pointers from this library, and string arguments must be
//! NUL-terminated UTF-8. Violations return `MPID_STATUS_NULL_POINTER` or
//! `MPID_STATUS_INVALID_ARGUMENT` rather than crashing, except for pointers
//! that are non-null but dangling, which no library can detect.

use std::cell::{Cell, RefCell};
use std::ffi::{c_char, CStr};
use std::panic::{catch_unwind, AssertUnwindSafe};

use mpid::harness::{load_matrix, save_matrix, MatrixFormat};
use mpid::id::{id_pipeline, rel_spectral_error, reconstruct, IdApprox, Variant};
use mpid::matrix::DenseMatrix;
use mpid::precision::{gamma, round_matrix, round_scalar, FloatFormat, PrecisionContext};
use mpid::synth::{gen_decay_matrix, DecayName, DecayProfile};
use mpid::Error;

pub const MPID_STATUS_OK: i32 = 0;
pub const MPID_STATUS_NULL_POINTER: i32 = 1;
pub const MPID_STATUS_INVALID_ARGUMENT: i32 = 2;
pub const MPID_STATUS_OVERFLOW: i32 = 3;
pub const MPID_STATUS_UNDERFLOW: i32 = 4;
pub const MPID_STATUS_DEGENERATE: i32 = 5;
pub const MPID_STATUS_NO_CONVERGENCE: i32 = 6;
pub const MPID_STATUS_IO: i32 = 7;
pub const MPID_STATUS_PANIC: i32 = 8;

/// binary16 storage (emulated).
pub const MPID_FORMAT_BINARY16: i32 = 0;
/// binary32 storage (emulated).
pub const MPID_FORMAT_BINARY32: i32 = 1;
/// Native binary64.
pub const MPID_FORMAT_BINARY64: i32 = 2;

/// Store and accumulate in binary64.
pub const MPID_CONTEXT_DOUBLE: i32 = 0;
/// Store and accumulate in binary32.
pub const MPID_CONTEXT_SINGLE: i32 = 1;
/// Store in binary16, accumulate in binary32.
pub const MPID_CONTEXT_SIMULATED_HALF: i32 = 2;

/// Factor and read the skeleton in binary64.
pub const MPID_VARIANT_DOUBLE: i32 = 0;
/// Factor in the context precision and read the skeleton from the rounded matrix.
pub const MPID_VARIANT_LOW: i32 = 1;
/// Factor in the context precision but keep the binary64 skeleton.
pub const MPID_VARIANT_MIXED_LOW: i32 = 2;

/// Delimited text, one matrix row per line.
pub const MPID_FILE_CSV: i32 = 0;
/// Packed little-endian binary with a magic prefix and dimension header.
pub const MPID_FILE_RAW: i32 = 1;

thread_local! {
    static LAST_ERROR: RefCell<String> = const { RefCell::new(String::new()) };
    static LAST_UNDERFLOW_STEP: Cell<i64> = const { Cell::new(-1) };
}

/// Opaque dense column-major matrix handle.
pub struct MpidMatrix(DenseMatrix);

/// Opaque decomposition handle: skeleton indices plus coefficient matrix.
pub struct MpidId(IdApprox);

fn clear_error() {
    LAST_ERROR.with(|e| e.borrow_mut().clear());
    LAST_UNDERFLOW_STEP.with(|s| s.set(-1));
}

fn fail(code: i32, msg: impl Into<String>) -> i32 {
    LAST_ERROR.with(|e| *e.borrow_mut() = msg.into());
    code
}

fn fail_with(err: Error) -> i32 {
    let code = match &err {
        Error::Overflow { .. } => MPID_STATUS_OVERFLOW,
        Error::Underflow(state) => {
            LAST_UNDERFLOW_STEP.with(|s| s.set(state.step as i64));
            MPID_STATUS_UNDERFLOW
        }
        Error::Degenerate(_) => MPID_STATUS_DEGENERATE,
        Error::Convergence { .. } => MPID_STATUS_NO_CONVERGENCE,
        Error::Io(_) => MPID_STATUS_IO,
        _ => MPID_STATUS_INVALID_ARGUMENT,
    };
    fail(code, err.to_string())
}

/// Runs `body` with panics converted to `MPID_STATUS_PANIC`.
fn guarded(body: impl FnOnce() -> i32) -> i32 {
    clear_error();
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(code) => code,
        Err(cause) => {
            let what = cause
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| cause.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".to_string());
            fail(MPID_STATUS_PANIC, format!("internal panic: {what}"))
        }
    }
}

fn parse_format(format: i32) -> Result<FloatFormat, i32> {
    match format {
        MPID_FORMAT_BINARY16 => Ok(FloatFormat::BINARY16),
        MPID_FORMAT_BINARY32 => Ok(FloatFormat::BINARY32),
        MPID_FORMAT_BINARY64 => Ok(FloatFormat::BINARY64),
        other => Err(fail(
            MPID_STATUS_INVALID_ARGUMENT,
            format!("unknown float format code {other}"),
        )),
    }
}

fn parse_context(context: i32) -> Result<PrecisionContext, i32> {
    match context {
        MPID_CONTEXT_DOUBLE => Ok(PrecisionContext::DOUBLE),
        MPID_CONTEXT_SINGLE => Ok(PrecisionContext::SINGLE),
        MPID_CONTEXT_SIMULATED_HALF => Ok(PrecisionContext::SIMULATED_HALF),
        other => Err(fail(
            MPID_STATUS_INVALID_ARGUMENT,
            format!("unknown precision context code {other}"),
        )),
    }
}

fn parse_variant(variant: i32) -> Result<Variant, i32> {
    match variant {
        MPID_VARIANT_DOUBLE => Ok(Variant::Double),
        MPID_VARIANT_LOW => Ok(Variant::Low),
        MPID_VARIANT_MIXED_LOW => Ok(Variant::MixedLow),
        other => Err(fail(
            MPID_STATUS_INVALID_ARGUMENT,
            format!("unknown scheme variant code {other}"),
        )),
    }
}

fn parse_file_format(format: i32) -> Result<MatrixFormat, i32> {
    match format {
        MPID_FILE_CSV => Ok(MatrixFormat::Csv),
        MPID_FILE_RAW => Ok(MatrixFormat::Raw),
        other => Err(fail(
            MPID_STATUS_INVALID_ARGUMENT,
            format!("unknown file format code {other}"),
        )),
    }
}

/// # Safety
/// `ptr` must be NUL-terminated and valid for reads through the terminator.
unsafe fn parse_str<'a>(ptr: *const c_char, what: &str) -> Result<&'a str, i32> {
    if ptr.is_null() {
        return Err(fail(MPID_STATUS_NULL_POINTER, format!("{what} is null")));
    }
    CStr::from_ptr(ptr).to_str().map_err(|_| {
        fail(
            MPID_STATUS_INVALID_ARGUMENT,
            format!("{what} is not valid UTF-8"),
        )
    })
}

unsafe fn matrix_ref<'a>(a: *const MpidMatrix, what: &str) -> Result<&'a DenseMatrix, i32> {
    if a.is_null() {
        return Err(fail(MPID_STATUS_NULL_POINTER, format!("{what} is null")));
    }
    Ok(&(*a).0)
}

fn emit_matrix(out: *mut *mut MpidMatrix, a: DenseMatrix) -> i32 {
    if out.is_null() {
        return fail(MPID_STATUS_NULL_POINTER, "output handle pointer is null");
    }
    unsafe { *out = Box::into_raw(Box::new(MpidMatrix(a))) };
    MPID_STATUS_OK
}

/// Copies the length of the pending error message into `buf` (truncated to
/// `cap - 1` bytes, always NUL-terminated when `cap > 0`) and returns the
/// full message length in bytes. A zero return means the last call succeeded.
///
/// # Safety
/// `buf` must be valid for writes of `cap` bytes, or null with `cap == 0`.
#[no_mangle]
pub unsafe extern "C" fn mpid_last_error(buf: *mut c_char, cap: usize) -> usize {
    LAST_ERROR.with(|e| {
        let msg = e.borrow();
        let bytes = msg.as_bytes();
        if !buf.is_null() && cap > 0 {
            let n = bytes.len().min(cap - 1);
            std::ptr::copy_nonoverlapping(bytes.as_ptr(), buf.cast::<u8>(), n);
            *buf.add(n) = 0;
        }
        bytes.len()
    })
}

/// Zero-based factorization step whose pivot norm vanished in the most
/// recent `MPID_STATUS_UNDERFLOW` failure on this thread; -1 otherwise.
#[no_mangle]
pub extern "C" fn mpid_last_underflow_step() -> i64 {
    LAST_UNDERFLOW_STEP.with(|s| s.get())
}

/// Creates an `rows x cols` matrix. `data` is read as column-major
/// `rows * cols` doubles; pass null for an all-zero matrix.
///
/// # Safety
/// `data` must be null or valid for `rows * cols` reads; `out` must be
/// valid for one pointer write.
#[no_mangle]
pub unsafe extern "C" fn mpid_matrix_create(
    rows: usize,
    cols: usize,
    data: *const f64,
    out: *mut *mut MpidMatrix,
) -> i32 {
    guarded(|| {
        if rows == 0 || cols == 0 {
            return fail(
                MPID_STATUS_INVALID_ARGUMENT,
                format!("empty shape {rows}x{cols}"),
            );
        }
        let a = if data.is_null() {
            DenseMatrix::zeros(rows, cols)
        } else {
            let slice = std::slice::from_raw_parts(data, rows * cols);
            DenseMatrix::from_col_major(rows, cols, slice.to_vec())
        };
        emit_matrix(out, a)
    })
}

#[no_mangle]
pub extern "C" fn mpid_matrix_rows(a: *const MpidMatrix) -> usize {
    if a.is_null() {
        return 0;
    }
    unsafe { (*a).0.rows() }
}

#[no_mangle]
pub extern "C" fn mpid_matrix_cols(a: *const MpidMatrix) -> usize {
    if a.is_null() {
        return 0;
    }
    unsafe { (*a).0.cols() }
}

/// Reads one entry.
///
/// # Safety
/// `a` must be a live matrix handle and `out` valid for one write.
#[no_mangle]
pub unsafe extern "C" fn mpid_matrix_get(
    a: *const MpidMatrix,
    row: usize,
    col: usize,
    out: *mut f64,
) -> i32 {
    guarded(|| {
        let m = match matrix_ref(a, "matrix") {
            Ok(m) => m,
            Err(code) => return code,
        };
        if out.is_null() {
            return fail(MPID_STATUS_NULL_POINTER, "output pointer is null");
        }
        if row >= m.rows() || col >= m.cols() {
            return fail(
                MPID_STATUS_INVALID_ARGUMENT,
                format!(
                    "entry ({row}, {col}) outside {}x{}",
                    m.rows(),
                    m.cols()
                ),
            );
        }
        *out = m.get(row, col);
        MPID_STATUS_OK
    })
}

/// Copies the whole matrix into `buf` in column-major order. `len` is the
/// capacity of `buf` in doubles and must be at least `rows * cols`.
///
/// # Safety
/// `a` must be a live handle; `buf` must be valid for `len` writes.
#[no_mangle]
pub unsafe extern "C" fn mpid_matrix_copy_data(
    a: *const MpidMatrix,
    buf: *mut f64,
    len: usize,
) -> i32 {
    guarded(|| {
        let m = match matrix_ref(a, "matrix") {
            Ok(m) => m,
            Err(code) => return code,
        };
        if buf.is_null() {
            return fail(MPID_STATUS_NULL_POINTER, "output buffer is null");
        }
        let need = m.rows() * m.cols();
        if len < need {
            return fail(
                MPID_STATUS_INVALID_ARGUMENT,
                format!("buffer holds {len} doubles, matrix needs {need}"),
            );
        }
        std::ptr::copy_nonoverlapping(m.data().as_ptr(), buf, need);
        MPID_STATUS_OK
    })
}

/// Releases a matrix handle. Null is ignored. The handle must not be used
/// again after this call.
///
/// # Safety
/// `a` must be null or a pointer returned by this library that has not
/// already been freed.
#[no_mangle]
pub unsafe extern "C" fn mpid_matrix_free(a: *mut MpidMatrix) {
    if !a.is_null() {
        drop(Box::from_raw(a));
    }
}

/// Loads a matrix from `path`. `skip_header` nonzero drops the first CSV
/// line before parsing.
///
/// # Safety
/// `path` must be a NUL-terminated string; `out` valid for one write.
#[no_mangle]
pub unsafe extern "C" fn mpid_matrix_load(
    path: *const c_char,
    file_format: i32,
    skip_header: i32,
    out: *mut *mut MpidMatrix,
) -> i32 {
    guarded(|| {
        let path = match parse_str(path, "path") {
            Ok(p) => p,
            Err(code) => return code,
        };
        let format = match parse_file_format(file_format) {
            Ok(f) => f,
            Err(code) => return code,
        };
        match load_matrix(std::path::Path::new(path), format, skip_header != 0) {
            Ok(a) => emit_matrix(out, a),
            Err(e) => fail_with(e),
        }
    })
}

/// Writes a matrix to `path` in the chosen file format.
///
/// # Safety
/// `a` must be a live handle; `path` a NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn mpid_matrix_save(
    a: *const MpidMatrix,
    path: *const c_char,
    file_format: i32,
) -> i32 {
    guarded(|| {
        let m = match matrix_ref(a, "matrix") {
            Ok(m) => m,
            Err(code) => return code,
        };
        let path = match parse_str(path, "path") {
            Ok(p) => p,
            Err(code) => return code,
        };
        let format = match parse_file_format(file_format) {
            Ok(f) => f,
            Err(code) => return code,
        };
        match save_matrix(m, std::path::Path::new(path), format) {
            Ok(()) => MPID_STATUS_OK,
            Err(e) => fail_with(e),
        }
    })
}

/// Generates the seeded synthetic test matrix `name` in {"slow", "medium",
/// "fast"} with singular values `j^-1`, `j^-2`, or `j^-4`.
///
/// # Safety
/// `name` must be a NUL-terminated string; `out` valid for one write.
#[no_mangle]
pub unsafe extern "C" fn mpid_gen_decay(
    name: *const c_char,
    rows: usize,
    cols: usize,
    seed: u64,
    out: *mut *mut MpidMatrix,
) -> i32 {
    guarded(|| {
        let name = match parse_str(name, "dataset name") {
            Ok(n) => n,
            Err(code) => return code,
        };
        let name = match DecayName::parse(name) {
            Ok(n) => n,
            Err(e) => return fail_with(e),
        };
        let profile = DecayProfile {
            name,
            m: rows,
            n: cols,
            seed,
        };
        match gen_decay_matrix(profile) {
            Ok((a, _)) => emit_matrix(out, a),
            Err(e) => fail_with(e),
        }
    })
}

/// Rounds one double to the given format with round-to-nearest-even.
///
/// # Safety
/// `out` must be valid for one write.
#[no_mangle]
pub unsafe extern "C" fn mpid_round_scalar(x: f64, format: i32, out: *mut f64) -> i32 {
    guarded(|| {
        let fmt = match parse_format(format) {
            Ok(f) => f,
            Err(code) => return code,
        };
        if out.is_null() {
            return fail(MPID_STATUS_NULL_POINTER, "output pointer is null");
        }
        *out = round_scalar(x, fmt);
        MPID_STATUS_OK
    })
}

/// Rounds every entry to the given format, failing on overflow to infinity.
///
/// # Safety
/// `a` must be a live handle; `out` valid for one write.
#[no_mangle]
pub unsafe extern "C" fn mpid_round_matrix(
    a: *const MpidMatrix,
    format: i32,
    out: *mut *mut MpidMatrix,
) -> i32 {
    guarded(|| {
        let m = match matrix_ref(a, "matrix") {
            Ok(m) => m,
            Err(code) => return code,
        };
        let fmt = match parse_format(format) {
            Ok(f) => f,
            Err(code) => return code,
        };
        match round_matrix(m, fmt) {
            Ok(rounded) => emit_matrix(out, rounded),
            Err(e) => fail_with(e),
        }
    })
}

/// Unit round-off of the given format.
///
/// # Safety
/// `out` must be valid for one write.
#[no_mangle]
pub unsafe extern "C" fn mpid_unit_roundoff(format: i32, out: *mut f64) -> i32 {
    guarded(|| {
        let fmt = match parse_format(format) {
            Ok(f) => f,
            Err(code) => return code,
        };
        if out.is_null() {
            return fail(MPID_STATUS_NULL_POINTER, "output pointer is null");
        }
        *out = fmt.unit_roundoff();
        MPID_STATUS_OK
    })
}

/// Rounding-accumulation growth factor `k * u / (1 - u)` for a chain of
/// `k` operations at unit round-off `u`.
///
/// # Safety
/// `out` must be valid for one write.
#[no_mangle]
pub unsafe extern "C" fn mpid_gamma(k: usize, u: f64, out: *mut f64) -> i32 {
    guarded(|| {
        if out.is_null() {
            return fail(MPID_STATUS_NULL_POINTER, "output pointer is null");
        }
        match gamma(k, u) {
            Ok(g) => {
                *out = g;
                MPID_STATUS_OK
            }
            Err(e) => fail_with(e),
        }
    })
}

/// Computes a rank-`k` column interpolative decomposition of `a` under the
/// given precision context and skeleton variant. On
/// `MPID_STATUS_UNDERFLOW`, [`mpid_last_underflow_step`] reports the step
/// whose pivot norm vanished.
///
/// # Safety
/// `a` must be a live handle; `out` valid for one write.
#[no_mangle]
pub unsafe extern "C" fn mpid_id_compute(
    a: *const MpidMatrix,
    k: usize,
    context: i32,
    variant: i32,
    out: *mut *mut MpidId,
) -> i32 {
    guarded(|| {
        let m = match matrix_ref(a, "matrix") {
            Ok(m) => m,
            Err(code) => return code,
        };
        let ctx = match parse_context(context) {
            Ok(c) => c,
            Err(code) => return code,
        };
        let var = match parse_variant(variant) {
            Ok(v) => v,
            Err(code) => return code,
        };
        if out.is_null() {
            return fail(MPID_STATUS_NULL_POINTER, "output handle pointer is null");
        }
        match id_pipeline(m, k, ctx, var) {
            Ok(approx) => {
                *out = Box::into_raw(Box::new(MpidId(approx)));
                MPID_STATUS_OK
            }
            Err(e) => fail_with(e),
        }
    })
}

#[no_mangle]
pub extern "C" fn mpid_id_rank(id: *const MpidId) -> usize {
    if id.is_null() {
        return 0;
    }
    unsafe { (*id).0.indices.len() }
}

/// Copies the skeleton column indices, in pivot order, into `buf`. `len`
/// must be at least the decomposition rank.
///
/// # Safety
/// `id` must be a live handle; `buf` valid for `len` writes.
#[no_mangle]
pub unsafe extern "C" fn mpid_id_indices(id: *const MpidId, buf: *mut usize, len: usize) -> i32 {
    guarded(|| {
        if id.is_null() {
            return fail(MPID_STATUS_NULL_POINTER, "decomposition handle is null");
        }
        if buf.is_null() {
            return fail(MPID_STATUS_NULL_POINTER, "output buffer is null");
        }
        let indices = &(*id).0.indices;
        if len < indices.len() {
            return fail(
                MPID_STATUS_INVALID_ARGUMENT,
                format!("buffer holds {len} indices, rank is {}", indices.len()),
            );
        }
        std::ptr::copy_nonoverlapping(indices.as_ptr(), buf, indices.len());
        MPID_STATUS_OK
    })
}

/// Returns a copy of the `k x n` coefficient matrix as a new handle.
///
/// # Safety
/// `id` must be a live handle; `out` valid for one write.
#[no_mangle]
pub unsafe extern "C" fn mpid_id_coefficients(
    id: *const MpidId,
    out: *mut *mut MpidMatrix,
) -> i32 {
    guarded(|| {
        if id.is_null() {
            return fail(MPID_STATUS_NULL_POINTER, "decomposition handle is null");
        }
        emit_matrix(out, (*id).0.p.clone())
    })
}

/// Rebuilds the rank-`k` approximation `source(:, indices) * P` as a new
/// matrix handle. `source` must be the matrix the decomposition was
/// computed from (or one of identical shape).
///
/// # Safety
/// Both handles must be live; `out` valid for one write.
#[no_mangle]
pub unsafe extern "C" fn mpid_id_reconstruct(
    source: *const MpidMatrix,
    id: *const MpidId,
    out: *mut *mut MpidMatrix,
) -> i32 {
    guarded(|| {
        let src = match matrix_ref(source, "source matrix") {
            Ok(m) => m,
            Err(code) => return code,
        };
        if id.is_null() {
            return fail(MPID_STATUS_NULL_POINTER, "decomposition handle is null");
        }
        match reconstruct(src, &(*id).0) {
            Ok(a) => emit_matrix(out, a),
            Err(e) => fail_with(e),
        }
    })
}

/// Releases a decomposition handle. Null is ignored.
///
/// # Safety
/// `id` must be null or an unfreed pointer from this library.
#[no_mangle]
pub unsafe extern "C" fn mpid_id_free(id: *mut MpidId) {
    if !id.is_null() {
        drop(Box::from_raw(id));
    }
}

/// Relative spectral error `||a - b||_2 / ||a||_2` between two matrices of
/// the same shape, estimated by seeded power iteration.
///
/// # Safety
/// Both handles must be live; `out` valid for one write.
#[no_mangle]
pub unsafe extern "C" fn mpid_rel_spectral_error(
    a: *const MpidMatrix,
    b: *const MpidMatrix,
    out: *mut f64,
) -> i32 {
    guarded(|| {
        let ma = match matrix_ref(a, "first matrix") {
            Ok(m) => m,
            Err(code) => return code,
        };
        let mb = match matrix_ref(b, "second matrix") {
            Ok(m) => m,
            Err(code) => return code,
        };
        if out.is_null() {
            return fail(MPID_STATUS_NULL_POINTER, "output pointer is null");
        }
        match rel_spectral_error(ma, mb) {
            Ok(err) => {
                *out = err;
                MPID_STATUS_OK
            }
            Err(e) => fail_with(e),
        }
    })
}
