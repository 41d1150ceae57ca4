//! Rank-k column interpolative decomposition built from a pivoted QR.
//!
//! A factorization `A(:, piv) ~= Q R` with `R = [R11 R12]` yields the
//! interpolation `A ~= A(:, I) P` where `I` is the first `k` pivots and `P`
//! carries an identity block on the skeleton columns and `T = R11^+ R12` on
//! the rest. `R11` can be ill-conditioned at useful ranks, so its inverse is
//! applied through a truncated SVD pseudo-inverse rather than
//! back-substitution.

use crate::error::{Error, Result};
use crate::matrix::{spectral_estimate, svd_small, DenseMatrix};
use crate::mgsqr::PivotedQr;
use crate::precision::{round_matrix, PrecisionContext};

/// Which reconstructions a decomposition is meant for.
///
/// * `Double`: factorization and skeleton both in native `f64`.
/// * `MixedLow`: factorization (indices and coefficients) from a low
///   precision context, skeleton columns read from the `f64` data.
/// * `Low`: factorization and skeleton both from the storage-rounded data.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Variant {
    Double,
    MixedLow,
    Low,
}

/// Where [`reconstruct`] takes skeleton columns from.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SkeletonSource {
    DoubleMatrix,
    LowMatrix,
}

/// Precision used to apply the pseudo-inverse when forming `T`.
///
/// `Double` is the default: even low-precision variants solve for the
/// coefficients in `f64`, so the coefficient solve never adds its own
/// instability. `Ctx` instead applies the pseudo-inverse products under the
/// factorization context, for measuring how much that choice matters.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum PinvPrecision {
    #[default]
    Double,
    Ctx,
}

/// A rank-k column interpolative decomposition `A ~= source(:, indices) * p`.
#[derive(Clone, Debug)]
pub struct IdApprox {
    /// Skeleton column indices in original numbering, in pivot order.
    pub indices: Vec<usize>,
    /// `k x n` coefficient matrix; identity on the skeleton columns.
    pub p: DenseMatrix,
    pub variant: Variant,
    pub ctx: PrecisionContext,
    pub skeleton_source: SkeletonSource,
}

/// Default relative cutoff for the `R11` pseudo-inverse:
/// `max(k, n) * u_accumulation`.
pub fn default_pinv_tol(k: usize, n: usize, ctx: PrecisionContext) -> f64 {
    k.max(n) as f64 * ctx.accumulation().unit_roundoff()
}

/// Coefficient matrix `P` of the interpolative decomposition carried by `qr`.
///
/// Singular values of `R11` below `pinv_tol * sigma_max(R11)` are treated as
/// zero in the pseudo-inverse. The solve runs in native `f64`; see
/// [`coefficient_matrix_with`] for the context-arithmetic alternative.
pub fn coefficient_matrix(qr: &PivotedQr, pinv_tol: f64) -> Result<DenseMatrix> {
    coefficient_matrix_with(qr, pinv_tol, PinvPrecision::Double)
}

pub fn coefficient_matrix_with(
    qr: &PivotedQr,
    pinv_tol: f64,
    pinv: PinvPrecision,
) -> Result<DenseMatrix> {
    if !(pinv_tol >= 0.0) {
        return Err(Error::domain(format!(
            "pseudo-inverse cutoff {pinv_tol} must be nonnegative"
        )));
    }
    let k = qr.rank;
    let n = qr.r.cols();

    let mut p = DenseMatrix::zeros(k, n);
    for j in 0..k {
        p.set(j, qr.piv.get(j), 1.0);
    }
    if n == k {
        return Ok(p);
    }

    let r11 = DenseMatrix::from_fn(k, k, |i, j| qr.r.get(i, j));
    let r12 = DenseMatrix::from_fn(k, n - k, |i, j| qr.r.get(i, k + j));
    let svd = svd_small(&r11)?;
    if svd.s[0] == 0.0 {
        return Err(Error::degenerate(
            "leading block of r is exactly singular".to_string(),
        ));
    }
    let cut = pinv_tol * svd.s[0];
    let s_inv: Vec<f64> = svd
        .s
        .iter()
        .map(|&s| if s < cut || s == 0.0 { 0.0 } else { 1.0 / s })
        .collect();

    let t = match pinv {
        PinvPrecision::Double => {
            let mut b = svd.u.transpose().matmul(&r12);
            for j in 0..b.cols() {
                for (i, v) in b.col_mut(j).iter_mut().enumerate() {
                    *v *= s_inv[i];
                }
            }
            svd.v.matmul(&b)
        }
        PinvPrecision::Ctx => {
            let ctx = qr.ctx;
            let ut = round_matrix(&svd.u.transpose(), ctx.storage())?;
            let v = round_matrix(&svd.v, ctx.storage())?;
            let mut b = matmul_ctx(&ut, &r12, ctx);
            for j in 0..b.cols() {
                for (i, val) in b.col_mut(j).iter_mut().enumerate() {
                    *val = ctx.store(ctx.mul(*val, ctx.store(s_inv[i])));
                }
            }
            matmul_ctx(&v, &b, ctx)
        }
    };

    for i in 0..(n - k) {
        let dst = qr.piv.get(k + i);
        for row in 0..k {
            p.set(row, dst, t.get(row, i));
        }
    }
    Ok(p)
}

/// `a * b` where every product and partial sum rounds to the accumulation
/// format and every entry write rounds to storage.
fn matmul_ctx(a: &DenseMatrix, b: &DenseMatrix, ctx: PrecisionContext) -> DenseMatrix {
    let mut c = DenseMatrix::zeros(a.rows(), b.cols());
    for j in 0..b.cols() {
        for i in 0..a.rows() {
            let mut s = 0.0;
            for l in 0..a.cols() {
                s = ctx.add(s, ctx.mul(a.get(i, l), b.get(l, j)));
            }
            c.set(i, j, ctx.store(s));
        }
    }
    c
}

/// Evaluates `source(:, indices) * p` in native `f64`.
pub fn build_id(source: &DenseMatrix, approx: &IdApprox) -> Result<DenseMatrix> {
    if approx.p.cols() != source.cols() {
        return Err(Error::dimension(format!(
            "coefficients cover {} columns but the source has {}",
            approx.p.cols(),
            source.cols()
        )));
    }
    if approx.p.rows() != approx.indices.len() {
        return Err(Error::dimension(
            "coefficient row count differs from the skeleton size".to_string(),
        ));
    }
    if let Some(&bad) = approx.indices.iter().find(|&&i| i >= source.cols()) {
        return Err(Error::dimension(format!(
            "skeleton index {bad} is out of bounds for {} columns",
            source.cols()
        )));
    }
    let skeleton = source.select_columns(&approx.indices);
    Ok(skeleton.matmul(&approx.p))
}

/// Reconstructs the approximation against the `f64` data `a_d`, rounding it
/// to the context's storage format first when the skeleton belongs to the
/// low-precision matrix.
pub fn reconstruct(a_d: &DenseMatrix, approx: &IdApprox) -> Result<DenseMatrix> {
    match approx.skeleton_source {
        SkeletonSource::DoubleMatrix => build_id(a_d, approx),
        SkeletonSource::LowMatrix => {
            let a_l = round_matrix(a_d, approx.ctx.storage())?;
            build_id(&a_l, approx)
        }
    }
}

/// Runs the full decomposition: storage rounding, pivoted QR under `ctx`,
/// and the coefficient solve with the default pseudo-inverse cutoff.
pub fn id_pipeline(
    a_d: &DenseMatrix,
    k: usize,
    ctx: PrecisionContext,
    variant: Variant,
) -> Result<IdApprox> {
    id_pipeline_with(a_d, k, ctx, variant, PinvPrecision::Double)
}

pub fn id_pipeline_with(
    a_d: &DenseMatrix,
    k: usize,
    ctx: PrecisionContext,
    variant: Variant,
    pinv: PinvPrecision,
) -> Result<IdApprox> {
    if variant == Variant::Double && !ctx.is_native_double() {
        return Err(Error::domain(
            "the double variant requires the double context".to_string(),
        ));
    }
    let work = if ctx.is_native_double() {
        a_d.clone()
    } else {
        round_matrix(a_d, ctx.storage())?
    };
    let qr = crate::mgsqr::mgsqr(&work, k, ctx)?;
    let p = coefficient_matrix_with(&qr, default_pinv_tol(k, a_d.cols(), ctx), pinv)?;
    let indices = qr.piv.as_slice()[..k].to_vec();
    let skeleton_source = match variant {
        Variant::Double | Variant::MixedLow => SkeletonSource::DoubleMatrix,
        Variant::Low => SkeletonSource::LowMatrix,
    };
    Ok(IdApprox {
        indices,
        p,
        variant,
        ctx,
        skeleton_source,
    })
}

/// Internal seed for the power-iteration starts used in measurement.
const MEASURE_SEED: u64 = 0x1d;
/// Successive-change target for the measurement iteration.
const MEASURE_TOL: f64 = 1e-5;
const MEASURE_MAX_ITER: usize = 400;
/// Largest final change still accepted as a valid estimate.
const MEASURE_ACCEPT: f64 = 3e-4;

/// `||a - ahat||_2 / ||a||_2`, both spectral norms estimated by seeded power
/// iteration in native `f64`.
///
/// Difference matrices here are rounding noise whose top singular values sit
/// close together, the regime where power iteration crawls. The estimate is
/// accepted once its successive relative change is at most 3e-4: an
/// estimate at change delta is within about sqrt(delta)/2 of the true norm
/// (slow movement implies nearly tied leaders, and any direction among
/// nearly tied leaders already yields the norm), so accepted values are
/// good to well under one percent.
pub fn rel_spectral_error(a: &DenseMatrix, ahat: &DenseMatrix) -> Result<f64> {
    if (a.rows(), a.cols()) != (ahat.rows(), ahat.cols()) {
        return Err(Error::dimension(format!(
            "{}x{} against {}x{}",
            a.rows(),
            a.cols(),
            ahat.rows(),
            ahat.cols()
        )));
    }
    if !a.is_all_finite() || !ahat.is_all_finite() {
        return Err(Error::domain("matrix has non-finite entries"));
    }
    let (denom, dchange) = spectral_estimate(a, MEASURE_TOL, MEASURE_MAX_ITER, MEASURE_SEED);
    if dchange > MEASURE_ACCEPT {
        return Err(Error::Convergence {
            what: "power iteration (reference norm)",
            change: dchange,
            iters: MEASURE_MAX_ITER,
        });
    }
    if denom == 0.0 {
        return Err(Error::degenerate(
            "reference matrix has zero spectral norm".to_string(),
        ));
    }
    let diff = a.sub(ahat);
    let (numer, nchange) = spectral_estimate(&diff, MEASURE_TOL, MEASURE_MAX_ITER, MEASURE_SEED);
    if nchange > MEASURE_ACCEPT {
        return Err(Error::Convergence {
            what: "power iteration (error norm)",
            change: nchange,
            iters: MEASURE_MAX_ITER,
        });
    }
    Ok(numer / denom)
}

/// The worst-case envelope `sqrt(1 + k (n - k)) * sigma_k1` for the spectral
/// error of a rank-`k` interpolative decomposition of an `m x n` matrix whose
/// `(k+1)`-th singular value is `sigma_k1`.
pub fn lemma_bound(k: usize, n: usize, sigma_k1: f64) -> Result<f64> {
    if k == 0 || k >= n {
        return Err(Error::domain(format!("rank {k} is outside 1..{n}")));
    }
    if !(sigma_k1 >= 0.0) {
        return Err(Error::domain(format!(
            "singular value {sigma_k1} must be nonnegative"
        )));
    }
    Ok((1.0 + (k * (n - k)) as f64).sqrt() * sigma_k1)
}
