#ifndef MPID_H
#define MPID_H

/* Generated from src/lib.rs by the crate build script; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

#define MPID_STATUS_OK 0

#define MPID_STATUS_NULL_POINTER 1

#define MPID_STATUS_INVALID_ARGUMENT 2

#define MPID_STATUS_OVERFLOW 3

#define MPID_STATUS_UNDERFLOW 4

#define MPID_STATUS_DEGENERATE 5

#define MPID_STATUS_NO_CONVERGENCE 6

#define MPID_STATUS_IO 7

#define MPID_STATUS_PANIC 8

/**
 * binary16 storage (emulated).
 */
#define MPID_FORMAT_BINARY16 0

/**
 * binary32 storage (emulated).
 */
#define MPID_FORMAT_BINARY32 1

/**
 * Native binary64.
 */
#define MPID_FORMAT_BINARY64 2

/**
 * Store and accumulate in binary64.
 */
#define MPID_CONTEXT_DOUBLE 0

/**
 * Store and accumulate in binary32.
 */
#define MPID_CONTEXT_SINGLE 1

/**
 * Store in binary16, accumulate in binary32.
 */
#define MPID_CONTEXT_SIMULATED_HALF 2

/**
 * Factor and read the skeleton in binary64.
 */
#define MPID_VARIANT_DOUBLE 0

/**
 * Factor in the context precision and read the skeleton from the rounded matrix.
 */
#define MPID_VARIANT_LOW 1

/**
 * Factor in the context precision but keep the binary64 skeleton.
 */
#define MPID_VARIANT_MIXED_LOW 2

/**
 * Delimited text, one matrix row per line.
 */
#define MPID_FILE_CSV 0

/**
 * Packed little-endian binary with a magic prefix and dimension header.
 */
#define MPID_FILE_RAW 1

/**
 * Opaque decomposition handle: skeleton indices plus coefficient matrix.
 */
typedef struct MpidId MpidId;

/**
 * Opaque dense column-major matrix handle.
 */
typedef struct MpidMatrix MpidMatrix;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Copies the length of the pending error message into `buf` (truncated to
 * `cap - 1` bytes, always NUL-terminated when `cap > 0`) and returns the
 * full message length in bytes. A zero return means the last call succeeded.
 *
 * # Safety
 * `buf` must be valid for writes of `cap` bytes, or null with `cap == 0`.
 */
size_t mpid_last_error(char *buf, size_t cap);

/**
 * Zero-based factorization step whose pivot norm vanished in the most
 * recent `MPID_STATUS_UNDERFLOW` failure on this thread; -1 otherwise.
 */
int64_t mpid_last_underflow_step(void);

/**
 * Creates an `rows x cols` matrix. `data` is read as column-major
 * `rows * cols` doubles; pass null for an all-zero matrix.
 *
 * # Safety
 * `data` must be null or valid for `rows * cols` reads; `out` must be
 * valid for one pointer write.
 */
int32_t mpid_matrix_create(size_t rows, size_t cols, const double *data, struct MpidMatrix **out);

size_t mpid_matrix_rows(const struct MpidMatrix *a);

size_t mpid_matrix_cols(const struct MpidMatrix *a);

/**
 * Reads one entry.
 *
 * # Safety
 * `a` must be a live matrix handle and `out` valid for one write.
 */
int32_t mpid_matrix_get(const struct MpidMatrix *a, size_t row, size_t col, double *out);

/**
 * Copies the whole matrix into `buf` in column-major order. `len` is the
 * capacity of `buf` in doubles and must be at least `rows * cols`.
 *
 * # Safety
 * `a` must be a live handle; `buf` must be valid for `len` writes.
 */
int32_t mpid_matrix_copy_data(const struct MpidMatrix *a, double *buf, size_t len);

/**
 * Releases a matrix handle. Null is ignored. The handle must not be used
 * again after this call.
 *
 * # Safety
 * `a` must be null or a pointer returned by this library that has not
 * already been freed.
 */
void mpid_matrix_free(struct MpidMatrix *a);

/**
 * Loads a matrix from `path`. `skip_header` nonzero drops the first CSV
 * line before parsing.
 *
 * # Safety
 * `path` must be a NUL-terminated string; `out` valid for one write.
 */
int32_t mpid_matrix_load(const char *path,
                         int32_t file_format,
                         int32_t skip_header,
                         struct MpidMatrix **out);

/**
 * Writes a matrix to `path` in the chosen file format.
 *
 * # Safety
 * `a` must be a live handle; `path` a NUL-terminated string.
 */
int32_t mpid_matrix_save(const struct MpidMatrix *a, const char *path, int32_t file_format);

/**
 * Generates the seeded synthetic test matrix `name` in {"slow", "medium",
 * "fast"} with singular values `j^-1`, `j^-2`, or `j^-4`.
 *
 * # Safety
 * `name` must be a NUL-terminated string; `out` valid for one write.
 */
int32_t mpid_gen_decay(const char *name,
                       size_t rows,
                       size_t cols,
                       uint64_t seed,
                       struct MpidMatrix **out);

/**
 * Rounds one double to the given format with round-to-nearest-even.
 *
 * # Safety
 * `out` must be valid for one write.
 */
int32_t mpid_round_scalar(double x, int32_t format, double *out);

/**
 * Rounds every entry to the given format, failing on overflow to infinity.
 *
 * # Safety
 * `a` must be a live handle; `out` valid for one write.
 */
int32_t mpid_round_matrix(const struct MpidMatrix *a, int32_t format, struct MpidMatrix **out);

/**
 * Unit round-off of the given format.
 *
 * # Safety
 * `out` must be valid for one write.
 */
int32_t mpid_unit_roundoff(int32_t format, double *out);

/**
 * Rounding-accumulation growth factor `k * u / (1 - u)` for a chain of
 * `k` operations at unit round-off `u`.
 *
 * # Safety
 * `out` must be valid for one write.
 */
int32_t mpid_gamma(size_t k, double u, double *out);

/**
 * Computes a rank-`k` column interpolative decomposition of `a` under the
 * given precision context and skeleton variant. On
 * `MPID_STATUS_UNDERFLOW`, [`mpid_last_underflow_step`] reports the step
 * whose pivot norm vanished.
 *
 * # Safety
 * `a` must be a live handle; `out` valid for one write.
 */
int32_t mpid_id_compute(const struct MpidMatrix *a,
                        size_t k,
                        int32_t context,
                        int32_t variant,
                        struct MpidId **out);

size_t mpid_id_rank(const struct MpidId *id);

/**
 * Copies the skeleton column indices, in pivot order, into `buf`. `len`
 * must be at least the decomposition rank.
 *
 * # Safety
 * `id` must be a live handle; `buf` valid for `len` writes.
 */
int32_t mpid_id_indices(const struct MpidId *id, size_t *buf, size_t len);

/**
 * Returns a copy of the `k x n` coefficient matrix as a new handle.
 *
 * # Safety
 * `id` must be a live handle; `out` valid for one write.
 */
int32_t mpid_id_coefficients(const struct MpidId *id, struct MpidMatrix **out);

/**
 * Rebuilds the rank-`k` approximation `source(:, indices) * P` as a new
 * matrix handle. `source` must be the matrix the decomposition was
 * computed from (or one of identical shape).
 *
 * # Safety
 * Both handles must be live; `out` valid for one write.
 */
int32_t mpid_id_reconstruct(const struct MpidMatrix *source,
                            const struct MpidId *id,
                            struct MpidMatrix **out);

/**
 * Releases a decomposition handle. Null is ignored.
 *
 * # Safety
 * `id` must be null or an unfreed pointer from this library.
 */
void mpid_id_free(struct MpidId *id);

/**
 * Relative spectral error `||a - b||_2 / ||a||_2` between two matrices of
 * the same shape, estimated by seeded power iteration.
 *
 * # Safety
 * Both handles must be live; `out` valid for one write.
 */
int32_t mpid_rel_spectral_error(const struct MpidMatrix *a,
                                const struct MpidMatrix *b,
                                double *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* MPID_H */
