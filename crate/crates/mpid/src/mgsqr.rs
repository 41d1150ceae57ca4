//! Column-pivoted QR by modified Gram-Schmidt under a precision context.
//!
//! At each elimination step the Euclidean norms of all trailing columns are
//! recomputed from the stored working matrix (no norm downdating), the column
//! of largest norm is swapped into the pivot position, and the remaining
//! columns are orthogonalized against the new basis vector with one round of
//! modified Gram-Schmidt. Every arithmetic result is rounded to the context's
//! accumulation format and every write-back to the context's storage format,
//! so the factorization degrades exactly as it would on narrow hardware.

use crate::error::{Error, Result, UnderflowState};
use crate::matrix::{col_norm2_ctx, dot_ctx, DenseMatrix, PermutationVector};
use crate::precision::PrecisionContext;

/// A rank-`k` column-pivoted QR factorization produced under a context.
///
/// `q` is `m x k` with near-orthonormal columns, `r` is `k x n` upper
/// trapezoidal with its columns in pivoted order: column `i` of `r` belongs
/// to original column `piv[i]`. The diagonal of `r` is nonnegative and
/// nonincreasing up to storage rounding. Entries of `piv` beyond position
/// `k` are left in whatever order the first `k` steps produced.
#[derive(Clone, Debug)]
pub struct PivotedQr {
    pub q: DenseMatrix,
    pub r: DenseMatrix,
    pub piv: PermutationVector,
    pub rank: usize,
    pub ctx: PrecisionContext,
}

impl PivotedQr {
    /// The factorization this one would have produced had it stopped at rank
    /// `k`. Selected columns never move after their step, so the leading `k`
    /// columns of `q`, rows of `r`, and entries of `piv` are exact prefixes;
    /// only the ordering among unselected columns can differ from a direct
    /// rank-`k` run, and `r`'s columns travel with `piv` so the pairing is
    /// unchanged.
    pub fn truncate(&self, k: usize) -> Result<PivotedQr> {
        if k == 0 || k > self.rank {
            return Err(Error::dimension(format!(
                "cannot truncate rank-{} factorization to rank {k}",
                self.rank
            )));
        }
        let m = self.q.rows();
        let n = self.r.cols();
        let mut q = DenseMatrix::zeros(m, k);
        for j in 0..k {
            q.col_mut(j).copy_from_slice(self.q.col(j));
        }
        let r = DenseMatrix::from_fn(k, n, |i, j| self.r.get(i, j));
        Ok(PivotedQr {
            q,
            r,
            piv: self.piv.clone(),
            rank: k,
            ctx: self.ctx,
        })
    }
}

/// Rank-`k` column-pivoted MGS QR of `a` under `ctx`.
///
/// Expects the entries of `a` to already be representable in the context's
/// storage format (see [`crate::precision::round_matrix`]). Ties in the pivot
/// norm go to the lowest column index.
///
/// Fails with a dimension error unless `1 <= k <= min(m, n)`, and with
/// [`Error::Underflow`] when a selected pivot norm stores to zero or its
/// square falls below the smallest normal accumulation value, which is how a
/// factorization dies when the trailing block drops beneath the storage
/// format's subnormal range. The underflow error carries the step index and
/// the permutation state at that step.
pub fn mgsqr(a: &DenseMatrix, k: usize, ctx: PrecisionContext) -> Result<PivotedQr> {
    let m = a.rows();
    let n = a.cols();
    if k == 0 || k > m.min(n) {
        return Err(Error::dimension(format!(
            "rank {k} is outside 1..={} for a {m}x{n} matrix",
            m.min(n)
        )));
    }
    if !a.is_all_finite() {
        return Err(Error::domain("matrix has non-finite entries"));
    }

    let mut w = a.clone();
    let mut q = DenseMatrix::zeros(m, k);
    let mut r = DenseMatrix::zeros(k, n);
    let mut piv = PermutationVector::identity(n);
    let norm_floor = ctx.accumulation().min_positive_normal();

    for j in 0..k {
        let mut best = j;
        let mut best_norm = -1.0;
        for i in j..n {
            let nrm = col_norm2_ctx(&w, i, ctx);
            if nrm > best_norm {
                best_norm = nrm;
                best = i;
            }
        }
        w.swap_cols(j, best);
        // Rows j.. of both columns are still zero, so swapping the computed
        // prefix of r is a whole-column swap.
        r.swap_cols(j, best);
        piv.swap(j, best);

        let rjj = ctx.store(best_norm);
        if rjj == 0.0 || rjj * rjj < norm_floor {
            return Err(Error::Underflow(Box::new(UnderflowState { step: j, piv })));
        }
        r.set(j, j, rjj);

        for (qe, we) in q.col_mut(j).iter_mut().zip(w.col(j)) {
            *qe = ctx.store(ctx.div(*we, rjj));
        }

        for i in (j + 1)..n {
            let rji = ctx.store(dot_ctx(q.col(j), w.col(i), ctx));
            r.set(j, i, rji);
            let qj = q.col(j);
            for (we, qe) in w.col_mut(i).iter_mut().zip(qj) {
                *we = ctx.store(ctx.sub(*we, ctx.mul(rji, *qe)));
            }
        }
    }

    Ok(PivotedQr {
        q,
        r,
        piv,
        rank: k,
        ctx,
    })
}

/// Frobenius norm of `Q^T Q - I`, evaluated in native `f64`.
pub fn check_orthogonality(qr: &PivotedQr) -> f64 {
    let g = qr.q.transpose().matmul(&qr.q);
    let mut sum = 0.0f64;
    for i in 0..g.rows() {
        for j in 0..g.cols() {
            let want = if i == j { 1.0 } else { 0.0 };
            let d = g.get(i, j) - want;
            sum += d * d;
        }
    }
    sum.sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::precision::{round_matrix, FloatFormat};
    use approx::assert_relative_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_matrix(m: usize, n: usize, seed: u64) -> DenseMatrix {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        DenseMatrix::from_fn(m, n, |_, _| rng.gen_range(-1.0..1.0))
    }

    /// `A(:, piv[..k])` compared against `Q * R(:, ..k)`.
    fn selected_residual(a: &DenseMatrix, qr: &PivotedQr) -> f64 {
        let k = qr.rank;
        let idx: Vec<usize> = qr.piv.as_slice()[..k].to_vec();
        let ak = a.select_columns(&idx);
        let rk = DenseMatrix::from_fn(k, k, |i, j| qr.r.get(i, j));
        ak.sub(&qr.q.matmul(&rk)).frobenius_norm()
    }

    #[test]
    fn hand_worked_two_column_example() {
        let a = DenseMatrix::from_col_major(2, 2, vec![3.0, 4.0, 1.0, 1.0]);
        let qr = mgsqr(&a, 1, PrecisionContext::DOUBLE).unwrap();
        assert_eq!(qr.piv.as_slice(), &[0, 1]);
        assert_eq!(qr.r.get(0, 0), 5.0);
        assert_relative_eq!(qr.q.get(0, 0), 0.6, max_relative = 1e-14);
        assert_relative_eq!(qr.q.get(1, 0), 0.8, max_relative = 1e-14);
        assert_relative_eq!(qr.r.get(0, 1), 1.4, max_relative = 1e-14);
        assert_eq!(qr.rank, 1);
    }

    #[test]
    fn full_rank_factorization_reproduces_columns() {
        let a = random_matrix(20, 12, 1);
        let qr = mgsqr(&a, 12, PrecisionContext::DOUBLE).unwrap();
        assert!(selected_residual(&a, &qr) <= 1e-13 * a.frobenius_norm());
        assert!(check_orthogonality(&qr) < 1e-13);
        assert!(qr.piv.is_permutation());
    }

    #[test]
    fn pivot_picks_largest_norm_first() {
        let mut a = DenseMatrix::zeros(3, 3);
        a.set(0, 0, 1.0);
        a.set(1, 1, 3.0);
        a.set(2, 2, 2.0);
        let qr = mgsqr(&a, 3, PrecisionContext::DOUBLE).unwrap();
        assert_eq!(qr.piv.as_slice(), &[1, 2, 0]);
        assert_eq!(qr.r.get(0, 0), 3.0);
        assert_eq!(qr.r.get(1, 1), 2.0);
        assert_eq!(qr.r.get(2, 2), 1.0);
    }

    #[test]
    fn pivot_ties_go_to_lowest_index() {
        let mut a = DenseMatrix::zeros(2, 2);
        a.set(0, 0, 2.0);
        a.set(1, 1, 2.0);
        let qr = mgsqr(&a, 2, PrecisionContext::DOUBLE).unwrap();
        assert_eq!(qr.piv.as_slice(), &[0, 1]);
    }

    #[test]
    fn diagonal_is_nonnegative_and_nonincreasing() {
        for ctx in [PrecisionContext::DOUBLE, PrecisionContext::SINGLE] {
            let a = round_matrix(&random_matrix(30, 18, 2), ctx.storage()).unwrap();
            let qr = mgsqr(&a, 18, ctx).unwrap();
            let slack = 1.0 + 4.0 * ctx.storage().unit_roundoff();
            for j in 0..17 {
                let d0 = qr.r.get(j, j);
                let d1 = qr.r.get(j + 1, j + 1);
                assert!(d0 >= 0.0 && d1 >= 0.0);
                assert!(d1 <= d0 * slack, "diagonal grew at step {j}: {d0} -> {d1}");
            }
        }
    }

    #[test]
    fn r_is_upper_trapezoidal() {
        let a = random_matrix(10, 8, 3);
        let qr = mgsqr(&a, 5, PrecisionContext::DOUBLE).unwrap();
        for j in 0..5 {
            for i in (j + 1)..5 {
                assert_eq!(qr.r.get(i, j), 0.0);
            }
        }
    }

    #[test]
    fn zero_matrix_underflows_at_step_zero() {
        let a = DenseMatrix::zeros(4, 4);
        let err = mgsqr(&a, 2, PrecisionContext::DOUBLE).unwrap_err();
        let state = err.underflow_state().expect("underflow");
        assert_eq!(state.step, 0);
        assert!(state.piv.is_permutation());
    }

    #[test]
    fn half_storage_underflows_on_vanishing_columns() {
        // Second and third columns collapse to zero when stored in binary16.
        let mut a = DenseMatrix::zeros(4, 3);
        a.set(0, 0, 1.0);
        a.set(1, 0, 0.5);
        a.set(2, 1, 1e-9);
        a.set(3, 2, 2e-9);
        let ctx = PrecisionContext::SIMULATED_HALF;
        let al = round_matrix(&a, ctx.storage()).unwrap();
        let err = mgsqr(&al, 2, ctx).unwrap_err();
        let state = err.underflow_state().expect("underflow");
        assert_eq!(state.step, 1);
        assert_eq!(state.piv.as_slice()[0], 0);
        // Rank 1 still succeeds.
        assert!(mgsqr(&al, 1, ctx).is_ok());
    }

    #[test]
    fn truncation_matches_direct_low_rank_run() {
        let a = round_matrix(&random_matrix(25, 16, 4), FloatFormat::BINARY32).unwrap();
        let ctx = PrecisionContext::SINGLE;
        let full = mgsqr(&a, 12, ctx).unwrap();
        let direct = mgsqr(&a, 5, ctx).unwrap();
        let cut = full.truncate(5).unwrap();
        assert_eq!(cut.q, direct.q);
        assert_eq!(cut.piv.as_slice()[..5], direct.piv.as_slice()[..5]);
        for j in 0..5 {
            for i in 0..5 {
                assert_eq!(cut.r.get(i, j), direct.r.get(i, j));
            }
        }
        // Beyond the selected block the column order may differ, but each
        // original column keeps its r column.
        let pair = |qr: &PivotedQr| {
            let mut v: Vec<(usize, Vec<f64>)> = (5..16)
                .map(|i| {
                    (
                        qr.piv.get(i),
                        (0..5).map(|row| qr.r.get(row, i)).collect(),
                    )
                })
                .collect();
            v.sort_by_key(|e| e.0);
            v
        };
        assert_eq!(pair(&cut), pair(&direct));
    }

    #[test]
    fn rejects_bad_rank() {
        let a = random_matrix(6, 4, 5);
        assert!(mgsqr(&a, 0, PrecisionContext::DOUBLE).is_err());
        assert!(mgsqr(&a, 5, PrecisionContext::DOUBLE).is_err());
        assert!(mgsqr(&a, 4, PrecisionContext::DOUBLE).is_ok());
    }

    #[test]
    fn single_context_stores_single_values() {
        let a = round_matrix(&random_matrix(10, 6, 6), FloatFormat::BINARY32).unwrap();
        let qr = mgsqr(&a, 4, PrecisionContext::SINGLE).unwrap();
        for j in 0..4 {
            for &v in qr.q.col(j) {
                assert_eq!(v, (v as f32) as f64);
            }
        }
        for j in 0..6 {
            for i in 0..4 {
                let v = qr.r.get(i, j);
                assert_eq!(v, (v as f32) as f64);
            }
        }
    }
}
