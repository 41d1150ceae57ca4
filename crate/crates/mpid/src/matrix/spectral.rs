//! Spectral norm estimation by power iteration on the Gram operator.

use super::DenseMatrix;
use crate::error::{Error, Result};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

/// Default relative tolerance on successive estimates.
pub const SPECTRAL_TOL: f64 = 1e-10;
/// Default iteration cap.
pub const SPECTRAL_MAX_ITER: usize = 5000;

fn matvec(a: &DenseMatrix, x: &[f64]) -> Vec<f64> {
    let mut y = vec![0.0; a.rows()];
    for j in 0..a.cols() {
        let xj = x[j];
        if xj == 0.0 {
            continue;
        }
        for (yi, aij) in y.iter_mut().zip(a.col(j)) {
            *yi += aij * xj;
        }
    }
    y
}

fn matvec_t(a: &DenseMatrix, x: &[f64]) -> Vec<f64> {
    (0..a.cols())
        .map(|j| a.col(j).iter().zip(x).map(|(v, w)| v * w).sum())
        .collect()
}

fn norm2(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum::<f64>().sqrt()
}

/// Power iteration on `A^T A` from a seeded random start.
///
/// Returns the largest-singular-value estimate together with the relative
/// change between the last two estimates (0 when the iteration terminated
/// exactly, e.g. on a zero matrix).
pub(crate) fn spectral_estimate(
    a: &DenseMatrix,
    tol: f64,
    max_iter: usize,
    seed: u64,
) -> (f64, f64) {
    if a.data().iter().all(|&v| v == 0.0) {
        return (0.0, 0.0);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut v: Vec<f64> = (0..a.cols())
        .map(|_| StandardNormal.sample(&mut rng))
        .collect();
    let nv = norm2(&v);
    for e in v.iter_mut() {
        *e /= nv;
    }

    let mut prev = 0.0f64;
    let mut change = 1.0f64;
    for _ in 0..max_iter {
        let u = matvec(a, &v);
        let sigma = norm2(&u);
        if sigma == 0.0 {
            // The start vector landed in the null space exactly.
            return (0.0, 0.0);
        }
        let w = matvec_t(a, &u);
        let nw = norm2(&w);
        if nw == 0.0 {
            return (sigma, 0.0);
        }
        for (vi, wi) in v.iter_mut().zip(&w) {
            *vi = wi / nw;
        }
        change = (sigma - prev).abs() / sigma;
        prev = sigma;
        if change < tol {
            return (prev, change);
        }
    }
    (prev, change)
}

/// Largest singular value of `a`, estimated by power iteration on `A^T A`
/// with Rayleigh-quotient square roots, run in native `f64`.
///
/// Stops once successive estimates agree to a relative `tol`. If `max_iter`
/// is exhausted while the estimate is still moving by more than `100 * tol`
/// relative, the run is reported as a convergence failure; within that slack
/// the last estimate is returned, since a slow tail only occurs when the top
/// singular values are nearly tied and any iterate mixes them accurately.
pub fn spectral_norm(a: &DenseMatrix, tol: f64, max_iter: usize, seed: u64) -> Result<f64> {
    if !(tol > 0.0 && tol < 1.0) {
        return Err(Error::domain(format!("tolerance {tol:e} is outside (0, 1)")));
    }
    if max_iter == 0 {
        return Err(Error::domain("max_iter must be at least 1"));
    }
    if !a.is_all_finite() {
        return Err(Error::domain("matrix has non-finite entries"));
    }
    let (est, change) = spectral_estimate(a, tol, max_iter, seed);
    if change > 100.0 * tol {
        return Err(Error::Convergence {
            what: "power iteration",
            change,
            iters: max_iter,
        });
    }
    Ok(est)
}
