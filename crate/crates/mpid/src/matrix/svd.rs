//! One-sided Jacobi SVD for small dense matrices.

use super::DenseMatrix;
use crate::error::{Error, Result};

/// Thin singular value decomposition `A = U * diag(s) * V^T`.
///
/// With `q = min(rows, cols)`: `u` is `rows x q`, `v` is `cols x q`, and `s`
/// holds the `q` singular values in nonincreasing order. Columns of `u` and
/// `v` are orthonormal even where singular values vanish.
#[derive(Clone, Debug)]
pub struct Svd {
    pub u: DenseMatrix,
    pub s: Vec<f64>,
    pub v: DenseMatrix,
}

const MAX_SWEEPS: usize = 30;
const PAIR_TOL: f64 = 1e-15;

/// Jacobi SVD of a small dense matrix in native `f64`.
///
/// Intended for blocks with `min(rows, cols) <= 256`; larger inputs are
/// rejected. Orthogonalizes columns by plane rotations until every pair of
/// columns has relative inner product below 1e-15, which lands reconstruction
/// and orthogonality residuals near 1e-13 for these sizes.
pub fn svd_small(a: &DenseMatrix) -> Result<Svd> {
    if a.rows().min(a.cols()) > 256 {
        return Err(Error::dimension(format!(
            "{}x{} exceeds the small dense limit of 256",
            a.rows(),
            a.cols()
        )));
    }
    if !a.is_all_finite() {
        return Err(Error::domain("matrix has non-finite entries"));
    }
    // One-sided Jacobi wants at least as many rows as columns; run on the
    // transpose otherwise and swap factors at the end.
    let transposed = a.rows() < a.cols();
    let work = if transposed { a.transpose() } else { a.clone() };
    let (u, s, v) = one_sided_jacobi(work)?;
    if transposed {
        Ok(Svd { u: v, s, v: u })
    } else {
        Ok(Svd { u, s, v })
    }
}

fn one_sided_jacobi(mut w: DenseMatrix) -> Result<(DenseMatrix, Vec<f64>, DenseMatrix)> {
    let m = w.rows();
    let n = w.cols();
    let mut v = DenseMatrix::identity(n);

    let mut rotated = true;
    let mut sweeps = 0;
    let mut worst = 0.0f64;
    while rotated {
        if sweeps == MAX_SWEEPS {
            return Err(Error::Convergence {
                what: "jacobi svd",
                change: worst,
                iters: sweeps,
            });
        }
        sweeps += 1;
        rotated = false;
        worst = 0.0;
        for p in 0..n.saturating_sub(1) {
            for q in p + 1..n {
                let (alpha, beta, gamma) = column_gram(&w, p, q);
                let bound = (alpha * beta).sqrt();
                if gamma.abs() <= PAIR_TOL * bound || bound == 0.0 {
                    continue;
                }
                worst = worst.max(gamma.abs() / bound);
                rotated = true;
                let zeta = (beta - alpha) / (2.0 * gamma);
                let sign = if zeta < 0.0 { -1.0 } else { 1.0 };
                let t = sign / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                rotate_cols(&mut w, p, q, c, s);
                rotate_cols(&mut v, p, q, c, s);
            }
        }
    }

    // Column norms are the singular values; sort them nonincreasing.
    let mut order: Vec<usize> = (0..n).collect();
    let norms: Vec<f64> = (0..n)
        .map(|j| w.col(j).iter().map(|x| x * x).sum::<f64>().sqrt())
        .collect();
    order.sort_by(|&i, &j| norms[j].partial_cmp(&norms[i]).unwrap().then(i.cmp(&j)));

    let mut s = Vec::with_capacity(n);
    let mut u = DenseMatrix::zeros(m, n);
    let mut v_sorted = DenseMatrix::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        s.push(norms[src]);
        v_sorted.col_mut(dst).copy_from_slice(v.col(src));
        if norms[src] > 0.0 {
            let inv = 1.0 / norms[src];
            for (out, x) in u.col_mut(dst).iter_mut().zip(w.col(src)) {
                *out = x * inv;
            }
        }
    }
    fill_null_columns(&mut u, &s);
    Ok((u, s, v_sorted))
}

fn column_gram(w: &DenseMatrix, p: usize, q: usize) -> (f64, f64, f64) {
    let cp = w.col(p);
    let cq = w.col(q);
    let mut alpha = 0.0;
    let mut beta = 0.0;
    let mut gamma = 0.0;
    for i in 0..cp.len() {
        alpha += cp[i] * cp[i];
        beta += cq[i] * cq[i];
        gamma += cp[i] * cq[i];
    }
    (alpha, beta, gamma)
}

fn rotate_cols(w: &mut DenseMatrix, p: usize, q: usize, c: f64, s: f64) {
    for i in 0..w.rows() {
        let a = w.get(i, p);
        let b = w.get(i, q);
        w.set(i, p, c * a - s * b);
        w.set(i, q, s * a + c * b);
    }
}

/// Replaces zero columns of `u` (those paired with vanishing singular values)
/// by unit vectors orthogonal to all other columns.
fn fill_null_columns(u: &mut DenseMatrix, s: &[f64]) {
    let m = u.rows();
    for j in 0..s.len() {
        if s[j] > 0.0 {
            continue;
        }
        let mut candidate = 0;
        loop {
            assert!(candidate < m, "ran out of basis vectors");
            let mut col = vec![0.0; m];
            col[candidate] = 1.0;
            // Two orthogonalization passes keep the fill orthogonal to
            // machine precision.
            for _ in 0..2 {
                for other in 0..s.len() {
                    if other == j {
                        continue;
                    }
                    let proj: f64 = u.col(other).iter().zip(&col).map(|(a, b)| a * b).sum();
                    for (ci, ui) in col.iter_mut().zip(u.col(other)) {
                        *ci -= proj * ui;
                    }
                }
            }
            let norm = col.iter().map(|x| x * x).sum::<f64>().sqrt();
            if norm > 0.5 {
                for ci in col.iter_mut() {
                    *ci /= norm;
                }
                u.col_mut(j).copy_from_slice(&col);
                break;
            }
            candidate += 1;
        }
    }
}
