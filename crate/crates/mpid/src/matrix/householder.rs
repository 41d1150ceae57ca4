//! Unpivoted Householder QR, used where a fully orthogonal basis matters
//! more than rank revealing (e.g. drawing orthonormal factors).

use super::DenseMatrix;

/// Thin QR factorization `a = q * r` by Householder reflections in native
/// `f64`. With `t = min(rows, cols)`: `q` is `rows x t` with orthonormal
/// columns, `r` is `t x cols` upper trapezoidal. Diagonal entries of `r` may
/// carry either sign.
pub fn householder_qr(a: &DenseMatrix) -> (DenseMatrix, DenseMatrix) {
    let m = a.rows();
    let n = a.cols();
    let t = m.min(n);
    let mut work = a.clone();
    // Reflector j is I - beta * v v^T acting on rows j..m.
    let mut vs: Vec<Vec<f64>> = Vec::with_capacity(t);
    let mut betas = Vec::with_capacity(t);

    for j in 0..t {
        let col = work.col(j);
        let mut v: Vec<f64> = col[j..].to_vec();
        let sigma = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        let beta;
        if sigma == 0.0 {
            beta = 0.0;
        } else {
            let alpha = if v[0] >= 0.0 { -sigma } else { sigma };
            v[0] -= alpha;
            let vtv: f64 = v.iter().map(|x| x * x).sum();
            beta = if vtv > 0.0 { 2.0 / vtv } else { 0.0 };
            for c in j..n {
                let colc = work.col_mut(c);
                let w: f64 = v.iter().zip(&colc[j..]).map(|(vi, xi)| vi * xi).sum();
                let scale = beta * w;
                for (vi, xi) in v.iter().zip(colc[j..].iter_mut()) {
                    *xi -= scale * vi;
                }
            }
        }
        vs.push(v);
        betas.push(beta);
    }

    let mut r = DenseMatrix::zeros(t, n);
    for c in 0..n {
        for i in 0..t.min(c + 1) {
            r.set(i, c, work.get(i, c));
        }
    }

    // Accumulate Q by applying reflectors to the thin identity in reverse.
    let mut q = DenseMatrix::zeros(m, t);
    for j in 0..t {
        q.set(j, j, 1.0);
    }
    for j in (0..t).rev() {
        if betas[j] == 0.0 {
            continue;
        }
        let v = &vs[j];
        for c in 0..t {
            let colc = q.col_mut(c);
            let w: f64 = v.iter().zip(&colc[j..]).map(|(vi, xi)| vi * xi).sum();
            let scale = betas[j] * w;
            for (vi, xi) in v.iter().zip(colc[j..].iter_mut()) {
                *xi -= scale * vi;
            }
        }
    }
    (q, r)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_matrix(m: usize, n: usize, seed: u64) -> DenseMatrix {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        DenseMatrix::from_fn(m, n, |_, _| rng.gen_range(-1.0..1.0))
    }

    fn max_orthogonality_defect(q: &DenseMatrix) -> f64 {
        let g = q.transpose().matmul(q);
        let mut worst = 0.0f64;
        for i in 0..g.rows() {
            for j in 0..g.cols() {
                let want = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((g.get(i, j) - want).abs());
            }
        }
        worst
    }

    #[test]
    fn factors_reproduce_input() {
        for &(m, n, seed) in &[(8usize, 8usize, 1u64), (20, 7, 2), (6, 11, 3)] {
            let a = random_matrix(m, n, seed);
            let (q, r) = householder_qr(&a);
            assert_eq!(q.rows(), m);
            assert_eq!(r.cols(), n);
            let err = a.sub(&q.matmul(&r)).frobenius_norm();
            assert!(err <= 1e-13 * a.frobenius_norm(), "residual {err:e}");
            assert!(max_orthogonality_defect(&q) < 1e-13);
        }
    }

    #[test]
    fn r_is_upper_trapezoidal() {
        let a = random_matrix(9, 5, 4);
        let (_, r) = householder_qr(&a);
        for j in 0..r.cols() {
            for i in (j + 1)..r.rows() {
                assert_eq!(r.get(i, j), 0.0);
            }
        }
    }

    #[test]
    fn handles_zero_columns() {
        let mut a = random_matrix(6, 4, 5);
        for v in a.col_mut(1).iter_mut() {
            *v = 0.0;
        }
        let (q, r) = householder_qr(&a);
        let err = a.sub(&q.matmul(&r)).frobenius_norm();
        assert!(err <= 1e-13 * a.frobenius_norm());
    }
}
