//! Synthetic test matrices with a known singular spectrum.
//!
//! Each dataset is `A = U diag(sigma) V^T` where `U` and `V` are orthonormal
//! factors drawn from seeded Gaussians and `sigma_i = i^-p` for a decay
//! exponent `p`. The spectrum is known in closed form, so approximation error
//! can be compared against the best possible rank-k error without ever
//! computing an SVD of `A`.

use crate::error::{Error, Result};
use crate::matrix::{householder_qr, DenseMatrix};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

/// Decay family of the singular spectrum: `sigma_i = i^-p`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum DecayName {
    /// `p = 1`
    Slow,
    /// `p = 2`
    Medium,
    /// `p = 4`
    Fast,
}

impl DecayName {
    pub const ALL: [DecayName; 3] = [DecayName::Slow, DecayName::Medium, DecayName::Fast];

    pub fn exponent(self) -> u32 {
        match self {
            DecayName::Slow => 1,
            DecayName::Medium => 2,
            DecayName::Fast => 4,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            DecayName::Slow => "slow",
            DecayName::Medium => "medium",
            DecayName::Fast => "fast",
        }
    }

    pub fn parse(s: &str) -> Result<DecayName> {
        match s {
            "slow" => Ok(DecayName::Slow),
            "medium" => Ok(DecayName::Medium),
            "fast" => Ok(DecayName::Fast),
            other => Err(Error::config(format!(
                "unknown dataset {other:?}, expected slow, medium, or fast"
            ))),
        }
    }
}

/// Full description of one synthetic matrix.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct DecayProfile {
    pub name: DecayName,
    pub m: usize,
    pub n: usize,
    pub seed: u64,
}

/// Orthonormal `U` (m x r) and `V` (n x r), `r = min(m, n)`, drawn once per
/// `(m, n, seed)` and reusable across every spectrum of that shape.
#[derive(Clone, Debug)]
pub struct HaarFactors {
    u: DenseMatrix,
    v: DenseMatrix,
}

impl HaarFactors {
    /// Orthonormalizes two seeded Gaussian blocks drawn from one stream.
    /// Each factor's columns are sign-fixed against the triangular diagonal
    /// so the distribution over orthonormal frames is uniform.
    pub fn generate(m: usize, n: usize, seed: u64) -> Result<HaarFactors> {
        if m == 0 || n == 0 {
            return Err(Error::dimension(format!("empty shape {m}x{n}")));
        }
        let r = m.min(n);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let u = orthonormal_block(m, r, &mut rng);
        let v = orthonormal_block(n, r, &mut rng);
        Ok(HaarFactors { u, v })
    }

    pub fn u(&self) -> &DenseMatrix {
        &self.u
    }

    pub fn v(&self) -> &DenseMatrix {
        &self.v
    }

    pub fn rank(&self) -> usize {
        self.u.cols()
    }

    /// `U diag(spectrum) V^T`; `spectrum` must have one entry per column.
    pub fn apply_spectrum(&self, spectrum: &[f64]) -> Result<DenseMatrix> {
        if spectrum.len() != self.rank() {
            return Err(Error::dimension(format!(
                "spectrum has {} entries for {} columns",
                spectrum.len(),
                self.rank()
            )));
        }
        let mut us = self.u.clone();
        for (j, &s) in spectrum.iter().enumerate() {
            for v in us.col_mut(j).iter_mut() {
                *v *= s;
            }
        }
        Ok(us.matmul(&self.v.transpose()))
    }
}

fn orthonormal_block(rows: usize, cols: usize, rng: &mut ChaCha8Rng) -> DenseMatrix {
    let mut g = DenseMatrix::zeros(rows, cols);
    for j in 0..cols {
        for v in g.col_mut(j).iter_mut() {
            *v = StandardNormal.sample(rng);
        }
    }
    let (mut q, r) = householder_qr(&g);
    for j in 0..cols {
        if r.get(j, j) < 0.0 {
            for v in q.col_mut(j).iter_mut() {
                *v = -*v;
            }
        }
    }
    q
}

/// The exact spectrum `[1, 2^-p, 3^-p, ...]` with `count` entries.
///
/// Every `i^p` here is an exactly representable integer, so each entry is a
/// single correctly rounded division.
pub fn singular_spectrum(count: usize, exponent: u32) -> Vec<f64> {
    (1..=count)
        .map(|i| 1.0 / (i as f64).powi(exponent as i32))
        .collect()
}

/// Generates the matrix of `profile` together with its exact spectrum.
pub fn gen_decay_matrix(profile: DecayProfile) -> Result<(DenseMatrix, Vec<f64>)> {
    let factors = HaarFactors::generate(profile.m, profile.n, profile.seed)?;
    let sigma = singular_spectrum(factors.rank(), profile.name.exponent());
    let a = factors.apply_spectrum(&sigma)?;
    Ok((a, sigma))
}

/// Magnitude summary of a matrix, used to reason about storage-format fit.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ValueRange {
    pub max_abs: f64,
    /// Smallest nonzero magnitude; 0 when the matrix is identically zero.
    pub min_abs_nonzero: f64,
    /// `max_abs / min_abs_nonzero`; 0 for the zero matrix. Infinite entries
    /// propagate here rather than erroring.
    pub ratio: f64,
    pub has_zero: bool,
}

pub fn value_range(a: &DenseMatrix) -> ValueRange {
    let mut max_abs = 0.0f64;
    let mut min_nz = f64::INFINITY;
    let mut has_zero = false;
    for j in 0..a.cols() {
        for &x in a.col(j) {
            let ax = x.abs();
            if ax == 0.0 {
                has_zero = true;
            } else {
                max_abs = max_abs.max(ax);
                min_nz = min_nz.min(ax);
            }
        }
    }
    if min_nz.is_infinite() && max_abs == 0.0 {
        return ValueRange {
            max_abs: 0.0,
            min_abs_nonzero: 0.0,
            ratio: 0.0,
            has_zero,
        };
    }
    ValueRange {
        max_abs,
        min_abs_nonzero: min_nz,
        ratio: max_abs / min_nz,
        has_zero,
    }
}

/// The first `n` columns of `a` as a new matrix.
pub fn column_prefix(a: &DenseMatrix, n: usize) -> Result<DenseMatrix> {
    if n == 0 || n > a.cols() {
        return Err(Error::dimension(format!(
            "prefix width {n} is outside 1..={}",
            a.cols()
        )));
    }
    let idx: Vec<usize> = (0..n).collect();
    Ok(a.select_columns(&idx))
}
