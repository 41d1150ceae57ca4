//! Column-major dense storage.

/// A dense `rows x cols` matrix of `f64`, stored column-major so that every
/// column is a contiguous slice. Both dimensions are at least 1.
#[derive(Clone, Debug, PartialEq)]
pub struct DenseMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl DenseMatrix {
    pub fn zeros(rows: usize, cols: usize) -> DenseMatrix {
        assert!(rows > 0 && cols > 0, "matrix dimensions must be positive");
        DenseMatrix {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn identity(n: usize) -> DenseMatrix {
        let mut m = DenseMatrix::zeros(n, n);
        for i in 0..n {
            m.set(i, i, 1.0);
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> f64) -> DenseMatrix {
        let mut m = DenseMatrix::zeros(rows, cols);
        for j in 0..cols {
            for i in 0..rows {
                m.set(i, j, f(i, j));
            }
        }
        m
    }

    /// Wraps existing column-major data. `data.len()` must equal `rows * cols`.
    pub fn from_col_major(rows: usize, cols: usize, data: Vec<f64>) -> DenseMatrix {
        assert!(rows > 0 && cols > 0, "matrix dimensions must be positive");
        assert_eq!(data.len(), rows * cols, "data length does not match shape");
        DenseMatrix { rows, cols, data }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        debug_assert!(i < self.rows && j < self.cols);
        self.data[j * self.rows + i]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        debug_assert!(i < self.rows && j < self.cols);
        self.data[j * self.rows + i] = v;
    }

    #[inline]
    pub fn col(&self, j: usize) -> &[f64] {
        &self.data[j * self.rows..(j + 1) * self.rows]
    }

    #[inline]
    pub fn col_mut(&mut self, j: usize) -> &mut [f64] {
        &mut self.data[j * self.rows..(j + 1) * self.rows]
    }

    /// The full column-major backing slice.
    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn swap_cols(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        assert!(a < self.cols && b < self.cols);
        let (lo, hi) = if a < b { (a, b) } else { (b, a) };
        let (head, tail) = self.data.split_at_mut(hi * self.rows);
        head[lo * self.rows..(lo + 1) * self.rows].swap_with_slice(&mut tail[..self.rows]);
    }

    pub fn transpose(&self) -> DenseMatrix {
        let mut t = DenseMatrix::zeros(self.cols, self.rows);
        for j in 0..self.cols {
            for i in 0..self.rows {
                t.set(j, i, self.get(i, j));
            }
        }
        t
    }

    /// `self * other` in native `f64`, accumulated column by column in index
    /// order so results are reproducible.
    pub fn matmul(&self, other: &DenseMatrix) -> DenseMatrix {
        assert_eq!(self.cols, other.rows, "inner dimensions differ");
        let mut c = DenseMatrix::zeros(self.rows, other.cols);
        for j in 0..other.cols {
            let out = &mut c.data[j * self.rows..(j + 1) * self.rows];
            for l in 0..self.cols {
                let s = other.get(l, j);
                if s == 0.0 {
                    continue;
                }
                let a = &self.data[l * self.rows..(l + 1) * self.rows];
                for i in 0..self.rows {
                    out[i] += a[i] * s;
                }
            }
        }
        c
    }

    /// Copies the named columns into a new matrix, in the order given.
    pub fn select_columns(&self, idx: &[usize]) -> DenseMatrix {
        assert!(!idx.is_empty());
        let mut m = DenseMatrix::zeros(self.rows, idx.len());
        for (dst, &src) in idx.iter().enumerate() {
            assert!(src < self.cols, "column index {src} out of bounds");
            m.col_mut(dst).copy_from_slice(self.col(src));
        }
        m
    }

    /// Elementwise `self - other`.
    pub fn sub(&self, other: &DenseMatrix) -> DenseMatrix {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        let data = self
            .data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| a - b)
            .collect();
        DenseMatrix {
            rows: self.rows,
            cols: self.cols,
            data,
        }
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn is_all_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }
}

/// A permutation of the column indices `0..n`.
///
/// Stays a valid permutation through any sequence of swaps, including the
/// partial state carried out of a failed factorization.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PermutationVector(Vec<usize>);

impl PermutationVector {
    pub fn identity(n: usize) -> PermutationVector {
        PermutationVector((0..n).collect())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    #[inline]
    pub fn get(&self, i: usize) -> usize {
        self.0[i]
    }

    pub fn swap(&mut self, a: usize, b: usize) {
        self.0.swap(a, b);
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.0
    }

    /// True when every index in `0..len` appears exactly once.
    pub fn is_permutation(&self) -> bool {
        let n = self.0.len();
        let mut seen = vec![false; n];
        for &i in &self.0 {
            if i >= n || seen[i] {
                return false;
            }
            seen[i] = true;
        }
        true
    }
}
