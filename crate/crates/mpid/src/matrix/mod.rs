//! Dense column-major matrices and the context-aware kernels on them.

mod dense;
mod householder;
mod kernels;
mod spectral;
mod svd;

pub use dense::{DenseMatrix, PermutationVector};
pub use householder::householder_qr;
pub use kernels::{col_norm2_ctx, dot_ctx};
pub use spectral::{spectral_norm, SPECTRAL_MAX_ITER, SPECTRAL_TOL};
pub use svd::{svd_small, Svd};

pub(crate) use spectral::spectral_estimate;
