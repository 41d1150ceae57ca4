//! Crate-wide error type.

use crate::matrix::PermutationVector;

pub type Result<T> = std::result::Result<T, Error>;

/// Partial factorization state attached to an underflow failure.
///
/// `step` is the zero-based elimination step at which the pivot norm vanished;
/// the factorization completed `step` columns. `piv` is the full permutation
/// as of that step, so the already-selected skeleton is `piv[..step]`.
#[derive(Debug, Clone)]
pub struct UnderflowState {
    pub step: usize,
    pub piv: PermutationVector,
}

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("entry ({row}, {col}) = {value:e} does not fit the target format")]
    Overflow { row: usize, col: usize, value: f64 },

    #[error("pivot norm vanished in the target precision at step {}", .0.step)]
    Underflow(Box<UnderflowState>),

    #[error("{0}")]
    Domain(String),

    #[error("{0}")]
    Dimension(String),

    #[error("{what} did not converge: relative change {change:e} after {iters} iterations")]
    Convergence {
        what: &'static str,
        change: f64,
        iters: usize,
    },

    #[error("{0}")]
    Degenerate(String),

    #[error("{0}")]
    Config(String),

    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn dimension(msg: impl Into<String>) -> Self {
        Error::Dimension(msg.into())
    }

    pub(crate) fn degenerate(msg: impl Into<String>) -> Self {
        Error::Degenerate(msg.into())
    }

    pub(crate) fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }

    /// Underflow details, if this is an underflow failure.
    pub fn underflow_state(&self) -> Option<&UnderflowState> {
        match self {
            Error::Underflow(s) => Some(s),
            _ => None,
        }
    }
}
