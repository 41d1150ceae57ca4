//! Rank-k column interpolative decomposition (ID) under emulated floating-point
//! precision.
//!
//! The crate simulates IEEE-754 binary16/binary32/binary64 arithmetic on top of
//! native `f64`, runs a column-pivoted modified Gram-Schmidt QR under a chosen
//! precision context, and assembles column-skeleton approximations
//! `A ~= A(:, I) * P`. A benchmark harness sweeps rank and column dimension over
//! synthetic test matrices with prescribed singular-value decay and writes CSV
//! and SVG reports; the `mpid` binary drives it from the command line.

pub mod error;
pub mod harness;
pub mod id;
pub mod matrix;
pub mod mgsqr;
pub mod precision;
pub mod synth;

pub use error::{Error, Result};
