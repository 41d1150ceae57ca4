//! Inner-product kernels evaluated under a precision context.

use super::DenseMatrix;
use crate::precision::{FloatFormat, PrecisionContext};

/// Dot product with strict left-to-right accumulation under `ctx`: each
/// product and each partial sum is rounded to the accumulation format before
/// the next operation. No fused multiply-add. The result is a value of the
/// accumulation format.
pub fn dot_ctx(x: &[f64], y: &[f64], ctx: PrecisionContext) -> f64 {
    assert_eq!(x.len(), y.len(), "dot of vectors with different lengths");
    let acc = ctx.accumulation();
    if acc == FloatFormat::BINARY64 {
        let mut s = 0.0f64;
        for (a, b) in x.iter().zip(y) {
            s += a * b;
        }
        s
    } else if acc == FloatFormat::BINARY32 {
        // Operands of the accumulation format multiply exactly in f64, so the
        // narrowing cast is the single correct rounding; f32 addition then
        // rounds each partial sum.
        let mut s = 0.0f32;
        for (a, b) in x.iter().zip(y) {
            s += (a * b) as f32;
        }
        s as f64
    } else {
        let mut s = 0.0f64;
        for (a, b) in x.iter().zip(y) {
            s = ctx.add(s, ctx.mul(*a, *b));
        }
        s
    }
}

/// Euclidean norm of column `j` of `a` under `ctx`: the rounded square root
/// of the context dot product of the column with itself.
pub fn col_norm2_ctx(a: &DenseMatrix, j: usize, ctx: PrecisionContext) -> f64 {
    let c = a.col(j);
    ctx.sqrt(dot_ctx(c, c, ctx))
}
