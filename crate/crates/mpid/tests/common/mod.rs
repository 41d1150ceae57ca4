//! Helpers shared by the integration test targets.
//!
//! The half-precision oracle here is deliberately table-driven and shares no
//! code with the library: it decodes every finite binary16 encoding into its
//! exact `f64` value once, then rounds by neighbor search with ties broken
//! to the even encoding. Disagreement between this and the library's
//! exponent-arithmetic rounder would expose a bug in one of them.
#![allow(dead_code)]

use std::sync::OnceLock;

use mpid::matrix::DenseMatrix;

/// All nonnegative finite binary16 values, ascending, with their encodings.
pub struct F16Table {
    pub vals: Vec<f64>,
    pub bits: Vec<u16>,
}

/// Exact value of one nonnegative finite binary16 encoding.
fn decode(bits: u16) -> f64 {
    let exp = (bits >> 10) & 0x1f;
    let frac = (bits & 0x3ff) as f64;
    if exp == 0 {
        // Subnormal: frac * 2^(1 - 15 - 10).
        frac * (2f64).powi(-24)
    } else {
        // Normal: (1 + frac/1024) * 2^(exp - 15).
        (1024.0 + frac) * (2f64).powi(exp as i32 - 25)
    }
}

pub fn f16_table() -> &'static F16Table {
    static TABLE: OnceLock<F16Table> = OnceLock::new();
    TABLE.get_or_init(|| {
        let bits: Vec<u16> = (0x0000..=0x7bffu16).collect();
        let vals: Vec<f64> = bits.iter().map(|&b| decode(b)).collect();
        // Nonnegative IEEE encodings order like integers, so the table is
        // already strictly increasing; the rounder depends on that.
        debug_assert!(vals.windows(2).all(|w| w[0] < w[1]));
        F16Table { vals, bits }
    })
}

/// Round `x` to binary16 by table lookup: exact hits return themselves,
/// everything else goes to the nearer neighbor, ties to the even encoding.
/// Magnitudes at or beyond 65520 (the midpoint to the first unrepresentable
/// step) overflow to infinity.
pub fn oracle_round_f16(x: f64) -> f64 {
    if x.is_nan() {
        return f64::NAN;
    }
    let neg = x.is_sign_negative();
    let a = x.abs();
    let signed = |v: f64| if neg { -v } else { v };
    if a == 0.0 || a.is_infinite() {
        return x;
    }
    if a >= 65520.0 {
        return signed(f64::INFINITY);
    }
    if a > 65504.0 {
        return signed(65504.0);
    }
    let t = f16_table();
    match t.vals.binary_search_by(|v| v.partial_cmp(&a).unwrap()) {
        Ok(i) => signed(t.vals[i]),
        Err(i) => {
            // 0 < a < 65504 and the table brackets that range, so both
            // neighbors exist.
            let (lo, hi) = (i - 1, i);
            // Adjacent binary16 values are dyadics a half-ulp apart; their
            // midpoint is exact in f64.
            let mid = (t.vals[lo] + t.vals[hi]) / 2.0;
            let pick = if a < mid {
                lo
            } else if a > mid {
                hi
            } else if t.bits[lo] & 1 == 0 {
                lo
            } else {
                hi
            };
            signed(t.vals[pick])
        }
    }
}

/// Bitwise matrix equality, distinguishing signed zeros and NaN payloads.
pub fn bits_equal(a: &DenseMatrix, b: &DenseMatrix) -> bool {
    a.rows() == b.rows()
        && a.cols() == b.cols()
        && a.data()
            .iter()
            .zip(b.data())
            .all(|(x, y)| x.to_bits() == y.to_bits())
}
