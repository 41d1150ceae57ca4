//! Emulated IEEE-754 binary floating-point formats.
//!
//! Values are always carried in native `f64`; a [`FloatFormat`] describes a
//! narrower binary format and [`round_scalar`] maps an `f64` onto that
//! format's representable set with round-to-nearest, ties-to-even. Gradual
//! underflow is honoured: magnitudes between the smallest subnormal and the
//! smallest normal round onto the subnormal grid, and magnitudes below half
//! the smallest subnormal round to signed zero. Values past the overflow
//! threshold round to infinity.
//!
//! A [`PrecisionContext`] pairs a storage format with an accumulation format.
//! Every arithmetic result is rounded to the accumulation format; every
//! write-back to a stored matrix or vector is additionally rounded to the
//! storage format. The `Double` context is the identity on `f64`.

use crate::error::{Error, Result};
use crate::matrix::DenseMatrix;

/// Exact power of two, valid for exponents down to the `f64` subnormal floor.
#[inline]
pub(crate) fn pow2(n: i32) -> f64 {
    debug_assert!((-1074..=1023).contains(&n));
    if n >= -1022 {
        f64::from_bits(((n + 1023) as u64) << 52)
    } else {
        f64::from_bits(1u64 << (n + 1074))
    }
}

/// An IEEE-754 binary interchange format with base 2.
///
/// `mantissa_bits` counts stored fraction bits, so the working precision is
/// `mantissa_bits + 1`. Exponent bounds are the usual biased-format values:
/// `e_max = 2^(exponent_bits-1) - 1`, `e_min = 1 - e_max`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct FloatFormat {
    exponent_bits: u32,
    mantissa_bits: u32,
    e_min: i32,
    e_max: i32,
}

impl FloatFormat {
    /// binary16: 5 exponent bits, 10 fraction bits, unit roundoff 2^-11.
    pub const BINARY16: FloatFormat = FloatFormat::new(5, 10);
    /// binary32: 8 exponent bits, 23 fraction bits, unit roundoff 2^-24.
    pub const BINARY32: FloatFormat = FloatFormat::new(8, 23);
    /// binary64: 11 exponent bits, 52 fraction bits, unit roundoff 2^-53.
    pub const BINARY64: FloatFormat = FloatFormat::new(11, 52);

    /// A format that fits inside `f64`. Panics if the exponent or mantissa
    /// width exceeds what `f64` can emulate exactly.
    pub const fn new(exponent_bits: u32, mantissa_bits: u32) -> FloatFormat {
        assert!(2 <= exponent_bits && exponent_bits <= 11);
        assert!(1 <= mantissa_bits && mantissa_bits <= 52);
        let e_max = (1i32 << (exponent_bits - 1)) - 1;
        FloatFormat {
            exponent_bits,
            mantissa_bits,
            e_min: 1 - e_max,
            e_max,
        }
    }

    pub const fn base(&self) -> u32 {
        2
    }

    pub const fn exponent_bits(&self) -> u32 {
        self.exponent_bits
    }

    pub const fn mantissa_bits(&self) -> u32 {
        self.mantissa_bits
    }

    /// Working precision in bits, counting the implicit leading one.
    pub const fn precision_bits(&self) -> u32 {
        self.mantissa_bits + 1
    }

    /// Smallest normal exponent.
    pub const fn e_min(&self) -> i32 {
        self.e_min
    }

    /// Largest normal exponent.
    pub const fn e_max(&self) -> i32 {
        self.e_max
    }

    /// Unit roundoff `u = 2^-precision_bits`: half the spacing between 1 and
    /// the next representable value.
    pub fn unit_roundoff(&self) -> f64 {
        pow2(-(self.precision_bits() as i32))
    }

    /// Largest finite representable magnitude, e.g. 65504 for binary16.
    pub fn max_finite(&self) -> f64 {
        (2.0 - pow2(1 - self.precision_bits() as i32)) * pow2(self.e_max)
    }

    /// Smallest positive normal magnitude, `2^e_min`.
    pub fn min_positive_normal(&self) -> f64 {
        pow2(self.e_min)
    }

    /// Smallest positive subnormal magnitude, e.g. 2^-24 for binary16.
    pub fn min_positive_subnormal(&self) -> f64 {
        pow2(self.e_min - self.mantissa_bits as i32)
    }
}

/// Rounds `x` onto the representable set of `f` with round-to-nearest,
/// ties-to-even. The result is returned as the mathematically equal `f64`.
///
/// NaN maps to NaN, infinities and signed zeros are preserved, magnitudes past
/// the overflow threshold `(2 - u) * 2^e_max` map to signed infinity, and
/// magnitudes at or below half the smallest subnormal map to signed zero.
/// Rounding any `f64` to `BINARY64` is the identity, bit for bit.
#[inline]
pub fn round_scalar(x: f64, f: FloatFormat) -> f64 {
    if f.mantissa_bits == 52 {
        x
    } else if f.mantissa_bits == 23 && f.exponent_bits == 8 {
        // The hardware narrowing cast is exactly round-to-nearest-even.
        x as f32 as f64
    } else {
        round_generic(x, f)
    }
}

/// Integer-arithmetic rounding path for formats without hardware support.
fn round_generic(x: f64, f: FloatFormat) -> f64 {
    if x.is_nan() {
        return f64::NAN;
    }
    if x == 0.0 || x.is_infinite() {
        return x;
    }
    let neg = x.is_sign_negative();
    let bits = x.abs().to_bits();
    let biased = (bits >> 52) as i64;
    let frac = bits & ((1u64 << 52) - 1);
    // Normalize to |x| = sig * 2^(e-52) with 2^52 <= sig < 2^53.
    let (sig, e) = if biased == 0 {
        let shift = frac.leading_zeros() as i64 - 11;
        (frac << shift, -1022 - shift)
    } else {
        (frac | (1u64 << 52), biased - 1023)
    };

    let p = f.precision_bits() as i64;
    let mut drop = 53 - p;
    if e < f.e_min as i64 {
        // Subnormal range of the target: precision shrinks with the exponent.
        drop += f.e_min as i64 - e;
    }
    let rounded = if drop == 0 {
        sig
    } else if drop >= 64 {
        0
    } else {
        let kept = sig >> drop;
        let rem = sig & ((1u64 << drop) - 1);
        let half = 1u64 << (drop - 1);
        if rem > half || (rem == half && kept & 1 == 1) {
            kept + 1
        } else {
            kept
        }
    };
    if rounded == 0 {
        return if neg { -0.0 } else { 0.0 };
    }
    let val = (rounded as f64) * pow2((e - 52 + drop) as i32);
    let val = if val > f.max_finite() {
        f64::INFINITY
    } else {
        val
    };
    if neg {
        -val
    } else {
        val
    }
}

/// Rounds every entry of `a` into format `f`.
///
/// Fails with [`Error::Overflow`] naming the first offending entry (in
/// column-major order) whose rounded value is not finite.
pub fn round_matrix(a: &DenseMatrix, f: FloatFormat) -> Result<DenseMatrix> {
    let mut out = a.clone();
    for j in 0..a.cols() {
        let col = out.col_mut(j);
        for (i, v) in col.iter_mut().enumerate() {
            let r = round_scalar(*v, f);
            if !r.is_finite() {
                return Err(Error::Overflow {
                    row: i,
                    col: j,
                    value: *v,
                });
            }
            *v = r;
        }
    }
    Ok(out)
}

/// The rounding-error growth factor `k*u / (1 - u)`.
///
/// Bounds the relative error of a length-`k` chain of operations with unit
/// roundoff `u`. Fails with a domain error when `u` is outside `(0, 1)` or
/// when `k*u >= 1`, where the bound is vacuous.
pub fn gamma(k: usize, u: f64) -> Result<f64> {
    if !(u > 0.0 && u < 1.0) {
        return Err(Error::domain(format!(
            "unit roundoff {u:e} is outside (0, 1)"
        )));
    }
    let ku = k as f64 * u;
    if ku >= 1.0 {
        return Err(Error::domain(format!(
            "k*u = {ku:e} >= 1: error bound does not hold for chains this long"
        )));
    }
    Ok(ku / (1.0 - u))
}

/// Name of a built-in precision context.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ContextName {
    Double,
    Single,
    SimulatedHalf,
}

/// A storage format paired with an accumulation format.
///
/// Arithmetic performed through the context rounds each intermediate result
/// to the accumulation format; [`PrecisionContext::store`] rounds a value to
/// the storage format as it is written back to a matrix or vector. The
/// accumulation format is never coarser than the storage format.
///
/// Operands are expected to be representable in the accumulation format
/// (which holds for anything read from stored data or produced by a prior
/// context operation); the accumulation format is then wide enough short of
/// `f64` that computing in `f64` and rounding once is the correctly rounded
/// operation.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct PrecisionContext {
    name: ContextName,
    storage: FloatFormat,
    accumulation: FloatFormat,
}

impl PrecisionContext {
    /// Native `f64` all the way through; every operation is the identity
    /// `f64` operation.
    pub const DOUBLE: PrecisionContext = PrecisionContext {
        name: ContextName::Double,
        storage: FloatFormat::BINARY64,
        accumulation: FloatFormat::BINARY64,
    };

    /// binary32 storage and binary32 accumulation.
    pub const SINGLE: PrecisionContext = PrecisionContext {
        name: ContextName::Single,
        storage: FloatFormat::BINARY32,
        accumulation: FloatFormat::BINARY32,
    };

    /// binary16 storage with binary32 accumulation: arithmetic runs in
    /// binary32 and only write-backs collapse to binary16.
    pub const SIMULATED_HALF: PrecisionContext = PrecisionContext {
        name: ContextName::SimulatedHalf,
        storage: FloatFormat::BINARY16,
        accumulation: FloatFormat::BINARY32,
    };

    pub fn from_name(name: ContextName) -> PrecisionContext {
        match name {
            ContextName::Double => PrecisionContext::DOUBLE,
            ContextName::Single => PrecisionContext::SINGLE,
            ContextName::SimulatedHalf => PrecisionContext::SIMULATED_HALF,
        }
    }

    pub fn name(&self) -> ContextName {
        self.name
    }

    pub fn storage(&self) -> FloatFormat {
        self.storage
    }

    pub fn accumulation(&self) -> FloatFormat {
        self.accumulation
    }

    /// True for the context whose operations are native `f64`.
    pub fn is_native_double(&self) -> bool {
        self.name == ContextName::Double
    }

    #[inline]
    pub fn add(&self, x: f64, y: f64) -> f64 {
        round_scalar(x + y, self.accumulation)
    }

    #[inline]
    pub fn sub(&self, x: f64, y: f64) -> f64 {
        round_scalar(x - y, self.accumulation)
    }

    #[inline]
    pub fn mul(&self, x: f64, y: f64) -> f64 {
        round_scalar(x * y, self.accumulation)
    }

    #[inline]
    pub fn div(&self, x: f64, y: f64) -> f64 {
        round_scalar(x / y, self.accumulation)
    }

    #[inline]
    pub fn sqrt(&self, x: f64) -> f64 {
        round_scalar(x.sqrt(), self.accumulation)
    }

    /// Rounds a value to the storage format, as happens on write-back.
    #[inline]
    pub fn store(&self, x: f64) -> f64 {
        round_scalar(x, self.storage)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const F16: FloatFormat = FloatFormat::BINARY16;
    const F32: FloatFormat = FloatFormat::BINARY32;
    const F64: FloatFormat = FloatFormat::BINARY64;

    #[test]
    fn format_parameters() {
        assert_eq!(F16.exponent_bits(), 5);
        assert_eq!(F16.mantissa_bits(), 10);
        assert_eq!((F16.e_min(), F16.e_max()), (-14, 15));
        assert_eq!((F32.e_min(), F32.e_max()), (-126, 127));
        assert_eq!((F64.e_min(), F64.e_max()), (-1022, 1023));
        assert_eq!(F16.base(), 2);
    }

    #[test]
    fn unit_roundoffs_are_exact_powers_of_two() {
        assert_eq!(F16.unit_roundoff(), 2f64.powi(-11));
        assert_eq!(F32.unit_roundoff(), 2f64.powi(-24));
        assert_eq!(F64.unit_roundoff(), 2f64.powi(-53));
    }

    #[test]
    fn format_extremes() {
        assert_eq!(F16.max_finite(), 65504.0);
        assert_eq!(F16.min_positive_normal(), 2f64.powi(-14));
        assert_eq!(F16.min_positive_subnormal(), 2f64.powi(-24));
        assert_eq!(F32.max_finite(), f32::MAX as f64);
        assert_eq!(F32.min_positive_subnormal(), 2f64.powi(-149));
        assert_eq!(F64.max_finite(), f64::MAX);
    }

    #[test]
    fn half_rounding_known_values() {
        // 0.1 falls between binary16 neighbours; the round bit is 0.
        assert_eq!(round_scalar(0.1, F16), 0.0999755859375);
        assert_eq!(round_scalar(-0.1, F16), -0.0999755859375);
        assert_eq!(round_scalar(1.0, F16), 1.0);
        assert_eq!(round_scalar(65504.0, F16), 65504.0);
        assert_eq!(round_scalar(70000.0, F16), f64::INFINITY);
        assert_eq!(round_scalar(-70000.0, F16), f64::NEG_INFINITY);
    }

    #[test]
    fn half_overflow_threshold() {
        // Largest magnitude that still rounds down to 65504 is just under
        // 65520; exactly 65520 ties and rounds away to infinity.
        assert_eq!(round_scalar(65519.999, F16), 65504.0);
        assert_eq!(round_scalar(65520.0, F16), f64::INFINITY);
        assert_eq!(round_scalar(-65520.0, F16), f64::NEG_INFINITY);
    }

    #[test]
    fn half_subnormal_boundaries() {
        let sub = 2f64.powi(-24);
        assert_eq!(round_scalar(sub, F16), sub);
        // Exactly half the smallest subnormal ties to the even value 0.
        assert_eq!(round_scalar(sub / 2.0, F16), 0.0);
        assert!(round_scalar(-sub / 2.0, F16).is_sign_negative());
        assert_eq!(round_scalar(sub / 2.0 * (1.0 + 1e-9), F16), sub);
        // 1.5 subnormals ties between 1 and 2 quanta; even wins.
        assert_eq!(round_scalar(1.5 * sub, F16), 2.0 * sub);
        assert_eq!(round_scalar(2.5 * sub, F16), 2.0 * sub);
        // Largest subnormal and smallest normal are both representable.
        let max_sub = 1023.0 * 2f64.powi(-10) * 2f64.powi(-14);
        assert_eq!(round_scalar(max_sub, F16), max_sub);
        assert_eq!(round_scalar(2f64.powi(-14), F16), 2f64.powi(-14));
    }

    #[test]
    fn ties_to_even_in_normal_range() {
        // 2049 sits exactly between 2048 and 2050 in binary16.
        assert_eq!(round_scalar(2049.0, F16), 2048.0);
        assert_eq!(round_scalar(2051.0, F16), 2052.0);
        // 1 + 2^-11 ties between 1 and 1 + 2^-10.
        assert_eq!(round_scalar(1.0 + 2f64.powi(-11), F16), 1.0);
        assert_eq!(
            round_scalar(1.0 + 3.0 * 2f64.powi(-12), F16),
            1.0 + 2f64.powi(-10)
        );
    }

    #[test]
    fn double_is_identity_bit_for_bit() {
        let samples = [
            0.0,
            -0.0,
            1.0,
            -1.5,
            f64::MIN_POSITIVE,
            f64::MIN_POSITIVE / 8.0,
            f64::MAX,
            f64::INFINITY,
            f64::NEG_INFINITY,
            f64::NAN,
            123.456e-300,
        ];
        for &x in &samples {
            assert_eq!(round_scalar(x, F64).to_bits(), x.to_bits());
        }
    }

    #[test]
    fn special_values_pass_through() {
        for f in [F16, F32] {
            assert!(round_scalar(f64::NAN, f).is_nan());
            assert_eq!(round_scalar(f64::INFINITY, f), f64::INFINITY);
            assert_eq!(round_scalar(f64::NEG_INFINITY, f), f64::NEG_INFINITY);
            assert_eq!(round_scalar(0.0, f).to_bits(), 0.0f64.to_bits());
            assert_eq!(round_scalar(-0.0, f).to_bits(), (-0.0f64).to_bits());
        }
    }

    #[test]
    fn generic_path_matches_hardware_single() {
        // Drive the integer path with a format equal to binary32 and compare
        // against the hardware cast over a magnitude ladder.
        let mut x = 2f64.powi(-160);
        while x < 1e40 {
            for &m in &[1.0, 1.000000059604645, 1.25, 1.9999999, -1.0, -1.37] {
                let v = x * m;
                let want = (v as f32) as f64;
                let got = round_generic(v, F32);
                assert_eq!(got.to_bits(), want.to_bits(), "v = {v:e}");
            }
            x *= 1.7;
        }
    }

    #[test]
    fn rounding_is_idempotent_for_half() {
        let mut x = 2f64.powi(-26);
        while x < 1e6 {
            let r = round_scalar(x, F16);
            if r.is_finite() {
                assert_eq!(round_scalar(r, F16), r);
            }
            x *= 1.31;
        }
    }

    #[test]
    fn round_matrix_reports_first_overflow() {
        let mut a = DenseMatrix::zeros(2, 2);
        a.set(0, 0, 3.5);
        a.set(1, 1, 1e6);
        let err = round_matrix(&a, F16).unwrap_err();
        match err {
            Error::Overflow { row, col, value } => {
                assert_eq!((row, col), (1, 1));
                assert_eq!(value, 1e6);
            }
            other => panic!("unexpected error {other:?}"),
        }
        let ok = round_matrix(&a, F32).unwrap();
        assert_eq!(ok.get(1, 1), 1e6);
    }

    #[test]
    fn gamma_small_and_domain() {
        let g = gamma(2, 6.0e-8).unwrap();
        // ku = 1.2e-7, so g = ku / (1 - u) = ku * (1 + u + u^2 + ...).
        assert!((g - 1.2000000720e-7).abs() <= 1e-9 * g);
        let u = F16.unit_roundoff();
        assert!(gamma(2047, u).is_ok());
        assert!(gamma(2048, u).is_err());
        assert!(gamma(10, 0.0).is_err());
        assert!(gamma(10, 1.0).is_err());
    }

    #[test]
    fn context_presets() {
        let d = PrecisionContext::DOUBLE;
        let s = PrecisionContext::SINGLE;
        let h = PrecisionContext::SIMULATED_HALF;
        assert!(d.is_native_double());
        assert_eq!(d.storage(), F64);
        assert_eq!(s.storage(), F32);
        assert_eq!(s.accumulation(), F32);
        assert_eq!(h.storage(), F16);
        assert_eq!(h.accumulation(), F32);
        for ctx in [d, s, h] {
            assert!(ctx.accumulation().unit_roundoff() <= ctx.storage().unit_roundoff());
            assert_eq!(PrecisionContext::from_name(ctx.name()), ctx);
        }
    }

    #[test]
    fn single_accumulation_rounds_each_operation() {
        let s = PrecisionContext::SINGLE;
        // 2^-24 is half an ulp of 1 in binary32: the tie rounds back to 1.
        assert_eq!(s.add(1.0, 2f64.powi(-24)), 1.0);
        assert_eq!(s.add(1.0, 2f64.powi(-23)), 1.0 + 2f64.powi(-23));
        let x = 1.1f32 as f64;
        let y = 2.3f32 as f64;
        assert_eq!(s.mul(x, y), ((x * y) as f32) as f64);
        assert_eq!(s.sqrt(2.0), (std::f64::consts::SQRT_2 as f32) as f64);
    }

    #[test]
    fn half_context_stores_to_binary16() {
        let h = PrecisionContext::SIMULATED_HALF;
        assert_eq!(h.store(0.1), 0.0999755859375);
        assert_eq!(h.store(2f64.powi(-25)), 0.0);
        // Arithmetic itself stays in binary32.
        assert_eq!(h.mul(0.5, 2f64.powi(-25)), 2f64.powi(-26));
        let d = PrecisionContext::DOUBLE;
        let x = 0.1 + 0.2;
        assert_eq!(d.store(x).to_bits(), x.to_bits());
    }
}
