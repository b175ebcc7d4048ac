//! Exact reference arithmetic. Every operation computes the exact result and
//! rounds it once; these functions are the oracle the generated circuits are
//! checked against.

use num_bigint::BigUint;
use num_traits::ToPrimitive;

use super::scalar::{round_dyadic, Unpacked};
use super::{EncodedScalar, FormatError, FpFormat};

fn check_operands(a: &EncodedScalar, b: &EncodedScalar) -> Result<(), FormatError> {
    if a.format().same_layout(&b.format()) {
        Ok(())
    } else {
        Err(FormatError::Mismatch(a.format(), b.format()))
    }
}

/// Multiplies two values of the same format into `out`, whose exponent width
/// matches and whose fraction is `wF + 1` (rounded per `out.rounding()`) or
/// `2wF + 1` (exact).
pub fn ref_mul(a: &EncodedScalar, b: &EncodedScalar, out: FpFormat) -> Result<EncodedScalar, FormatError> {
    check_operands(a, b)?;
    let fin = a.format();
    let wf = fin.frac_bits();
    if out.exp_bits() != fin.exp_bits() || (out.frac_bits() != wf + 1 && out.frac_bits() != 2 * wf + 1) {
        return Err(FormatError::ProductFormat { input: fin, output: out });
    }
    Ok(mul_unchecked(a, b, out))
}

/// `ref_mul` into the operand format's own product format.
pub fn ref_mul_auto(a: &EncodedScalar, b: &EncodedScalar) -> Result<EncodedScalar, FormatError> {
    ref_mul(a, b, a.format().product_format()?)
}

pub(crate) fn mul_unchecked(a: &EncodedScalar, b: &EncodedScalar, out: FpFormat) -> EncodedScalar {
    use Unpacked::*;
    match (a.unpack(), b.unpack()) {
        (Nan, _) | (_, Nan) => EncodedScalar::nan(out),
        (Inf(_), Zero(_)) | (Zero(_), Inf(_)) => EncodedScalar::nan(out),
        (Inf(sa), Inf(sb)) | (Inf(sa), Normal { negative: sb, .. }) | (Normal { negative: sa, .. }, Inf(sb)) => {
            EncodedScalar::infinity(out, sa ^ sb)
        }
        (Zero(sa), Zero(sb)) | (Zero(sa), Normal { negative: sb, .. }) | (Normal { negative: sa, .. }, Zero(sb)) => {
            EncodedScalar::zero(out, sa ^ sb)
        }
        (
            Normal { negative: sa, sig: ma, lsb_exp: ea },
            Normal { negative: sb, sig: mb, lsb_exp: eb },
        ) => round_dyadic(out, sa ^ sb, ma as u128 * mb as u128, ea + eb, false),
    }
}

/// Adds two values of the same format; the result uses `a`'s format.
pub fn ref_add(a: &EncodedScalar, b: &EncodedScalar) -> Result<EncodedScalar, FormatError> {
    check_operands(a, b)?;
    Ok(add_unchecked(a, b))
}

pub(crate) fn add_unchecked(a: &EncodedScalar, b: &EncodedScalar) -> EncodedScalar {
    use Unpacked::*;
    let out = a.format();
    match (a.unpack(), b.unpack()) {
        (Nan, _) | (_, Nan) => EncodedScalar::nan(out),
        (Inf(sa), Inf(sb)) if sa != sb => EncodedScalar::nan(out),
        (Inf(s), _) | (_, Inf(s)) => EncodedScalar::infinity(out, s),
        (Zero(sa), Zero(sb)) => EncodedScalar::zero(out, sa && sb),
        (Zero(_), Normal { negative, sig, lsb_exp }) | (Normal { negative, sig, lsb_exp }, Zero(_)) => {
            round_dyadic(out, negative, sig as u128, lsb_exp, false)
        }
        (
            Normal { negative: sa, sig: ma, lsb_exp: ea },
            Normal { negative: sb, sig: mb, lsb_exp: eb },
        ) => exact_sum(out, (sa, ma, ea), (sb, mb, eb)),
    }
}

/// Largest alignment shift handled in 128-bit arithmetic.
const NARROW_SHIFT: i64 = 64;

fn exact_sum(out: FpFormat, x: (bool, u64, i64), y: (bool, u64, i64)) -> EncodedScalar {
    let (hi, lo) = if x.2 >= y.2 { (x, y) } else { (y, x) };
    let shift = hi.2 - lo.2;
    if shift <= NARROW_SHIFT {
        let h = (hi.1 as u128) << shift;
        let l = lo.1 as u128;
        let (negative, mag) = if hi.0 == lo.0 {
            (hi.0, h + l)
        } else if h >= l {
            (hi.0, h - l)
        } else {
            (lo.0, l - h)
        };
        if mag == 0 {
            return EncodedScalar::zero(out, false);
        }
        return round_dyadic(out, negative, mag, lo.2, false);
    }
    // Wide alignment: the exact sum is formed in big integers, then reduced to
    // a 100-bit window plus a sticky flag for the rounding step.
    let h = BigUint::from(hi.1) << shift as usize;
    let l = BigUint::from(lo.1);
    let (negative, mag) = if hi.0 == lo.0 { (hi.0, h + l) } else { (hi.0, h - l) };
    let bits = mag.bits() as i64;
    let drop = (bits - 100).max(0);
    let window = (&mag >> drop as usize).to_u128().expect("100-bit window");
    let sticky = drop > 0 && mag.trailing_zeros().unwrap_or(0) < drop as u64;
    round_dyadic(out, negative, window, lo.2 + drop, sticky)
}

/// ReLU: negative values and zeros become `+0`, nan stays nan, positive values
/// pass through (re-encoded canonically).
pub fn ref_relu(a: &EncodedScalar) -> EncodedScalar {
    let f = a.format();
    match a.unpack() {
        Unpacked::Nan => EncodedScalar::nan(f),
        Unpacked::Zero(_) | Unpacked::Inf(true) | Unpacked::Normal { negative: true, .. } => {
            EncodedScalar::zero(f, false)
        }
        Unpacked::Inf(false) => EncodedScalar::infinity(f, false),
        Unpacked::Normal { negative: false, sig, lsb_exp } => round_dyadic(f, false, sig as u128, lsb_exp, false),
    }
}

/// Re-rounds a value into another format under `to.rounding()`.
pub fn convert(x: &EncodedScalar, to: FpFormat) -> EncodedScalar {
    match x.unpack() {
        Unpacked::Nan => EncodedScalar::nan(to),
        Unpacked::Zero(s) => EncodedScalar::zero(to, s),
        Unpacked::Inf(s) => EncodedScalar::infinity(to, s),
        Unpacked::Normal { negative, sig, lsb_exp } => {
            round_dyadic(to, negative, sig as u128, lsb_exp, false)
        }
    }
}

/// Exact binary32 value rounded into `fmt` (IEEE subnormals included).
pub fn from_binary32(x: f32, fmt: FpFormat) -> EncodedScalar {
    if x.is_nan() {
        return EncodedScalar::nan(fmt);
    }
    if x.is_infinite() {
        return EncodedScalar::infinity(fmt, x < 0.0);
    }
    let bits = x.to_bits();
    let negative = bits >> 31 == 1;
    let exp_field = ((bits >> 23) & 0xff) as i64;
    let frac = (bits & 0x7f_ffff) as u128;
    if exp_field == 0 && frac == 0 {
        return EncodedScalar::zero(fmt, negative);
    }
    let (mag, exp) = if exp_field == 0 {
        (frac, -149)
    } else {
        (frac | (1 << 23), exp_field - 150)
    };
    round_dyadic(fmt, negative, mag, exp, false)
}

/// Nearest-even binary32; exact whenever wE <= 8 and wF <= 23.
pub fn to_binary32(x: &EncodedScalar) -> f32 {
    match x.unpack() {
        Unpacked::Nan => f32::NAN,
        Unpacked::Zero(s) => {
            if s {
                -0.0
            } else {
                0.0
            }
        }
        Unpacked::Inf(s) => {
            if s {
                f32::NEG_INFINITY
            } else {
                f32::INFINITY
            }
        }
        Unpacked::Normal { negative, sig, lsb_exp } => {
            // Formats are limited to wF <= 52 and wE <= 10, so the value is
            // exact in binary64 and the cast below is the only rounding.
            let v = (sig as f64) * 2f64.powi(lsb_exp as i32);
            let v = if negative { -v } else { v };
            v as f32
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fmt::{encode, ExcClass, Precision, RationalValue, Rounding};

    fn f(s: &str) -> FpFormat {
        s.parse().unwrap()
    }

    fn val(fmt: FpFormat, s: &str) -> EncodedScalar {
        encode(&s.parse::<RationalValue>().unwrap(), fmt)
    }

    #[test]
    fn mul_identity_and_exceptions() {
        let e5m2 = f("e5m2");
        let out = e5m2.product_format().unwrap();
        let one = val(e5m2, "1");
        assert_eq!(ref_mul(&one, &one, out).unwrap(), val(out, "1"));
        let inf = val(e5m2, "inf");
        let zero = val(e5m2, "0");
        assert_eq!(ref_mul(&inf, &zero, out).unwrap().class(), ExcClass::Nan);
        let ninf = ref_mul(&inf, &val(e5m2, "-2"), out).unwrap();
        assert_eq!(ninf, EncodedScalar::infinity(out, true));
        let nz = ref_mul(&val(e5m2, "-0"), &val(e5m2, "3"), out).unwrap();
        assert_eq!(nz, EncodedScalar::zero(out, true));
    }

    #[test]
    fn single_product_rounds_to_nearest() {
        // 1.75 * 1.25 = 2.1875 = 1.00011b * 2: at three fraction bits the
        // guard and sticky bits are both set, so RNE rounds up to 2.25.
        let e5m2 = f("e5m2");
        let out = e5m2.product_format().unwrap();
        let p = ref_mul(&val(e5m2, "1.75"), &val(e5m2, "1.25"), out).unwrap();
        assert_eq!(p.decode(), RationalValue::from_ratio(9, 4));
        let rtz = out.with_rounding(Rounding::Rtz);
        let p = ref_mul(&val(e5m2, "1.75"), &val(e5m2, "1.25"), rtz).unwrap();
        assert_eq!(p.decode(), RationalValue::from_integer(2));
        // 1.75 * 1.75 = 3.0625 = 1.10001b * 2 -> guard 0 -> 3.0
        let p = ref_mul(&val(e5m2, "1.75"), &val(e5m2, "1.75"), out).unwrap();
        assert_eq!(p.decode(), RationalValue::from_integer(3));
    }

    #[test]
    fn extended_product_is_exact() {
        let e5m2x = f("e5m2x");
        let out = e5m2x.product_format().unwrap();
        assert_eq!(out.frac_bits(), 5);
        let p = ref_mul(&val(e5m2x, "1.75"), &val(e5m2x, "1.25"), out).unwrap();
        assert_eq!(p.decode(), RationalValue::from_ratio(35, 16));
    }

    #[test]
    fn mul_rejects_bad_formats() {
        let a = val(f("e5m2"), "1");
        let b = val(f("e4m2"), "1");
        assert!(matches!(ref_mul(&a, &b, f("e5m3")), Err(FormatError::Mismatch(..))));
        assert!(matches!(ref_mul(&a, &a, f("e5m4")), Err(FormatError::ProductFormat { .. })));
        assert!(ref_add(&a, &b).is_err());
    }

    #[test]
    fn add_examples() {
        let fmt = FpFormat::new(5, 3, Precision::Single, Rounding::Rtz).unwrap();
        let s = ref_add(&val(fmt, "1"), &val(fmt, "1.0625")).unwrap();
        // 1.0625 is not representable at wF=3: it truncates to 1.0 first.
        assert_eq!(val(fmt, "1.0625").decode(), RationalValue::from_integer(1));
        assert_eq!(s.decode(), RationalValue::from_integer(2));
        let inf = val(fmt, "inf");
        let ninf = val(fmt, "-inf");
        assert_eq!(ref_add(&inf, &ninf).unwrap(), EncodedScalar::nan(fmt));
        let x = val(fmt, "1.5");
        let nx = val(fmt, "-1.5");
        assert_eq!(ref_add(&x, &nx).unwrap(), EncodedScalar::zero(fmt, false));
        let nz = val(fmt, "-0");
        assert_eq!(ref_add(&nz, &nz).unwrap(), EncodedScalar::zero(fmt, true));
        assert_eq!(ref_add(&nz, &val(fmt, "0")).unwrap(), EncodedScalar::zero(fmt, false));
    }

    #[test]
    fn add_rne_rounds_sum() {
        // e5m3 RNE: 1 + 0.0625 = 1.0001b -> tie at 3 bits -> 1.000
        let fmt = f("e5m3");
        let a = val(fmt, "1");
        let tiny = val(fmt, "0.0625");
        assert_eq!(ref_add(&a, &tiny).unwrap().decode(), RationalValue::from_integer(1));
        // 1.125 + 0.0625 = 1.0011b -> tie -> 1.010b = 1.25
        let b = val(fmt, "1.125");
        assert_eq!(ref_add(&b, &tiny).unwrap().decode(), RationalValue::from_ratio(5, 4));
    }

    #[test]
    fn add_handles_wide_alignment() {
        let fmt = f("e10m4");
        let big = val(fmt, "1");
        let small = EncodedScalar::normal(fmt, false, 1, 1).unwrap();
        assert_eq!(ref_add(&big, &small).unwrap(), big);
        let nsmall = EncodedScalar::normal(fmt, true, 1, 1).unwrap();
        // 1 - tiny rounds back to 1 under RNE and to 0.96875 under RTZ.
        assert_eq!(ref_add(&big, &nsmall).unwrap(), big);
        let rtz = fmt.with_rounding(Rounding::Rtz);
        let r = ref_add(&big.with_format(rtz).unwrap(), &nsmall.with_format(rtz).unwrap()).unwrap();
        assert_eq!(r.decode(), RationalValue::from_ratio(31, 32));
    }

    #[test]
    fn relu_cases() {
        let fmt = f("e5m2");
        assert_eq!(ref_relu(&val(fmt, "-3.5")), EncodedScalar::zero(fmt, false));
        assert_eq!(ref_relu(&val(fmt, "2")), val(fmt, "2"));
        assert_eq!(ref_relu(&val(fmt, "-inf")), EncodedScalar::zero(fmt, false));
        assert_eq!(ref_relu(&val(fmt, "-0")), EncodedScalar::zero(fmt, false));
        assert_eq!(ref_relu(&val(fmt, "nan")), EncodedScalar::nan(fmt));
        assert_eq!(ref_relu(&val(fmt, "inf")), val(fmt, "inf"));
    }

    #[test]
    fn binary32_round_trip() {
        let e5m2 = f("e5m2");
        let x = from_binary32(1.0, e5m2);
        assert_eq!(x, val(e5m2, "1"));
        assert_eq!(to_binary32(&x), 1.0);
        let e5m10 = f("e5m10");
        assert_eq!(from_binary32(65504.0 * 2.0, e5m10).class(), ExcClass::Normal);
        // max normal of e5m10 is (2 - 2^-10) * 2^16
        let max = EncodedScalar::normal(e5m10, false, 31, 1023).unwrap();
        assert_eq!(to_binary32(&max), (2.0 - 2f32.powi(-10)) * 65536.0);
        assert_eq!(from_binary32(131072.0, e5m10).class(), ExcClass::Infinity);
        assert!(to_binary32(&EncodedScalar::nan(e5m2)).is_nan());
        assert_eq!(from_binary32(f32::NAN, e5m2), EncodedScalar::nan(e5m2));
        let sub = f32::from_bits(1);
        assert_eq!(from_binary32(sub, e5m2), EncodedScalar::zero(e5m2, false));
    }
}
