use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};

use super::value::split_rational;
use super::{FormatError, FpFormat, RationalValue, Rounding};

/// The 2-bit exception field.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ExcClass {
    Zero = 0b00,
    Normal = 0b01,
    Infinity = 0b10,
    Nan = 0b11,
}

impl ExcClass {
    pub fn from_bits(bits: u64) -> Self {
        match bits & 0b11 {
            0b00 => ExcClass::Zero,
            0b01 => ExcClass::Normal,
            0b10 => ExcClass::Infinity,
            _ => ExcClass::Nan,
        }
    }
}

/// One encoded value: `exc(2) | sign(1) | exponent(wE) | fraction(wF)`,
/// most significant field first.
#[derive(Clone, Copy, PartialEq, Eq, Hash)]
pub struct EncodedScalar {
    format: FpFormat,
    bits: u64,
}

impl EncodedScalar {
    /// Any bit pattern of the right width is accepted, canonical or not.
    pub fn from_bits(format: FpFormat, bits: u64) -> Result<Self, FormatError> {
        let width = format.width();
        if width < 64 && bits >> width != 0 {
            return Err(FormatError::BitsOutOfRange { bits, width });
        }
        Ok(EncodedScalar { format, bits })
    }

    fn pack(format: FpFormat, exc: ExcClass, negative: bool, exp: u64, frac: u64) -> Self {
        let wf = format.frac_bits();
        let we = format.exp_bits();
        let bits = ((exc as u64) << (wf + we + 1)) | ((negative as u64) << (wf + we)) | (exp << wf) | frac;
        EncodedScalar { format, bits }
    }

    pub fn zero(format: FpFormat, negative: bool) -> Self {
        Self::pack(format, ExcClass::Zero, negative, 0, 0)
    }

    pub fn infinity(format: FpFormat, negative: bool) -> Self {
        Self::pack(format, ExcClass::Infinity, negative, 0, 0)
    }

    /// The single canonical nan: exception 11 with every other field zero.
    pub fn nan(format: FpFormat) -> Self {
        Self::pack(format, ExcClass::Nan, false, 0, 0)
    }

    pub fn normal(format: FpFormat, negative: bool, exp: u64, frac: u64) -> Result<Self, FormatError> {
        if exp > format.max_biased_exp() || frac >> format.frac_bits() != 0 {
            return Err(FormatError::FieldOutOfRange);
        }
        Ok(Self::pack(format, ExcClass::Normal, negative, exp, frac))
    }

    pub fn format(&self) -> FpFormat {
        self.format
    }

    pub fn bits(&self) -> u64 {
        self.bits
    }

    pub fn class(&self) -> ExcClass {
        ExcClass::from_bits(self.bits >> (self.format.width() - 2))
    }

    pub fn sign(&self) -> bool {
        (self.bits >> (self.format.width() - 3)) & 1 == 1
    }

    pub fn exp_field(&self) -> u64 {
        (self.bits >> self.format.frac_bits()) & self.format.max_biased_exp()
    }

    pub fn frac_field(&self) -> u64 {
        self.bits & ((1u64 << self.format.frac_bits()) - 1)
    }

    /// Canonical: normals have a biased exponent of at least 1 (the minimum
    /// normal is `2^(1-bias)`); zero and infinity carry only a sign; nan
    /// carries nothing.
    pub fn is_canonical(&self) -> bool {
        match self.class() {
            ExcClass::Normal => self.exp_field() >= 1,
            ExcClass::Zero | ExcClass::Infinity => self.exp_field() == 0 && self.frac_field() == 0,
            ExcClass::Nan => self.bits == Self::nan(self.format).bits,
        }
    }

    /// Reinterprets the bits under a format of the same layout (e.g. to change
    /// the rounding mode attached to a value).
    pub fn with_format(self, format: FpFormat) -> Result<Self, FormatError> {
        if !format.same_layout(&self.format) {
            return Err(FormatError::Mismatch(self.format, format));
        }
        Ok(EncodedScalar { format, bits: self.bits })
    }

    pub(crate) fn unpack(&self) -> Unpacked {
        match self.class() {
            ExcClass::Zero => Unpacked::Zero(self.sign()),
            ExcClass::Infinity => Unpacked::Inf(self.sign()),
            ExcClass::Nan => Unpacked::Nan,
            ExcClass::Normal => {
                let wf = self.format.frac_bits();
                Unpacked::Normal {
                    negative: self.sign(),
                    sig: (1u64 << wf) | self.frac_field(),
                    lsb_exp: self.exp_field() as i64 - self.format.bias() - wf as i64,
                }
            }
        }
    }

    /// Exact value.
    pub fn decode(&self) -> RationalValue {
        match self.unpack() {
            Unpacked::Zero(negative) => RationalValue::Zero { negative },
            Unpacked::Inf(negative) => RationalValue::Infinity { negative },
            Unpacked::Nan => RationalValue::Nan,
            Unpacked::Normal { negative, sig, lsb_exp } => {
                RationalValue::from_dyadic(negative, sig as u128, lsb_exp)
            }
        }
    }
}

impl fmt::Debug for EncodedScalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}[exc={:02b} s={} e={} f={:0w$b}]",
            self.format,
            self.class() as u8,
            self.sign() as u8,
            self.exp_field(),
            self.frac_field(),
            w = self.format.frac_bits() as usize
        )
    }
}

impl fmt::Display for EncodedScalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.decode())
    }
}

/// Decoded operand used by the reference arithmetic: a normal value is
/// `sig * 2^lsb_exp` with `sig` carrying the implicit leading one.
#[derive(Clone, Copy, Debug)]
pub(crate) enum Unpacked {
    Zero(bool),
    Normal { negative: bool, sig: u64, lsb_exp: i64 },
    Inf(bool),
    Nan,
}

/// Rounds `mag * 2^exp` into `format`. When `sticky` is set the true value lies
/// strictly between `mag * 2^exp` and `(mag + 1) * 2^exp`; the caller must then
/// supply at least `wF + 3` significant bits in `mag`.
pub(crate) fn round_dyadic(format: FpFormat, negative: bool, mag: u128, exp: i64, sticky: bool) -> EncodedScalar {
    if mag == 0 {
        debug_assert!(!sticky);
        return EncodedScalar::zero(format, negative);
    }
    let wf = format.frac_bits() as i64;
    let msb = 127 - mag.leading_zeros() as i64;
    debug_assert!(!sticky || msb >= wf + 2, "not enough precision for a sticky rounding");
    let mut unbiased = msb + exp;
    let shift = msb - wf;
    let (mut kept, guard, rest) = if shift > 0 {
        let kept = mag >> shift;
        let guard = (mag >> (shift - 1)) & 1 == 1;
        let below = mag & ((1u128 << (shift - 1)) - 1);
        (kept, guard, below != 0 || sticky)
    } else {
        (mag << (-shift), false, sticky)
    };
    let round_up = match format.rounding() {
        Rounding::Rne => guard && (rest || kept & 1 == 1),
        Rounding::Rtz => false,
    };
    if round_up {
        kept += 1;
        if kept >> (wf + 1) != 0 {
            kept >>= 1;
            unbiased += 1;
        }
    }
    let biased = unbiased + format.bias();
    if biased > format.max_biased_exp() as i64 {
        EncodedScalar::infinity(format, negative)
    } else if biased < 1 {
        EncodedScalar::zero(format, negative)
    } else {
        let frac = (kept as u64) & ((1u64 << wf) - 1);
        EncodedScalar::pack(format, ExcClass::Normal, negative, biased as u64, frac)
    }
}

/// Nearest representable value under `format.rounding()`. Magnitudes past the
/// largest normal become infinity; results that round below the smallest
/// normal flush to a zero of the same sign.
pub fn encode(value: &RationalValue, format: FpFormat) -> EncodedScalar {
    match value {
        RationalValue::Zero { negative } => EncodedScalar::zero(format, *negative),
        RationalValue::Infinity { negative } => EncodedScalar::infinity(format, *negative),
        RationalValue::Nan => EncodedScalar::nan(format),
        RationalValue::Finite(r) => encode_rational(r, format),
    }
}

fn encode_rational(r: &BigRational, format: FpFormat) -> EncodedScalar {
    if r.is_zero() {
        return EncodedScalar::zero(format, false);
    }
    let (negative, num, den) = split_rational(r);
    // floor(log2(num/den)) is bits(num) - bits(den) or one less.
    let mut e = num.bits() as i64 - den.bits() as i64;
    if scaled_cmp(&num, &den, e) == std::cmp::Ordering::Less {
        e -= 1;
    }
    // q = floor(|r| * 2^(wF+2-e)) has exactly wF+3 bits.
    let k = format.frac_bits() as i64 + 2 - e;
    let (n, d) = if k >= 0 {
        (num << k as usize, den)
    } else {
        (num, den << (-k) as usize)
    };
    let (q, rem) = n.div_rem(&d);
    let q = q.to_u128().expect("quotient fits the working precision");
    round_dyadic(format, negative, q, -k, !rem.is_zero())
}

/// Compares `num / den` against `2^e`.
fn scaled_cmp(num: &BigInt, den: &BigInt, e: i64) -> std::cmp::Ordering {
    if e >= 0 {
        num.cmp(&(den << e as usize))
    } else {
        (num << (-e) as usize).cmp(den)
    }
}

pub fn decode(x: &EncodedScalar) -> RationalValue {
    x.decode()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fmt::Precision;

    fn e5m2() -> FpFormat {
        FpFormat::simple(5, 2).unwrap()
    }

    #[test]
    fn encode_one() {
        let x = encode(&RationalValue::from_integer(1), e5m2());
        assert_eq!(x.class(), ExcClass::Normal);
        assert!(!x.sign());
        assert_eq!(x.exp_field(), 15);
        assert_eq!(x.frac_field(), 0);
    }

    #[test]
    fn encode_zero_is_all_zero() {
        for f in ["e5m2", "e4m3", "e8m23"] {
            let f: FpFormat = f.parse().unwrap();
            assert_eq!(encode(&RationalValue::zero(), f).bits(), 0);
        }
    }

    #[test]
    fn encode_truncates_small_tail() {
        // 2.1875 = 1.00011b * 2: guard bit is 0 at two fraction bits.
        let x = encode(&RationalValue::from_ratio(35, 16), e5m2());
        assert_eq!((x.class(), x.exp_field(), x.frac_field()), (ExcClass::Normal, 16, 0));
    }

    #[test]
    fn decode_examples() {
        let f = e5m2();
        let one = EncodedScalar::normal(f, false, 15, 0).unwrap();
        assert_eq!(one.decode(), RationalValue::from_integer(1));
        let ninf = EncodedScalar::infinity(f, true);
        assert_eq!(ninf.decode(), RationalValue::Infinity { negative: true });
        let x = EncodedScalar::normal(f, false, 16, 0b11).unwrap();
        assert_eq!(x.decode(), RationalValue::from_ratio(7, 2));
        assert_eq!(encode(&x.decode(), f), x);
    }

    #[test]
    fn non_canonical_fields_are_ignored_by_decode() {
        let f = e5m2();
        // exc=10 with junk exponent and fraction still decodes as infinity.
        let junk = EncodedScalar::from_bits(f, (0b10 << 8) | (1 << 7) | (7 << 2) | 3).unwrap();
        assert_eq!(junk.decode(), RationalValue::Infinity { negative: true });
        assert!(!junk.is_canonical());
    }

    #[test]
    fn overflow_and_underflow() {
        let f = e5m2();
        // max normal = 1.75 * 2^16
        let max = EncodedScalar::normal(f, false, 31, 3).unwrap();
        assert_eq!(max.decode(), RationalValue::from_integer(7 * (1 << 14)));
        assert_eq!(encode(&RationalValue::from_integer(1 << 17), f).class(), ExcClass::Infinity);
        // 1.875 * 2^16 rounds up past max under RNE, truncates to max under RTZ.
        let v = RationalValue::from_integer(15 * (1 << 13));
        assert_eq!(encode(&v, f).class(), ExcClass::Infinity);
        assert_eq!(encode(&v, f.with_rounding(Rounding::Rtz)).bits(), max.bits());
        // below 2^-14 flushes; just below but rounding up to it survives.
        let min = encode(&RationalValue::from_dyadic(false, 1, -14), f);
        assert_eq!((min.class(), min.exp_field()), (ExcClass::Normal, 1));
        let under = encode(&RationalValue::from_dyadic(true, 1, -15), f);
        assert_eq!(under, EncodedScalar::zero(f, true));
        let rounds_up = RationalValue::from_dyadic(false, 0b11111, -19);
        assert_eq!(encode(&rounds_up, f), min);
        assert_eq!(encode(&rounds_up, f.with_rounding(Rounding::Rtz)).class(), ExcClass::Zero);
    }

    #[test]
    fn ties_go_to_even() {
        let f = FpFormat::new(4, 2, Precision::Single, Rounding::Rne).unwrap();
        // 1.125 = 1.001b: tie between 1.00 and 1.01 -> 1.00 (even)
        assert_eq!(encode(&RationalValue::from_ratio(9, 8), f).frac_field(), 0);
        // 1.375 = 1.011b: tie between 1.01 and 1.10 -> 1.10
        assert_eq!(encode(&RationalValue::from_ratio(11, 8), f).frac_field(), 0b10);
    }
}
