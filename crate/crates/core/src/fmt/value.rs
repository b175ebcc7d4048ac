use std::fmt;
use std::str::FromStr;

use num_bigint::{BigInt, Sign};
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use super::FormatError;

/// An exact value: a nonzero rational, a signed zero, a signed infinity or nan.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum RationalValue {
    Zero { negative: bool },
    /// Always nonzero; zero is represented by [`RationalValue::Zero`].
    Finite(BigRational),
    Infinity { negative: bool },
    Nan,
}

impl RationalValue {
    pub fn zero() -> Self {
        RationalValue::Zero { negative: false }
    }

    pub fn from_rational(r: BigRational) -> Self {
        if r.is_zero() {
            RationalValue::zero()
        } else {
            RationalValue::Finite(r)
        }
    }

    pub fn from_ratio(num: i64, den: i64) -> Self {
        Self::from_rational(BigRational::new(num.into(), den.into()))
    }

    pub fn from_integer(v: i64) -> Self {
        Self::from_rational(BigRational::from_integer(v.into()))
    }

    /// `mantissa * 2^exp`, exactly.
    pub fn from_dyadic(negative: bool, mantissa: u128, exp: i64) -> Self {
        if mantissa == 0 {
            return RationalValue::Zero { negative };
        }
        let mut num = BigInt::from(mantissa);
        let mut den = BigInt::one();
        if exp >= 0 {
            num <<= exp as usize;
        } else {
            den <<= (-exp) as usize;
        }
        if negative {
            num = -num;
        }
        RationalValue::Finite(BigRational::new(num, den))
    }

    /// Exact value of an `f64` (subnormals included).
    pub fn from_f64(x: f64) -> Self {
        if x.is_nan() {
            return RationalValue::Nan;
        }
        if x.is_infinite() {
            return RationalValue::Infinity { negative: x < 0.0 };
        }
        if x == 0.0 {
            return RationalValue::Zero { negative: x.is_sign_negative() };
        }
        let bits = x.to_bits();
        let negative = bits >> 63 == 1;
        let exp_field = ((bits >> 52) & 0x7ff) as i64;
        let frac = bits & ((1u64 << 52) - 1);
        let (mantissa, exp) = if exp_field == 0 {
            (frac, -1074)
        } else {
            (frac | (1u64 << 52), exp_field - 1075)
        };
        Self::from_dyadic(negative, mantissa as u128, exp)
    }

    pub fn is_nan(&self) -> bool {
        matches!(self, RationalValue::Nan)
    }

    pub fn is_negative(&self) -> bool {
        match self {
            RationalValue::Zero { negative } | RationalValue::Infinity { negative } => *negative,
            RationalValue::Finite(r) => r.is_negative(),
            RationalValue::Nan => false,
        }
    }

    /// Nonzero finite rational, if any.
    pub fn as_rational(&self) -> Option<&BigRational> {
        match self {
            RationalValue::Finite(r) => Some(r),
            _ => None,
        }
    }

    /// Finite values (zero included) as a rational.
    pub fn to_rational(&self) -> Option<BigRational> {
        match self {
            RationalValue::Zero { .. } => Some(BigRational::zero()),
            RationalValue::Finite(r) => Some(r.clone()),
            _ => None,
        }
    }

    pub fn neg(&self) -> Self {
        match self {
            RationalValue::Zero { negative } => RationalValue::Zero { negative: !negative },
            RationalValue::Finite(r) => RationalValue::Finite(-r),
            RationalValue::Infinity { negative } => RationalValue::Infinity { negative: !negative },
            RationalValue::Nan => RationalValue::Nan,
        }
    }

    /// Approximate value, for display and diagnostics only.
    pub fn to_f64_lossy(&self) -> f64 {
        match self {
            RationalValue::Zero { negative } => {
                if *negative {
                    -0.0
                } else {
                    0.0
                }
            }
            RationalValue::Infinity { negative } => {
                if *negative {
                    f64::NEG_INFINITY
                } else {
                    f64::INFINITY
                }
            }
            RationalValue::Nan => f64::NAN,
            RationalValue::Finite(r) => {
                use num_traits::ToPrimitive;
                r.to_f64().unwrap_or(f64::NAN)
            }
        }
    }
}

impl fmt::Display for RationalValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RationalValue::Zero { negative: true } => f.write_str("-0"),
            RationalValue::Zero { negative: false } => f.write_str("0"),
            RationalValue::Infinity { negative: true } => f.write_str("-inf"),
            RationalValue::Infinity { negative: false } => f.write_str("inf"),
            RationalValue::Nan => f.write_str("nan"),
            RationalValue::Finite(r) => {
                if r.denom().is_one() {
                    write!(f, "{}", r.numer())
                } else {
                    write!(f, "{}/{}", r.numer(), r.denom())
                }
            }
        }
    }
}

impl FromStr for RationalValue {
    type Err = FormatError;

    /// Accepts `inf`, `-inf`, `nan`, integers, decimals with an optional
    /// `e` exponent (`1.75`, `-2.5e-3`) and fractions (`7/4`).
    fn from_str(text: &str) -> Result<Self, Self::Err> {
        let s = text.trim();
        let bad = || FormatError::Syntax(format!("cannot parse value `{text}`"));
        let (negative, body) = match s.as_bytes().first() {
            Some(b'-') => (true, &s[1..]),
            Some(b'+') => (false, &s[1..]),
            _ => (false, s),
        };
        let lower = body.to_ascii_lowercase();
        match lower.as_str() {
            "inf" | "infinity" => return Ok(RationalValue::Infinity { negative }),
            "nan" => return Ok(RationalValue::Nan),
            "" => return Err(bad()),
            _ => {}
        }
        let magnitude = if let Some((n, d)) = lower.split_once('/') {
            let n = parse_decimal(n).ok_or_else(bad)?;
            let d = parse_decimal(d).ok_or_else(bad)?;
            if d.is_zero() {
                return Err(FormatError::Syntax(format!("zero denominator in `{text}`")));
            }
            n / d
        } else {
            parse_decimal(&lower).ok_or_else(bad)?
        };
        if magnitude.is_zero() {
            return Ok(RationalValue::Zero { negative });
        }
        Ok(RationalValue::Finite(if negative { -magnitude } else { magnitude }))
    }
}

fn parse_decimal(s: &str) -> Option<BigRational> {
    let (mantissa, exp) = match s.split_once('e') {
        Some((m, e)) => (m, e.parse::<i32>().ok()?),
        None => (s, 0),
    };
    let (int_part, frac_part) = mantissa.split_once('.').unwrap_or((mantissa, ""));
    if int_part.is_empty() && frac_part.is_empty() {
        return None;
    }
    if !int_part.bytes().chain(frac_part.bytes()).all(|b| b.is_ascii_digit()) {
        return None;
    }
    let digits = format!("{int_part}{frac_part}");
    let num = BigInt::parse_bytes(digits.as_bytes(), 10)?;
    let scale = exp - frac_part.len() as i32;
    let ten = BigInt::from(10u32);
    let r = if scale >= 0 {
        BigRational::from_integer(num * num_traits::pow(ten, scale as usize))
    } else {
        BigRational::new(num, num_traits::pow(ten, (-scale) as usize))
    };
    Some(r)
}

/// Splits a nonzero rational into sign, magnitude numerator and denominator.
pub(crate) fn split_rational(r: &BigRational) -> (bool, BigInt, BigInt) {
    let negative = r.numer().sign() == Sign::Minus;
    (negative, r.numer().abs(), r.denom().clone())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_cli_values() {
        assert_eq!("1.75".parse::<RationalValue>().unwrap(), RationalValue::from_ratio(7, 4));
        assert_eq!("7/4".parse::<RationalValue>().unwrap(), RationalValue::from_ratio(7, 4));
        assert_eq!("-inf".parse::<RationalValue>().unwrap(), RationalValue::Infinity { negative: true });
        assert_eq!("inf".parse::<RationalValue>().unwrap(), RationalValue::Infinity { negative: false });
        assert_eq!("nan".parse::<RationalValue>().unwrap(), RationalValue::Nan);
        assert_eq!("0".parse::<RationalValue>().unwrap(), RationalValue::zero());
        assert_eq!("-0".parse::<RationalValue>().unwrap(), RationalValue::Zero { negative: true });
        assert_eq!("2.5e-1".parse::<RationalValue>().unwrap(), RationalValue::from_ratio(1, 4));
        assert_eq!("-.5".parse::<RationalValue>().unwrap(), RationalValue::from_ratio(-1, 2));
        assert!("1/0".parse::<RationalValue>().is_err());
        assert!("abc".parse::<RationalValue>().is_err());
        assert!("".parse::<RationalValue>().is_err());
    }

    #[test]
    fn f64_is_exact() {
        assert_eq!(RationalValue::from_f64(0.1).to_string(), "3602879701896397/36028797018963968");
        assert_eq!(RationalValue::from_f64(-3.5), RationalValue::from_ratio(-7, 2));
        let tiny = f64::from_bits(1);
        assert_eq!(RationalValue::from_f64(tiny), RationalValue::from_dyadic(false, 1, -1074));
    }
}
