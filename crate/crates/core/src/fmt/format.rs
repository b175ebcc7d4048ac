use std::fmt;
use std::str::FromStr;

use super::FormatError;

/// Rounding applied when an exact result is squeezed into a format.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Rounding {
    /// Round to nearest, ties to even.
    Rne,
    /// Round towards zero (truncate).
    Rtz,
}

impl Rounding {
    pub fn as_str(self) -> &'static str {
        match self {
            Rounding::Rne => "rne",
            Rounding::Rtz => "rtz",
        }
    }
}

impl fmt::Display for Rounding {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Rounding {
    type Err = FormatError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "rne" | "nearest" => Ok(Rounding::Rne),
            "rtz" | "zero" => Ok(Rounding::Rtz),
            _ => Err(FormatError::Syntax(format!("unknown rounding mode `{s}`"))),
        }
    }
}

/// Whether a multiplier rounds its product (`Single`, wF+1 output fraction
/// bits) or keeps it exact (`Extended`, 2wF+1 output fraction bits).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Precision {
    Single,
    Extended,
}

impl Precision {
    pub fn as_str(self) -> &'static str {
        match self {
            Precision::Single => "single",
            Precision::Extended => "extended",
        }
    }
}

impl fmt::Display for Precision {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Precision {
    type Err = FormatError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "single" | "s" => Ok(Precision::Single),
            "extended" | "ext" | "x" | "e" => Ok(Precision::Extended),
            _ => Err(FormatError::Syntax(format!("unknown precision class `{s}`"))),
        }
    }
}

pub const MIN_EXP_BITS: u32 = 2;
pub const MAX_EXP_BITS: u32 = 10;
pub const MIN_FRAC_BITS: u32 = 1;
pub const MAX_FRAC_BITS: u32 = 52;

/// A custom floating-point format in the `exc | sign | exponent | fraction`
/// encoding. Exponents are biased by `2^(wE-1) - 1`; there are no subnormals.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct FpFormat {
    exp_bits: u32,
    frac_bits: u32,
    precision: Precision,
    rounding: Rounding,
}

impl FpFormat {
    pub fn new(
        exp_bits: u32,
        frac_bits: u32,
        precision: Precision,
        rounding: Rounding,
    ) -> Result<Self, FormatError> {
        if !(MIN_EXP_BITS..=MAX_EXP_BITS).contains(&exp_bits) {
            return Err(FormatError::ExponentWidth(exp_bits));
        }
        if !(MIN_FRAC_BITS..=MAX_FRAC_BITS).contains(&frac_bits) {
            return Err(FormatError::FractionWidth(frac_bits));
        }
        Ok(FpFormat {
            exp_bits,
            frac_bits,
            precision,
            rounding,
        })
    }

    /// Single-precision class, round-to-nearest-even.
    pub fn simple(exp_bits: u32, frac_bits: u32) -> Result<Self, FormatError> {
        Self::new(exp_bits, frac_bits, Precision::Single, Rounding::Rne)
    }

    pub fn exp_bits(&self) -> u32 {
        self.exp_bits
    }

    pub fn frac_bits(&self) -> u32 {
        self.frac_bits
    }

    pub fn precision(&self) -> Precision {
        self.precision
    }

    pub fn rounding(&self) -> Rounding {
        self.rounding
    }

    pub fn with_rounding(mut self, rounding: Rounding) -> Self {
        self.rounding = rounding;
        self
    }

    pub fn with_precision(mut self, precision: Precision) -> Self {
        self.precision = precision;
        self
    }

    pub fn bias(&self) -> i64 {
        (1i64 << (self.exp_bits - 1)) - 1
    }

    /// Largest biased exponent field value.
    pub fn max_biased_exp(&self) -> u64 {
        (1u64 << self.exp_bits) - 1
    }

    /// Encoded width: 2 exception bits, sign, exponent, fraction.
    pub fn width(&self) -> u32 {
        2 + 1 + self.exp_bits + self.frac_bits
    }

    /// Fraction width of a product of two values in this format.
    pub fn product_frac_bits(&self) -> u32 {
        match self.precision {
            Precision::Single => self.frac_bits + 1,
            Precision::Extended => 2 * self.frac_bits + 1,
        }
    }

    /// Output format of a multiplier fed with this format; also the
    /// accumulator format of a MAC built from it.
    pub fn product_format(&self) -> Result<FpFormat, FormatError> {
        FpFormat::new(
            self.exp_bits,
            self.product_frac_bits(),
            self.precision,
            self.rounding,
        )
    }

    /// Same widths compared, ignoring class and rounding.
    pub fn same_layout(&self, other: &FpFormat) -> bool {
        self.exp_bits == other.exp_bits && self.frac_bits == other.frac_bits
    }

    pub fn name(&self) -> String {
        self.to_string()
    }
}

impl fmt::Display for FpFormat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "e{}m{}", self.exp_bits, self.frac_bits)?;
        if self.precision == Precision::Extended {
            f.write_str("x")?;
        }
        Ok(())
    }
}

impl FromStr for FpFormat {
    type Err = FormatError;

    /// Parses `e<wE>m<wF>[x]`; rounding defaults to RNE.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || FormatError::Syntax(format!("bad format `{s}`, expected e<wE>m<wF>[x]"));
        let rest = s.trim().strip_prefix(['e', 'E']).ok_or_else(bad)?;
        let (exp, rest) = rest.split_once(['m', 'M']).ok_or_else(bad)?;
        let (frac, precision) = match rest.strip_suffix(['x', 'X']) {
            Some(frac) => (frac, Precision::Extended),
            None => (rest, Precision::Single),
        };
        let exp_bits: u32 = exp.parse().map_err(|_| bad())?;
        let frac_bits: u32 = frac.parse().map_err(|_| bad())?;
        FpFormat::new(exp_bits, frac_bits, precision, Rounding::Rne)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn widths_follow_layout() {
        let f: FpFormat = "e5m3".parse().unwrap();
        assert_eq!(f.width(), 11);
        assert_eq!(f.product_format().unwrap().width(), 12);
        let x: FpFormat = "e5m3x".parse().unwrap();
        assert_eq!(x.product_format().unwrap().width(), 15);
        assert_eq!(f.bias(), 15);
    }

    #[test]
    fn parse_and_display() {
        for s in ["e5m2", "e5m10x", "e4m3", "e2m1"] {
            assert_eq!(s.parse::<FpFormat>().unwrap().to_string(), s);
        }
        assert!("e1m2".parse::<FpFormat>().is_err());
        assert!("e5m0".parse::<FpFormat>().is_err());
        assert!("m5e2".parse::<FpFormat>().is_err());
        assert!("e5m".parse::<FpFormat>().is_err());
    }
}
