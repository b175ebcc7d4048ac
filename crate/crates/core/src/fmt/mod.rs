//! Custom floating-point formats, their encoding, and exact scalar reference
//! arithmetic.

mod arith;
mod format;
mod scalar;
mod value;

use thiserror::Error;

pub use arith::{convert, from_binary32, ref_add, ref_mul, ref_mul_auto, ref_relu, to_binary32};
pub use format::{FpFormat, Precision, Rounding, MAX_EXP_BITS, MAX_FRAC_BITS, MIN_EXP_BITS, MIN_FRAC_BITS};
pub use scalar::{decode, encode, EncodedScalar, ExcClass};
pub use value::RationalValue;

pub(crate) use arith::{add_unchecked, mul_unchecked};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FormatError {
    #[error("exponent width {0} outside {MIN_EXP_BITS}..={MAX_EXP_BITS}")]
    ExponentWidth(u32),
    #[error("fraction width {0} outside {MIN_FRAC_BITS}..={MAX_FRAC_BITS}")]
    FractionWidth(u32),
    #[error("bit pattern {bits:#x} does not fit in {width} bits")]
    BitsOutOfRange { bits: u64, width: u32 },
    #[error("exponent or fraction field out of range")]
    FieldOutOfRange,
    #[error("format mismatch: {0} vs {1}")]
    Mismatch(FpFormat, FpFormat),
    #[error("{output} is not a product format of {input}")]
    ProductFormat { input: FpFormat, output: FpFormat },
    #[error("{0}")]
    Syntax(String),
}
