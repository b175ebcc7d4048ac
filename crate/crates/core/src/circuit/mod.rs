//! Netlist generators for integer building blocks and for FP multipliers,
//! adders and ReLU in the encoded format, plus scalar oracles wrapped as
//! circuits for equivalence checking.

mod builder;
mod fp;
mod int;

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

pub use builder::{Builder, Sig};
pub use fp::{gen_fp_add, gen_fp_mul, gen_relu};
pub use int::{gen_int_adder, gen_int_mul, gen_lzc, gen_right_shifter};

use crate::fmt::{EncodedScalar, FormatError, FpFormat, Precision};
use crate::netlist::{BitCircuit, FpOperand, Netlist, NetlistError};

#[derive(Debug, Error)]
pub enum CircuitError {
    #[error("width must be at least 1, got {0}")]
    Width(usize),
    #[error(transparent)]
    Format(#[from] FormatError),
    #[error(transparent)]
    Netlist(#[from] NetlistError),
    #[error("unknown operator `{0}` (expected mul, add or relu)")]
    UnknownOp(String),
}

/// FP operator kinds.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Op {
    Mul,
    Add,
    Relu,
}

impl Op {
    pub fn as_str(self) -> &'static str {
        match self {
            Op::Mul => "mul",
            Op::Add => "add",
            Op::Relu => "relu",
        }
    }
}

impl fmt::Display for Op {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Op {
    type Err = CircuitError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "mul" => Ok(Op::Mul),
            "add" => Ok(Op::Add),
            "relu" => Ok(Op::Relu),
            _ => Err(CircuitError::UnknownOp(s.to_string())),
        }
    }
}

/// `fp_mul_e5m2_rne_single` and the like.
pub fn module_name(op: Op, fmt: FpFormat) -> String {
    format!(
        "fp_{}_e{}m{}_{}_{}",
        op,
        fmt.exp_bits(),
        fmt.frac_bits(),
        fmt.rounding().as_str(),
        fmt.precision().as_str()
    )
}

/// Inverse of [`module_name`].
pub fn parse_module_name(name: &str) -> Option<(Op, FpFormat)> {
    let mut parts = name.strip_prefix("fp_")?.split('_');
    let op: Op = parts.next()?.parse().ok()?;
    let fmt: FpFormat = parts.next()?.parse().ok()?;
    let rounding = parts.next()?.parse().ok()?;
    let precision = parts.next()?.parse().ok()?;
    if parts.next().is_some() {
        return None;
    }
    Some((op, fmt.with_rounding(rounding).with_precision(precision)))
}

/// What to generate. The netlist interface is fully determined by the spec.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CircuitSpec {
    IntAdd { width: usize },
    IntMul { width: usize },
    Shifter { width: usize, smax: usize },
    Lzc { width: usize },
    /// Operands in `format`, result in `format.product_format()`.
    FpMul { format: FpFormat },
    FpAdd { format: FpFormat },
    Relu { format: FpFormat },
}

impl CircuitSpec {
    pub fn generate(&self) -> Result<Netlist, CircuitError> {
        match *self {
            CircuitSpec::IntAdd { width } => gen_int_adder(width),
            CircuitSpec::IntMul { width } => gen_int_mul(width),
            CircuitSpec::Shifter { width, smax } => gen_right_shifter(width, smax),
            CircuitSpec::Lzc { width } => gen_lzc(width),
            CircuitSpec::FpMul { format } => gen_fp_mul(format),
            CircuitSpec::FpAdd { format } => gen_fp_add(format),
            CircuitSpec::Relu { format } => gen_relu(format),
        }
    }

    pub fn fp(op: Op, format: FpFormat) -> CircuitSpec {
        match op {
            Op::Mul => CircuitSpec::FpMul { format },
            Op::Add => CircuitSpec::FpAdd { format },
            Op::Relu => CircuitSpec::Relu { format },
        }
    }
}

/// Format an operator's result is encoded in.
pub fn result_format(op: Op, fmt: FpFormat) -> Result<FpFormat, FormatError> {
    match op {
        Op::Mul => fmt.product_format(),
        Op::Add | Op::Relu => Ok(fmt),
    }
}

/// The reference arithmetic as a [`BitCircuit`] with the same interface as
/// the generated netlist for `op` over `format`.
#[derive(Clone, Debug)]
pub struct FpOracle {
    op: Op,
    format: FpFormat,
    out: FpFormat,
}

impl FpOracle {
    pub fn new(op: Op, format: FpFormat) -> Result<FpOracle, FormatError> {
        Ok(FpOracle { op, format, out: result_format(op, format)? })
    }

    fn arity(&self) -> usize {
        if self.op == Op::Relu {
            1
        } else {
            2
        }
    }

    pub fn eval(&self, a: u64, b: u64) -> u64 {
        let x = EncodedScalar::from_bits(self.format, a).expect("operand fits the format");
        let r = match self.op {
            Op::Mul => {
                let y = EncodedScalar::from_bits(self.format, b).expect("operand fits the format");
                crate::fmt::mul_unchecked(&x, &y, self.out)
            }
            Op::Add => {
                let y = EncodedScalar::from_bits(self.format, b).expect("operand fits the format");
                crate::fmt::add_unchecked(&x, &y)
            }
            Op::Relu => crate::fmt::ref_relu(&x),
        };
        r.bits()
    }
}

impl BitCircuit for FpOracle {
    fn input_names(&self) -> Vec<String> {
        let n = self.format.width();
        let mut v: Vec<String> = (0..n).map(|i| format!("a[{i}]")).collect();
        if self.arity() == 2 {
            v.extend((0..n).map(|i| format!("b[{i}]")));
        }
        v
    }

    fn output_names(&self) -> Vec<String> {
        (0..self.out.width()).map(|i| format!("r[{i}]")).collect()
    }

    fn eval_block(&self, inputs: &[Vec<u64>], words: usize) -> Vec<Vec<u64>> {
        let n = self.format.width() as usize;
        let nout = self.out.width() as usize;
        let mut out = vec![vec![0u64; words]; nout];
        let gather = |base: usize, w: usize, lane: usize| -> u64 {
            (0..n).fold(0u64, |acc, i| acc | (((inputs[base + i][w] >> lane) & 1) << i))
        };
        for w in 0..words {
            for lane in 0..64 {
                let a = gather(0, w, lane);
                let b = if self.arity() == 2 { gather(n, w, lane) } else { 0 };
                let r = self.eval(a, b);
                for (j, o) in out.iter_mut().enumerate() {
                    o[w] |= ((r >> j) & 1) << lane;
                }
            }
        }
        out
    }

    fn fp_operands(&self) -> Vec<FpOperand> {
        let n = self.format.width() as usize;
        (0..self.arity())
            .map(|k| FpOperand { format: self.format, bits: (k * n..(k + 1) * n).collect() })
            .collect()
    }
}

/// Both precision classes of a format, single first.
pub fn classes(fmt: FpFormat) -> [FpFormat; 2] {
    [fmt.with_precision(Precision::Single), fmt.with_precision(Precision::Extended)]
}
