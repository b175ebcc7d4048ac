use std::collections::BTreeSet;
use std::fmt::{self, Write};
use std::str::FromStr;

use super::{op_count, BitsliceProgram, CodegenError, Reg};
use crate::cells::truth_to_expr;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Dialect {
    Portable64,
    Neon,
    Avx2,
    Avx512,
}

impl Dialect {
    pub const ALL: [Dialect; 4] = [Dialect::Portable64, Dialect::Neon, Dialect::Avx2, Dialect::Avx512];

    pub fn as_str(self) -> &'static str {
        match self {
            Dialect::Portable64 => "portable64",
            Dialect::Neon => "neon",
            Dialect::Avx2 => "avx2",
            Dialect::Avx512 => "avx512",
        }
    }

    pub fn register_type(self) -> &'static str {
        match self {
            Dialect::Portable64 => "uint64_t",
            Dialect::Neon => "uint64x2_t",
            Dialect::Avx2 => "__m256i",
            Dialect::Avx512 => "__m512i",
        }
    }

    fn ones(self) -> &'static str {
        match self {
            Dialect::Portable64 => "(~(uint64_t)0)",
            Dialect::Neon => "vdupq_n_u64(~(uint64_t)0)",
            Dialect::Avx2 => "_mm256_set1_epi64x(-1)",
            Dialect::Avx512 => "_mm512_set1_epi64(-1)",
        }
    }

    fn zeros(self) -> &'static str {
        match self {
            Dialect::Portable64 => "((uint64_t)0)",
            Dialect::Neon => "vdupq_n_u64(0)",
            Dialect::Avx2 => "_mm256_setzero_si256()",
            Dialect::Avx512 => "_mm512_setzero_si512()",
        }
    }

    /// Right-hand side computing `cell` over `(a)`, `(b)`, `(c)`, or `None`
    /// when the target has no such instruction.
    fn rule(self, cell: &str, arity: usize, truth: u8) -> Option<String> {
        use Dialect::*;
        let s = match (self, cell) {
            (Portable64, "AND") => "(a) & (b)",
            (Portable64, "OR") => "(a) | (b)",
            (Portable64, "XOR") => "(a) ^ (b)",
            (Portable64, "NOT") => "~(a)",
            (Portable64, "ANDNOT") => "~(a) & (b)",
            (Portable64, "ORN") => "(a) | ~(b)",
            (Portable64, "BIC") => "(a) & ~(b)",
            (Portable64, "SEL") => "((a) & (b)) | (~(a) & (c))",
            (Portable64, "SELN") => "~(((a) & (b)) | (~(a) & (c)))",
            (Portable64, "BUF") => "(a)",
            (Neon, "AND") => "vandq_u64((a), (b))",
            (Neon, "OR") => "vorrq_u64((a), (b))",
            (Neon, "XOR") => "veorq_u64((a), (b))",
            (Neon, "NOT") => "veorq_u64((a), vdupq_n_u64(~(uint64_t)0))",
            (Neon, "ORN") => "vornq_u64((a), (b))",
            (Neon, "BIC") => "vbicq_u64((a), (b))",
            (Neon, "ANDNOT") => "vbicq_u64((b), (a))",
            (Neon, "SEL") => "vbslq_u64((a), (b), (c))",
            (Avx2, "AND") => "_mm256_and_si256((a), (b))",
            (Avx2, "OR") => "_mm256_or_si256((a), (b))",
            (Avx2, "XOR") => "_mm256_xor_si256((a), (b))",
            (Avx2, "NOT") => "_mm256_xor_si256((a), _mm256_set1_epi64x(-1))",
            (Avx2, "ANDNOT") => "_mm256_andnot_si256((a), (b))",
            (Avx2, "BIC") => "_mm256_andnot_si256((b), (a))",
            (Avx512, "AND") => "_mm512_and_si512((a), (b))",
            (Avx512, "OR") => "_mm512_or_si512((a), (b))",
            (Avx512, "XOR") => "_mm512_xor_si512((a), (b))",
            (Avx512, "NOT") => "_mm512_ternarylogic_epi64((a), (a), (a), 0x0f)",
            (Avx512, "ANDNOT") => "_mm512_andnot_si512((a), (b))",
            // Anything else is computed from its truth table.
            (Portable64, _) => return Some(lut_rhs(truth)),
            (Avx512, _) => {
                let args = ["(a), (a), (a)", "(a), (b), (b)", "(a), (b), (c)"][arity.clamp(1, 3) - 1];
                return Some(format!("_mm512_ternarylogic_epi64({args}, 0x{truth:02x})"));
            }
            _ => return None,
        };
        Some(s.to_string())
    }
}

fn lut_rhs(truth: u8) -> String {
    let expr = truth_to_expr(truth);
    let mut out = String::new();
    for ch in expr.chars() {
        match ch {
            'a' | 'b' | 'c' => {
                out.push('(');
                out.push(ch);
                out.push(')');
            }
            '0' => out.push_str("((uint64_t)0)"),
            '1' => out.push_str("(~(uint64_t)0)"),
            _ => out.push(ch),
        }
    }
    out
}

impl fmt::Display for Dialect {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Dialect {
    type Err = CodegenError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Dialect::ALL
            .into_iter()
            .find(|d| d.as_str() == s)
            .ok_or_else(|| CodegenError::UnknownDialect(s.to_string()))
    }
}

/// `XOR2X1`, `SEL3X1`, `LUT150X1`.
fn macro_name(cell: &str, arity: usize) -> String {
    if cell.starts_with("LUT") {
        format!("{cell}X1")
    } else {
        format!("{cell}{arity}X1")
    }
}

/// Splits `x[3]` into `("x", Some(3))`.
fn bus_of(name: &str) -> (&str, Option<usize>) {
    if let Some(open) = name.find('[') {
        if let Some(idx) = name[open + 1..].strip_suffix(']').and_then(|s| s.parse().ok()) {
            return (&name[..open], Some(idx));
        }
    }
    (name, None)
}

/// Ports grouped by bus in first-appearance order, with their widths.
fn buses(names: &[String]) -> Vec<(String, Option<usize>)> {
    let mut out: Vec<(String, Option<usize>)> = Vec::new();
    for n in names {
        let (bus, idx) = bus_of(n);
        match out.iter_mut().find(|(b, _)| b == bus) {
            Some((_, w)) => {
                if let (Some(w), Some(i)) = (w.as_mut(), idx) {
                    *w = (*w).max(i + 1);
                }
            }
            None => out.push((bus.to_string(), idx.map(|i| i + 1))),
        }
    }
    out
}

fn c_ident(name: &str) -> String {
    name.chars().map(|c| if c.is_ascii_alphanumeric() { c } else { '_' }).collect()
}

/// Renders a program as one function of macro calls for `dialect`.
pub fn emit_text(p: &BitsliceProgram, dialect: Dialect) -> Result<String, CodegenError> {
    let mut used: BTreeSet<(String, usize, u8)> = BTreeSet::new();
    for op in &p.ops {
        used.insert((op.cell.clone(), op.srcs.len(), op.truth));
    }
    let mut rules = Vec::new();
    for (cell, arity, truth) in &used {
        let rhs = dialect
            .rule(cell, *arity, *truth)
            .ok_or_else(|| CodegenError::Unsupported { cell: cell.clone(), dialect })?;
        rules.push((macro_name(cell, *arity), *arity, rhs));
    }

    let ty = dialect.register_type();
    let count = op_count(p);
    let mut s = String::new();
    writeln!(s, "/* {}: {} ops, dialect {}", p.name, count.total, dialect).unwrap();
    let per_cell: Vec<String> = count.counts.iter().map(|(c, n)| format!("{c}={n}")).collect();
    writeln!(s, " * cells: {}", if per_cell.is_empty() { "none".to_string() } else { per_cell.join(" ") }).unwrap();
    writeln!(s, " * temps: {} */", p.n_temps).unwrap();
    match dialect {
        Dialect::Portable64 => writeln!(s, "#include <stdint.h>").unwrap(),
        Dialect::Neon => writeln!(s, "#include <arm_neon.h>").unwrap(),
        Dialect::Avx2 | Dialect::Avx512 => writeln!(s, "#include <immintrin.h>").unwrap(),
    }
    writeln!(s).unwrap();
    for (name, arity, rhs) in &rules {
        let params = ["a", "b", "c"][..*arity].join(", ");
        writeln!(s, "#ifndef {name}").unwrap();
        writeln!(s, "#define {name}({params}, out) ((out) = {rhs})").unwrap();
        writeln!(s, "#endif").unwrap();
    }
    if !rules.is_empty() {
        writeln!(s).unwrap();
    }

    let ins = buses(&p.input_names);
    let outs = buses(&p.output_names);
    let mut params: Vec<String> = Vec::new();
    for (bus, w) in &ins {
        params.push(match w {
            Some(w) => format!("const {ty} {}[{w}]", c_ident(bus)),
            None => format!("{ty} {}", c_ident(bus)),
        });
    }
    for (bus, w) in &outs {
        params.push(match w {
            Some(w) => format!("{ty} {}[{w}]", c_ident(bus)),
            None => format!("{ty} *{}", c_ident(bus)),
        });
    }
    writeln!(s, "static inline void {}({})", c_ident(&p.name), params.join(", ")).unwrap();
    writeln!(s, "{{").unwrap();
    if p.n_temps > 0 {
        let temps: Vec<String> = (0..p.n_temps).map(|t| format!("n_{t}")).collect();
        for chunk in temps.chunks(12) {
            writeln!(s, "    {ty} {};", chunk.join(", ")).unwrap();
        }
    }
    let port = |name: &str| -> String {
        match bus_of(name) {
            (bus, Some(i)) => format!("{}[{i}]", c_ident(bus)),
            (bus, None) => c_ident(bus),
        }
    };
    let operand = |r: &Reg| -> String {
        match r {
            Reg::Const(false) => dialect.zeros().to_string(),
            Reg::Const(true) => dialect.ones().to_string(),
            Reg::Input(i) => port(&p.input_names[*i as usize]),
            Reg::Temp(t) => format!("n_{t}"),
        }
    };
    for op in &p.ops {
        let mut args: Vec<String> = op.srcs.iter().map(operand).collect();
        args.push(format!("n_{}", op.dst));
        writeln!(s, "    {}({});", macro_name(&op.cell, op.srcs.len()), args.join(", ")).unwrap();
    }
    for (name, r) in p.output_names.iter().zip(&p.outputs) {
        let dst = match bus_of(name) {
            (bus, Some(i)) => format!("{}[{i}]", c_ident(bus)),
            (bus, None) => format!("*{}", c_ident(bus)),
        };
        writeln!(s, "    {dst} = {};", operand(r)).unwrap();
    }
    writeln!(s, "}}").unwrap();
    Ok(s)
}
