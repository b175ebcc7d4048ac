//! Cell libraries modeling the bitwise instruction sets of target CPUs, and
//! the technology mapper that covers an AIG with their cells.

mod expr;
mod map;
mod synth;

use std::collections::HashSet;
use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::logic;
use crate::netlist::{refactor, strash, Netlist};
use crate::netlist::truth::{isop, Cube, TruthTable};

pub use expr::{parse_expr, ExprError};
pub use map::{cell_count_report, tech_map, CellCountReport, MapError};
pub use synth::SynthesisTable;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LibraryError {
    #[error("unknown library `{0}`")]
    UnknownLibrary(String),
    #[error("line {line}: {msg}")]
    Syntax { line: usize, msg: String },
    #[error("line {line}: arity {arity} is out of range 1..=3")]
    Arity { line: usize, arity: usize },
    #[error("line {line}: duplicate cell `{name}`")]
    Duplicate { line: usize, name: String },
    #[error("library `{0}` cannot express NAND")]
    Incomplete(String),
    #[error("cell `{0}`: {1}")]
    BadCell(String, String),
}

#[derive(Clone, Debug, PartialEq)]
pub struct Cell {
    name: String,
    arity: usize,
    truth: u8,
    cost: f64,
    ports: Vec<String>,
    expr: String,
}

const DEFAULT_PORTS: [&str; 3] = ["a", "b", "c"];

impl Cell {
    /// Builds a cell from an expression over the default ports `a b c`.
    pub fn new(name: &str, arity: usize, expr: &str) -> Result<Cell, LibraryError> {
        let ports: Vec<String> = DEFAULT_PORTS[..arity.min(3)].iter().map(|s| s.to_string()).collect();
        Cell::with_ports(name, arity, ports, expr, 1.0)
    }

    pub fn with_ports(
        name: &str,
        arity: usize,
        ports: Vec<String>,
        expr: &str,
        cost: f64,
    ) -> Result<Cell, LibraryError> {
        let bad = |m: String| LibraryError::BadCell(name.to_string(), m);
        if !(1..=3).contains(&arity) {
            return Err(LibraryError::Arity { line: 0, arity });
        }
        if ports.len() != arity {
            return Err(bad(format!("{} ports for arity {arity}", ports.len())));
        }
        if !(cost > 0.0 && cost.is_finite()) {
            return Err(bad("cost must be positive".into()));
        }
        let port_refs: Vec<&str> = ports.iter().map(String::as_str).collect();
        let truth = parse_expr(expr, &port_refs).map_err(|e| bad(e.to_string()))?;
        Ok(Cell {
            name: name.to_string(),
            arity,
            truth,
            cost,
            ports,
            expr: expr.trim().to_string(),
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn truth(&self) -> u8 {
        self.truth
    }

    pub fn cost(&self) -> f64 {
        self.cost
    }

    pub fn expr(&self) -> &str {
        &self.expr
    }

    fn has_default_ports(&self) -> bool {
        self.ports.iter().zip(DEFAULT_PORTS).all(|(p, d)| p == d)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct CellLibrary {
    name: String,
    cells: Vec<Cell>,
    closed: bool,
}

impl CellLibrary {
    pub fn new(name: impl Into<String>, cells: Vec<Cell>) -> Result<CellLibrary, LibraryError> {
        let lib = CellLibrary {
            name: name.into(),
            cells,
            closed: true,
        };
        let mut seen = HashSet::new();
        for c in &lib.cells {
            if !seen.insert(c.name.as_str()) {
                return Err(LibraryError::Duplicate { line: 0, name: c.name.clone() });
            }
        }
        if !lib.is_complete() {
            return Err(LibraryError::Incomplete(lib.name));
        }
        Ok(lib)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn cells(&self) -> &[Cell] {
        &self.cells
    }

    /// Whether the mapper is restricted to the listed cells. Always true for
    /// builtin libraries; `library <name> open` in text clears it.
    pub fn is_closed(&self) -> bool {
        self.closed
    }

    pub fn cell(&self, name: &str) -> Option<&Cell> {
        self.cells.iter().find(|c| c.name == name)
    }

    pub fn cell_index(&self, name: &str) -> Option<usize> {
        self.cells.iter().position(|c| c.name == name)
    }

    /// NAND of two inputs is reachable by composing cells over `a`, `b` and
    /// the constants.
    pub fn is_complete(&self) -> bool {
        // Two-variable functions as 4-bit tables indexed by 2a + b.
        let mut known: HashSet<u8> = [0b1100u8, 0b1010, 0b0000, 0b1111].into_iter().collect();
        loop {
            let list: Vec<u8> = known.iter().copied().collect();
            let before = known.len();
            for c in &self.cells {
                let picks = |i: usize| if i < c.arity { list.clone() } else { vec![0] };
                for &x in &picks(0) {
                    for &y in &picks(1) {
                        for &z in &picks(2) {
                            let mut t = 0u8;
                            for m in 0..4 {
                                let bit = |f: u8| (f >> m) & 1 == 1;
                                if logic::eval_bit(c.truth, bit(x), bit(y), bit(z)) {
                                    t |= 1 << m;
                                }
                            }
                            known.insert(t);
                        }
                    }
                }
            }
            if known.contains(&0b0111) {
                return true;
            }
            if known.len() == before {
                return false;
            }
        }
    }
}

/// Builtin library identifiers.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum LibraryId {
    Generic2,
    Arm64,
    Neon,
    X64,
    Avx2,
    Avx512Lut3,
}

impl LibraryId {
    pub const ALL: [LibraryId; 6] = [
        LibraryId::Generic2,
        LibraryId::Arm64,
        LibraryId::Neon,
        LibraryId::X64,
        LibraryId::Avx2,
        LibraryId::Avx512Lut3,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            LibraryId::Generic2 => "generic2",
            LibraryId::Arm64 => "arm64",
            LibraryId::Neon => "neon",
            LibraryId::X64 => "x64",
            LibraryId::Avx2 => "avx2",
            LibraryId::Avx512Lut3 => "avx512_lut3",
        }
    }
}

impl fmt::Display for LibraryId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for LibraryId {
    type Err = LibraryError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        LibraryId::ALL
            .into_iter()
            .find(|id| id.as_str() == s)
            .ok_or_else(|| LibraryError::UnknownLibrary(s.to_string()))
    }
}

fn cell(name: &str, arity: usize, expr: &str) -> Cell {
    Cell::new(name, arity, expr).expect("builtin cell")
}

fn basic_cells() -> Vec<Cell> {
    vec![
        cell("AND", 2, "a & b"),
        cell("OR", 2, "a | b"),
        cell("XOR", 2, "a ^ b"),
        cell("NOT", 1, "~a"),
    ]
}

/// Name of the 3-input LUT cell with this truth table.
pub fn lut_name(truth: u8) -> String {
    format!("LUT{truth:03}")
}

/// Sum-of-products text for a 3-input truth table.
pub fn truth_to_expr(truth: u8) -> String {
    match truth {
        logic::FALSE => return "0".into(),
        logic::TRUE => return "1".into(),
        _ => {}
    }
    // TruthTable variable i is bit i of the minterm; the cell index puts
    // `a` at bit 2, so variable 2 is `a` and variable 0 is `c`.
    let t = TruthTable::from_byte(truth);
    let names = ["c", "b", "a"];
    let term = |cube: &Cube| {
        let mut lits = Vec::new();
        for v in (0..3).rev() {
            if cube.pos >> v & 1 == 1 {
                lits.push(names[v].to_string());
            }
            if cube.neg >> v & 1 == 1 {
                lits.push(format!("~{}", names[v]));
            }
        }
        lits.join(" & ")
    };
    let cubes = isop(&t);
    if cubes.len() == 1 {
        return term(&cubes[0]);
    }
    cubes
        .iter()
        .map(|c| if c.literal_count() > 1 { format!("({})", term(c)) } else { term(c) })
        .collect::<Vec<_>>()
        .join(" | ")
}

pub fn builtin_library(id: LibraryId) -> CellLibrary {
    let mut cells = match id {
        LibraryId::Avx512Lut3 => Vec::new(),
        _ => basic_cells(),
    };
    match id {
        LibraryId::Generic2 => {
            cells.push(cell("ANDNOT", 2, "~a & b"));
            cells.push(cell("ORN", 2, "a | ~b"));
        }
        LibraryId::Arm64 => cells.push(cell("ORN", 2, "a | ~b")),
        LibraryId::Neon => {
            cells.push(cell("ORN", 2, "a | ~b"));
            cells.push(cell("SEL", 3, "(a & b) | (~a & c)"));
        }
        LibraryId::X64 => {}
        LibraryId::Avx2 => cells.push(cell("ANDNOT", 2, "~a & b")),
        LibraryId::Avx512Lut3 => {
            for t in 0..=255u8 {
                cells.push(cell(&lut_name(t), 3, &truth_to_expr(t)));
            }
        }
    }
    CellLibrary::new(id.as_str(), cells).expect("builtin libraries are complete")
}

/// Truth table for any cell name known to the builtin libraries, the
/// generic set, and the complemented-select variant `SELN`.
pub fn builtin_cell_truth(name: &str) -> Option<u8> {
    Some(match name {
        "AND" => logic::AND,
        "OR" => logic::OR,
        "XOR" => logic::XOR,
        "NOT" => logic::NOT,
        "ANDNOT" => logic::ANDNOT,
        "ORN" => logic::ORN,
        "BIC" => logic::BIC,
        "SEL" => logic::SEL,
        "SELN" => !logic::SEL,
        "BUF" => logic::BUF,
        "CONST0" => logic::FALSE,
        "CONST1" => logic::TRUE,
        _ => {
            let digits = name.strip_prefix("LUT")?;
            if digits.len() != 3 || !digits.bytes().all(|b| b.is_ascii_digit()) {
                return None;
            }
            digits.parse::<u8>().ok()?
        }
    })
}

/// Parses the library text format.
pub fn parse_library(text: &str) -> Result<CellLibrary, LibraryError> {
    let mut name = None;
    let mut closed = true;
    let mut cells: Vec<Cell> = Vec::new();
    let mut seen = HashSet::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let body = raw.split('#').next().unwrap_or("").trim();
        if body.is_empty() {
            continue;
        }
        let syntax = |msg: &str| LibraryError::Syntax { line, msg: msg.to_string() };
        let toks: Vec<&str> = body.split_whitespace().collect();
        match toks[0] {
            "library" => {
                if name.is_some() {
                    return Err(syntax("second library header"));
                }
                match toks[1..] {
                    [n] => name = Some(n.to_string()),
                    [n, "open"] => {
                        name = Some(n.to_string());
                        closed = false;
                    }
                    _ => return Err(syntax("expected `library <name> [open]`")),
                }
            }
            "cell" => {
                if name.is_none() {
                    return Err(syntax("cell before library header"));
                }
                let (lhs, rhs) = body.split_once('=').ok_or_else(|| syntax("missing `=`"))?;
                let head: Vec<&str> = lhs.split_whitespace().collect();
                if head.len() < 3 {
                    return Err(syntax("expected `cell <NAME> <arity> [ports] = <expr>`"));
                }
                let cname = head[1];
                let arity: usize = head[2].parse().map_err(|_| syntax("arity must be a number"))?;
                if !(1..=3).contains(&arity) {
                    return Err(LibraryError::Arity { line, arity });
                }
                let ports: Vec<String> = if head.len() == 3 {
                    DEFAULT_PORTS[..arity].iter().map(|s| s.to_string()).collect()
                } else if head.len() == 3 + arity {
                    head[3..].iter().map(|s| s.to_string()).collect()
                } else {
                    return Err(syntax("port list length differs from arity"));
                };
                let (expr_text, cost) = match rhs.rsplit_once(" cost ") {
                    Some((e, c)) => (e, c.trim().parse::<f64>().map_err(|_| syntax("bad cost"))?),
                    None => (rhs, 1.0),
                };
                let port_refs: Vec<&str> = ports.iter().map(String::as_str).collect();
                parse_expr(expr_text, &port_refs).map_err(|e| syntax(&e.to_string()))?;
                let c = Cell::with_ports(cname, arity, ports, expr_text, cost).map_err(|e| match e {
                    LibraryError::BadCell(_, m) => syntax(&m),
                    other => other,
                })?;
                if !seen.insert(cname.to_string()) {
                    return Err(LibraryError::Duplicate { line, name: cname.to_string() });
                }
                cells.push(c);
            }
            other => return Err(syntax(&format!("unknown keyword `{other}`"))),
        }
    }
    let name = name.ok_or(LibraryError::Syntax { line: 1, msg: "missing library header".into() })?;
    let mut lib = CellLibrary::new(name, cells)?;
    lib.closed = closed;
    Ok(lib)
}

pub fn write_library(lib: &CellLibrary) -> String {
    let mut out = format!("library {}{}\n", lib.name, if lib.closed { "" } else { " open" });
    for c in &lib.cells {
        out.push_str(&format!("cell {} {}", c.name, c.arity));
        if !c.has_default_ports() {
            for p in &c.ports {
                out.push(' ');
                out.push_str(p);
            }
        }
        out.push_str(" = ");
        out.push_str(&c.expr);
        if c.cost != 1.0 {
            out.push_str(&format!(" cost {}", c.cost));
        }
        out.push('\n');
    }
    out
}

/// Refactoring passes run by [`synthesize`].
pub const REFACTOR_PASSES: usize = 4;

/// The full flow for one generic netlist: structural hashing, refactoring,
/// then covering with `lib` cells. Refactoring occasionally hides structure
/// the mapper could have used, so the hashed graph is mapped as well and the
/// smaller cover kept.
pub fn synthesize(n: &Netlist, lib: &CellLibrary) -> Result<Netlist, MapError> {
    let g = strash(n)?;
    let refactored = tech_map(&refactor(&g, REFACTOR_PASSES), lib)?;
    let direct = tech_map(&g, lib)?;
    Ok(if direct.gate_count() < refactored.gate_count() { direct } else { refactored })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn builtin_contents() {
        let avx512 = builtin_library(LibraryId::Avx512Lut3);
        assert_eq!(avx512.cells().len(), 256);
        assert_eq!(avx512.cell("LUT150").unwrap().truth(), logic::XOR3);
        assert_eq!(avx512.cell("LUT232").unwrap().truth(), logic::MAJ);
        assert!(builtin_library(LibraryId::Neon).cell("SEL").is_some());
        assert!(builtin_library(LibraryId::Arm64).cell("SEL").is_none());
        assert!(builtin_library(LibraryId::Neon).cell("BIC").is_none());
        assert_eq!(builtin_library(LibraryId::Avx2).cell("ANDNOT").unwrap().truth(), logic::ANDNOT);
        for id in LibraryId::ALL {
            assert!(builtin_library(id).is_complete(), "{id}");
        }
    }

    #[test]
    fn lut_expressions_match_truth() {
        for t in 0..=255u8 {
            assert_eq!(parse_expr(&truth_to_expr(t), &["a", "b", "c"]).unwrap(), t);
        }
    }

    #[test]
    fn round_trip() {
        for id in LibraryId::ALL {
            let lib = builtin_library(id);
            let text = write_library(&lib);
            let back = parse_library(&text).unwrap();
            assert_eq!(back, lib);
            assert_eq!(write_library(&back), text);
        }
    }

    #[test]
    fn select_with_named_ports() {
        let lib = parse_library("library m\ncell SEL 3 s a b = (s&a)|(~s&b)\ncell NOT 1 = ~a\ncell AND 2 = a & b\n").unwrap();
        assert_eq!(lib.cell("SEL").unwrap().truth(), logic::SEL);
        assert_eq!(parse_library(&write_library(&lib)).unwrap(), lib);
    }

    #[test]
    fn errors() {
        let e = parse_library("library m\ncell NOT 1 = ~a\ncell X 2 = a &\n").unwrap_err();
        assert!(matches!(e, LibraryError::Syntax { line: 3, .. }), "{e:?}");
        let e = parse_library("library m\ncell X 4 = a\n").unwrap_err();
        assert!(matches!(e, LibraryError::Arity { line: 2, arity: 4 }));
        let e = parse_library("library m\ncell A 2 = a & b\ncell O 2 = a | b\n").unwrap_err();
        assert!(matches!(e, LibraryError::Incomplete(_)));
        let e = parse_library("library m\ncell N 1 = ~a\ncell N 2 = a & b\n").unwrap_err();
        assert!(matches!(e, LibraryError::Duplicate { line: 3, .. }));
        assert!(matches!(
            parse_library("library m\ncell Y 1 = a & q\n").unwrap_err(),
            LibraryError::Syntax { line: 2, .. }
        ));
    }

    #[test]
    fn custom_costs_round_trip() {
        let text = "library cheap open\ncell NAND 2 = ~(a & b) cost 0.5\n";
        let lib = parse_library(text).unwrap();
        assert!(!lib.is_closed());
        assert_eq!(lib.cell("NAND").unwrap().cost(), 0.5);
        assert_eq!(write_library(&lib), text);
    }
}
