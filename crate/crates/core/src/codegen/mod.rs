//! Lowering of mapped netlists to straight-line bitslice programs and their
//! emission as macro-style source text.

mod emit;

use std::collections::{BTreeMap, HashMap};

use thiserror::Error;

pub use emit::{emit_text, Dialect};

use crate::cells::CellCountReport;
use crate::netlist::{topo_sort, Netlist, NetlistError, CONST0, CONST1};

#[derive(Debug, Error)]
pub enum CodegenError {
    #[error(transparent)]
    Netlist(#[from] NetlistError),
    #[error("cell {cell} has no emission rule in dialect {dialect}")]
    Unsupported { cell: String, dialect: Dialect },
    #[error("unknown dialect `{0}` (expected portable64, neon, avx2 or avx512)")]
    UnknownDialect(String),
}

/// An operand location.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Reg {
    Const(bool),
    Input(u32),
    Temp(u32),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ProgramOp {
    pub cell: String,
    pub truth: u8,
    /// Always a temp register.
    pub dst: u32,
    pub srcs: Vec<Reg>,
}

/// A linear sequence of cell applications over word registers.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BitsliceProgram {
    pub name: String,
    pub input_names: Vec<String>,
    pub output_names: Vec<String>,
    /// Where each output's value lives after the last op.
    pub outputs: Vec<Reg>,
    pub n_temps: u32,
    pub ops: Vec<ProgramOp>,
}

impl BitsliceProgram {
    pub fn n_inputs(&self) -> usize {
        self.input_names.len()
    }

    pub fn n_outputs(&self) -> usize {
        self.output_names.len()
    }

    /// Whether every temp is written at most once.
    pub fn is_ssa(&self) -> bool {
        let mut seen = vec![false; self.n_temps as usize];
        self.ops.iter().all(|op| !std::mem::replace(&mut seen[op.dst as usize], true))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct LowerOptions {
    /// Recycle a temp once its value has been read for the last time.
    pub reuse_registers: bool,
}

impl Default for LowerOptions {
    fn default() -> Self {
        LowerOptions { reuse_registers: true }
    }
}

/// Lowers with register reuse.
pub fn lower(n: &Netlist) -> Result<BitsliceProgram, CodegenError> {
    lower_with(n, LowerOptions::default())
}

pub fn lower_with(n: &Netlist, opts: LowerOptions) -> Result<BitsliceProgram, CodegenError> {
    let n = topo_sort(n)?;
    let mut loc: HashMap<&str, Reg> = HashMap::new();
    loc.insert(CONST0, Reg::Const(false));
    loc.insert(CONST1, Reg::Const(true));
    for (i, name) in n.inputs().iter().enumerate() {
        loc.insert(name, Reg::Input(i as u32));
    }
    // Resolve output aliases through assigns, which may chain.
    let assigns: HashMap<&str, &str> = n.assigns().iter().map(|(p, s)| (p.as_str(), s.as_str())).collect();
    let out_nets: Vec<String> = n
        .outputs()
        .iter()
        .map(|o| {
            let mut name = o.as_str();
            while let Some(&src) = assigns.get(name) {
                name = src;
            }
            name.to_string()
        })
        .collect();

    // Index of the last op reading each net; outputs stay live to the end.
    let end = n.gates().len();
    let mut last_use: HashMap<&str, usize> = HashMap::new();
    for (i, g) in n.gates().iter().enumerate() {
        for s in &g.ins {
            last_use.insert(s, i);
        }
    }
    for o in &out_nets {
        last_use.insert(o, end);
    }

    let mut free: std::collections::BTreeSet<u32> = Default::default();
    let mut n_temps = 0u32;
    let mut ops = Vec::with_capacity(end);
    for (i, g) in n.gates().iter().enumerate() {
        let srcs: Vec<Reg> = g.ins.iter().map(|s| loc[s.as_str()]).collect();
        if opts.reuse_registers {
            for (s, r) in g.ins.iter().zip(&srcs) {
                if let (Reg::Temp(t), Some(&u)) = (r, last_use.get(s.as_str())) {
                    if u == i {
                        free.insert(*t);
                    }
                }
            }
        }
        let dst = match free.pop_first() {
            Some(t) => t,
            None => {
                n_temps += 1;
                n_temps - 1
            }
        };
        // A gate nobody reads is dead after this op.
        if opts.reuse_registers && !last_use.contains_key(g.out.as_str()) {
            free.insert(dst);
        }
        loc.insert(&g.out, Reg::Temp(dst));
        ops.push(ProgramOp { cell: g.cell.clone(), truth: g.truth, dst, srcs });
    }
    let outputs = out_nets.iter().map(|o| loc[o.as_str()]).collect();
    Ok(BitsliceProgram {
        name: n.name().to_string(),
        input_names: n.inputs().to_vec(),
        output_names: n.outputs().to_vec(),
        outputs,
        n_temps,
        ops,
    })
}

/// Per-cell op counts; equal to the source netlist's cell report.
pub fn op_count(p: &BitsliceProgram) -> CellCountReport {
    let mut counts: BTreeMap<String, usize> = BTreeMap::new();
    for op in &p.ops {
        *counts.entry(op.cell.clone()).or_default() += 1;
    }
    CellCountReport { total: p.ops.len(), counts }
}
