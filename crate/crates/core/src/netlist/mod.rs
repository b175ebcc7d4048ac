//! Gate-level netlists: representation, simulation, ordering, text format,
//! and the AIG used for optimization and equivalence checking.

mod aig;
mod equiv;
mod refactor;
mod sim;
mod text;
mod topo;
pub mod truth;

use std::collections::{HashMap, HashSet};

use thiserror::Error;

use crate::logic;

pub use aig::{strash, Aig, AigNode, Lit};
pub use equiv::{check_equiv, BitCircuit, EquivOptions, EquivVerdict, FpOperand};
pub use refactor::refactor;
pub use sim::Simulator;
pub use text::{parse_netlist, parse_netlist_with, write_netlist};
pub use topo::topo_sort;

/// Name of the constant-0 net.
pub const CONST0: &str = "CONST0";
/// Name of the constant-1 net.
pub const CONST1: &str = "CONST1";

pub fn is_const_net(name: &str) -> bool {
    name == CONST0 || name == CONST1
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum NetlistError {
    #[error("combinational cycle through net `{0}`")]
    Cycle(String),
    #[error("no assignment for input `{0}`")]
    MissingInput(String),
    #[error("input words have inconsistent lengths")]
    WidthMismatch,
    #[error("line {line}: {msg}")]
    Syntax { line: usize, msg: String },
    #[error("line {line}: undefined net `{net}`")]
    UndefinedNet { net: String, line: usize },
    #[error("line {line}: net `{net}` has more than one driver")]
    DuplicateDriver { net: String, line: usize },
    #[error("line {line}: unknown cell `{cell}`")]
    UnknownCell { cell: String, line: usize },
    #[error("gate `{out}`: cell {cell} takes {expected} inputs, got {got}")]
    Arity { out: String, cell: String, expected: usize, got: usize },
    #[error("output `{0}` is not driven")]
    UndrivenOutput(String),
    #[error("invalid net name `{0}`")]
    BadName(String),
    #[error("signature mismatch: {0}")]
    Signature(String),
}

/// One cell instance. `truth` follows [`crate::logic`]'s numbering with
/// `ins[0]` as input `a`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Gate {
    pub cell: String,
    pub truth: u8,
    pub out: String,
    pub ins: Vec<String>,
}

impl Gate {
    pub fn new(cell: impl Into<String>, truth: u8, out: impl Into<String>, ins: Vec<String>) -> Self {
        Gate {
            cell: cell.into(),
            truth,
            out: out.into(),
            ins,
        }
    }
}

/// A combinational netlist. Every net has exactly one driver: a primary input,
/// a constant, a gate, or an `assign` that wires an output port to another net.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Netlist {
    name: String,
    inputs: Vec<String>,
    outputs: Vec<String>,
    gates: Vec<Gate>,
    assigns: Vec<(String, String)>,
}

fn valid_name(name: &str) -> bool {
    !name.is_empty() && !name.contains(|c: char| c.is_whitespace() || c == '#')
}

impl Netlist {
    /// Checks drivers, names and arities. Cycles are reported by
    /// [`topo_sort`], not here.
    pub fn new(
        name: impl Into<String>,
        inputs: Vec<String>,
        outputs: Vec<String>,
        gates: Vec<Gate>,
        assigns: Vec<(String, String)>,
    ) -> Result<Self, NetlistError> {
        let n = Netlist {
            name: name.into(),
            inputs,
            outputs,
            gates,
            assigns,
        };
        n.validate()?;
        Ok(n)
    }

    fn validate(&self) -> Result<(), NetlistError> {
        if !valid_name(&self.name) {
            return Err(NetlistError::BadName(self.name.clone()));
        }
        let mut drivers: HashSet<&str> = HashSet::new();
        let driven = self
            .inputs
            .iter()
            .chain(self.gates.iter().map(|g| &g.out))
            .chain(self.assigns.iter().map(|(p, _)| p));
        for net in driven {
            if !valid_name(net) || is_const_net(net) {
                return Err(NetlistError::BadName(net.clone()));
            }
            if !drivers.insert(net.as_str()) {
                return Err(NetlistError::DuplicateDriver { net: net.clone(), line: 0 });
            }
        }
        let defined = drivers;
        let known = |net: &str| is_const_net(net) || defined.contains(net);
        for g in &self.gates {
            if g.ins.len() > 3 || logic::support_width(g.truth) > g.ins.len() {
                return Err(NetlistError::Arity {
                    out: g.out.clone(),
                    cell: g.cell.clone(),
                    expected: logic::support_width(g.truth),
                    got: g.ins.len(),
                });
            }
            if let Some(bad) = g.ins.iter().find(|i| !known(i)) {
                return Err(NetlistError::UndefinedNet { net: bad.clone(), line: 0 });
            }
        }
        for (_, src) in &self.assigns {
            if !known(src) {
                return Err(NetlistError::UndefinedNet { net: src.clone(), line: 0 });
            }
        }
        let outs: HashSet<&str> = self.outputs.iter().map(String::as_str).collect();
        if outs.len() != self.outputs.len() {
            return Err(NetlistError::Signature("duplicate output port".into()));
        }
        for o in &self.outputs {
            if !defined.contains(o.as_str()) || self.inputs.contains(o) {
                return Err(NetlistError::UndrivenOutput(o.clone()));
            }
        }
        Ok(())
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn inputs(&self) -> &[String] {
        &self.inputs
    }

    pub fn outputs(&self) -> &[String] {
        &self.outputs
    }

    pub fn gates(&self) -> &[Gate] {
        &self.gates
    }

    pub fn assigns(&self) -> &[(String, String)] {
        &self.assigns
    }

    pub fn gate_count(&self) -> usize {
        self.gates.len()
    }

    pub fn with_name(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }

    /// Per-cell-name gate counts.
    pub fn cell_histogram(&self) -> std::collections::BTreeMap<String, usize> {
        let mut h = std::collections::BTreeMap::new();
        for g in &self.gates {
            *h.entry(g.cell.clone()).or_insert(0) += 1;
        }
        h
    }

    pub(crate) fn replace_gates(&self, gates: Vec<Gate>) -> Netlist {
        Netlist {
            name: self.name.clone(),
            inputs: self.inputs.clone(),
            outputs: self.outputs.clone(),
            gates,
            assigns: self.assigns.clone(),
        }
    }

    /// Map from net name to the index of the gate driving it.
    pub(crate) fn driver_index(&self) -> HashMap<&str, usize> {
        self.gates.iter().enumerate().map(|(i, g)| (g.out.as_str(), i)).collect()
    }

    /// Compiles the netlist for word-parallel simulation.
    pub fn simulator(&self) -> Result<Simulator, NetlistError> {
        Simulator::new(self)
    }

    /// Simulates `W`-lane words; every input needs a word of the same length
    /// (`ceil(W / 64)` u64s, lane `l` at bit `l % 64` of word `l / 64`).
    pub fn simulate(
        &self,
        assignment: &HashMap<String, Vec<u64>>,
    ) -> Result<Vec<(String, Vec<u64>)>, NetlistError> {
        self.simulator()?.simulate_named(assignment)
    }
}
