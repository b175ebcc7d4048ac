use std::collections::HashMap;

use super::{topo_sort, Netlist, NetlistError, CONST1};
use crate::logic;

#[derive(Clone, Copy, Debug)]
struct SimOp {
    truth: u8,
    ins: [u32; 3],
}

/// A netlist compiled to index form. Net 0 is constant 0, net 1 constant 1,
/// then the primary inputs, then one net per gate in topological order.
#[derive(Clone, Debug)]
pub struct Simulator {
    inputs: Vec<String>,
    outputs: Vec<String>,
    ops: Vec<SimOp>,
    out_nets: Vec<u32>,
}

impl Simulator {
    pub fn new(n: &Netlist) -> Result<Self, NetlistError> {
        let sorted = topo_sort(n)?;
        let mut ids: HashMap<&str, u32> = HashMap::new();
        ids.insert(super::CONST0, 0);
        ids.insert(CONST1, 1);
        for (i, name) in sorted.inputs().iter().enumerate() {
            ids.insert(name, 2 + i as u32);
        }
        let base = 2 + sorted.inputs().len() as u32;
        let mut ops = Vec::with_capacity(sorted.gates().len());
        for (i, g) in sorted.gates().iter().enumerate() {
            let mut ins = [0u32; 3];
            for (slot, net) in ins.iter_mut().zip(&g.ins) {
                *slot = *ids.get(net.as_str()).ok_or_else(|| NetlistError::UndefinedNet {
                    net: net.clone(),
                    line: 0,
                })?;
            }
            ids.insert(&g.out, base + i as u32);
            ops.push(SimOp { truth: g.truth, ins });
        }
        // Assigns may chain through each other; resolve to a fixpoint.
        let mut pending: Vec<&(String, String)> = sorted.assigns().iter().collect();
        while !pending.is_empty() {
            let before = pending.len();
            pending.retain(|(port, src)| match ids.get(src.as_str()).copied() {
                Some(id) => {
                    ids.insert(port, id);
                    false
                }
                None => true,
            });
            if pending.len() == before {
                return Err(NetlistError::Cycle(pending[0].0.clone()));
            }
        }
        let out_nets = sorted
            .outputs()
            .iter()
            .map(|o| ids.get(o.as_str()).copied().ok_or_else(|| NetlistError::UndrivenOutput(o.clone())))
            .collect::<Result<_, _>>()?;
        Ok(Simulator {
            inputs: sorted.inputs().to_vec(),
            outputs: sorted.outputs().to_vec(),
            ops,
            out_nets,
        })
    }

    pub fn inputs(&self) -> &[String] {
        &self.inputs
    }

    pub fn outputs(&self) -> &[String] {
        &self.outputs
    }

    pub fn gate_count(&self) -> usize {
        self.ops.len()
    }

    /// Evaluates 64 lanes: `inputs[i]` is the word for input `i`.
    pub fn eval_word(&self, inputs: &[u64], outputs: &mut [u64], scratch: &mut Vec<u64>) {
        debug_assert_eq!(inputs.len(), self.inputs.len());
        scratch.clear();
        scratch.push(0);
        scratch.push(!0);
        scratch.extend_from_slice(inputs);
        for op in &self.ops {
            let v = logic::eval_word(
                op.truth,
                scratch[op.ins[0] as usize],
                scratch[op.ins[1] as usize],
                scratch[op.ins[2] as usize],
            );
            scratch.push(v);
        }
        for (o, &net) in outputs.iter_mut().zip(&self.out_nets) {
            *o = scratch[net as usize];
        }
    }

    /// Multi-word simulation: every input holds `words` u64s.
    pub fn eval_words(&self, inputs: &[&[u64]], words: usize) -> Vec<Vec<u64>> {
        let mut out = vec![vec![0u64; words]; self.outputs.len()];
        let mut scratch = Vec::new();
        let mut in_word = vec![0u64; self.inputs.len()];
        let mut out_word = vec![0u64; self.outputs.len()];
        for w in 0..words {
            for (slot, src) in in_word.iter_mut().zip(inputs) {
                *slot = src[w];
            }
            self.eval_word(&in_word, &mut out_word, &mut scratch);
            for (dst, v) in out.iter_mut().zip(&out_word) {
                dst[w] = *v;
            }
        }
        out
    }

    pub fn simulate_named(
        &self,
        assignment: &HashMap<String, Vec<u64>>,
    ) -> Result<Vec<(String, Vec<u64>)>, NetlistError> {
        let mut words = None;
        let mut cols = Vec::with_capacity(self.inputs.len());
        for name in &self.inputs {
            let w = assignment.get(name).ok_or_else(|| NetlistError::MissingInput(name.clone()))?;
            match words {
                None => words = Some(w.len()),
                Some(n) if n != w.len() => return Err(NetlistError::WidthMismatch),
                _ => {}
            }
            cols.push(w.as_slice());
        }
        let out = self.eval_words(&cols, words.unwrap_or(1));
        Ok(self.outputs.iter().cloned().zip(out).collect())
    }
}
