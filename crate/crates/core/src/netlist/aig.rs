use std::collections::HashMap;
use std::fmt;
use std::ops::Not;

use super::equiv::BitCircuit;
use super::{is_const_net, topo_sort, Netlist, NetlistError, CONST1};
use crate::logic;

/// Edge into node `index >> 1`, complemented when the low bit is set.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Lit(u32);

impl Lit {
    pub const FALSE: Lit = Lit(0);
    pub const TRUE: Lit = Lit(1);

    pub fn new(node: usize, complemented: bool) -> Lit {
        Lit(((node as u32) << 1) | complemented as u32)
    }

    pub fn node(self) -> usize {
        (self.0 >> 1) as usize
    }

    pub fn is_complemented(self) -> bool {
        self.0 & 1 == 1
    }

    pub fn is_const(self) -> bool {
        self.node() == 0
    }

    pub fn regular(self) -> Lit {
        Lit(self.0 & !1)
    }

    pub fn xor_if(self, c: bool) -> Lit {
        Lit(self.0 ^ c as u32)
    }

    pub fn raw(self) -> u32 {
        self.0
    }
}

impl Not for Lit {
    type Output = Lit;
    fn not(self) -> Lit {
        Lit(self.0 ^ 1)
    }
}

impl fmt::Debug for Lit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}{}", if self.is_complemented() { "!" } else { "" }, self.node())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum AigNode {
    Const,
    Input(usize),
    And(Lit, Lit),
}

/// And-inverter graph. Node 0 is constant false. Nodes are created in
/// topological order and structurally hashed.
#[derive(Clone, Debug)]
pub struct Aig {
    name: String,
    nodes: Vec<AigNode>,
    inputs: Vec<(String, usize)>,
    outputs: Vec<(String, Lit)>,
    table: HashMap<(Lit, Lit), usize>,
}

impl Aig {
    pub fn new(name: impl Into<String>) -> Aig {
        Aig {
            name: name.into(),
            nodes: vec![AigNode::Const],
            inputs: Vec::new(),
            outputs: Vec::new(),
            table: HashMap::new(),
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn add_input(&mut self, name: impl Into<String>) -> Lit {
        let id = self.nodes.len();
        self.nodes.push(AigNode::Input(self.inputs.len()));
        self.inputs.push((name.into(), id));
        Lit::new(id, false)
    }

    pub fn add_output(&mut self, name: impl Into<String>, lit: Lit) {
        self.outputs.push((name.into(), lit));
    }

    pub fn node(&self, id: usize) -> AigNode {
        self.nodes[id]
    }

    pub fn nodes(&self) -> &[AigNode] {
        &self.nodes
    }

    pub fn input_nodes(&self) -> impl Iterator<Item = (&str, usize)> {
        self.inputs.iter().map(|(n, id)| (n.as_str(), *id))
    }

    pub fn outputs(&self) -> &[(String, Lit)] {
        &self.outputs
    }

    pub fn input_count(&self) -> usize {
        self.inputs.len()
    }

    /// Total AND nodes, reachable or not. Call [`Aig::cleanup`] first for a
    /// count of live logic.
    pub fn and_count(&self) -> usize {
        self.nodes.iter().filter(|n| matches!(n, AigNode::And(..))).count()
    }

    pub fn fanins(&self, id: usize) -> Option<(Lit, Lit)> {
        match self.nodes[id] {
            AigNode::And(a, b) => Some((a, b)),
            _ => None,
        }
    }

    fn and_parts(&self, l: Lit) -> Option<(Lit, Lit)> {
        self.fanins(l.node())
    }

    /// Looks up an existing node without creating one.
    pub fn lookup(&self, a: Lit, b: Lit) -> Option<usize> {
        let key = if a < b { (a, b) } else { (b, a) };
        self.table.get(&key).copied()
    }

    pub fn and(&mut self, a: Lit, b: Lit) -> Lit {
        let (a, b) = if a < b { (a, b) } else { (b, a) };
        if a == Lit::FALSE || a == !b {
            return Lit::FALSE;
        }
        if a == Lit::TRUE || a == b {
            return b;
        }
        if let Some(l) = self.two_level(a, b).or_else(|| self.two_level(b, a)) {
            return l;
        }
        if let Some(&id) = self.table.get(&(a, b)) {
            return Lit::new(id, false);
        }
        let id = self.nodes.len();
        self.nodes.push(AigNode::And(a, b));
        self.table.insert((a, b), id);
        Lit::new(id, false)
    }

    /// Simplifications looking one level into `x`.
    fn two_level(&mut self, x: Lit, y: Lit) -> Option<Lit> {
        let (x0, x1) = self.and_parts(x)?;
        if !x.is_complemented() {
            if y == x0 || y == x1 {
                return Some(x);
            }
            if y == !x0 || y == !x1 {
                return Some(Lit::FALSE);
            }
            if let (Some((y0, y1)), false) = (self.and_parts(y), y.is_complemented()) {
                if [y0, y1].iter().any(|&v| v == !x0 || v == !x1) {
                    return Some(Lit::FALSE);
                }
                if y0 == x0 || y0 == x1 {
                    return Some(self.and(x, y1));
                }
                if y1 == x0 || y1 == x1 {
                    return Some(self.and(x, y0));
                }
            }
        } else {
            if y == !x0 || y == !x1 {
                return Some(y);
            }
            if y == x0 {
                return Some(self.and(x0, !x1));
            }
            if y == x1 {
                return Some(self.and(x1, !x0));
            }
        }
        None
    }

    pub fn or(&mut self, a: Lit, b: Lit) -> Lit {
        !self.and(!a, !b)
    }

    pub fn xor(&mut self, a: Lit, b: Lit) -> Lit {
        let p = self.and(a, !b);
        let q = self.and(!a, b);
        self.or(p, q)
    }

    pub fn mux(&mut self, s: Lit, t: Lit, e: Lit) -> Lit {
        let p = self.and(s, t);
        let q = self.and(!s, e);
        self.or(p, q)
    }

    /// Builds a 3-input truth table (see [`crate::logic`]) over `x`.
    pub fn lut3(&mut self, truth: u8, x: [Lit; 3]) -> Lit {
        match truth {
            logic::FALSE => return Lit::FALSE,
            logic::TRUE => return Lit::TRUE,
            _ => {}
        }
        let vars: Vec<usize> = (0..3).filter(|&v| logic::depends_on(truth, v)).collect();
        if let [v] = vars[..] {
            return x[v].xor_if(truth != logic::VARS[v]);
        }
        let v = vars.iter().copied().min_by_key(|&v| split_cost(truth, v)).unwrap();
        let f1 = cofactor3(truth, v, true);
        let f0 = cofactor3(truth, v, false);
        let s = x[v];
        if f0 == logic::FALSE {
            let r = self.lut3(f1, x);
            self.and(s, r)
        } else if f1 == logic::FALSE {
            let r = self.lut3(f0, x);
            self.and(!s, r)
        } else if f0 == logic::TRUE {
            let r = self.lut3(f1, x);
            !self.and(s, !r)
        } else if f1 == logic::TRUE {
            let r = self.lut3(f0, x);
            !self.and(!s, !r)
        } else if f1 == !f0 {
            let r = self.lut3(f0, x);
            self.xor(s, r)
        } else {
            let t = self.lut3(f1, x);
            let e = self.lut3(f0, x);
            self.mux(s, t, e)
        }
    }

    /// Copy containing only logic reachable from the outputs, renumbered in
    /// depth-first order and rehashed.
    pub fn cleanup(&self) -> Aig {
        let mut out = Aig::new(self.name.clone());
        let mut map: Vec<Option<Lit>> = vec![None; self.nodes.len()];
        map[0] = Some(Lit::FALSE);
        for (name, id) in &self.inputs {
            map[*id] = Some(out.add_input(name.clone()));
        }
        for (name, lit) in &self.outputs {
            let l = self.copy_into(&mut out, &mut map, *lit);
            out.add_output(name.clone(), l);
        }
        out
    }

    pub(crate) fn copy_into(&self, dst: &mut Aig, map: &mut [Option<Lit>], root: Lit) -> Lit {
        let mut stack = vec![root.node()];
        while let Some(&id) = stack.last() {
            if map[id].is_some() {
                stack.pop();
                continue;
            }
            let (a, b) = self.fanins(id).expect("inputs are premapped");
            let pending: Vec<usize> = [a, b].iter().map(|l| l.node()).filter(|&n| map[n].is_none()).collect();
            if pending.is_empty() {
                let la = map[a.node()].unwrap().xor_if(a.is_complemented());
                let lb = map[b.node()].unwrap().xor_if(b.is_complemented());
                map[id] = Some(dst.and(la, lb));
                stack.pop();
            } else {
                stack.extend(pending);
            }
        }
        map[root.node()].unwrap().xor_if(root.is_complemented())
    }

    /// Logic depth in AND nodes.
    pub fn depth(&self) -> usize {
        let mut lv = vec![0usize; self.nodes.len()];
        for (i, n) in self.nodes.iter().enumerate() {
            if let AigNode::And(a, b) = n {
                lv[i] = 1 + lv[a.node()].max(lv[b.node()]);
            }
        }
        self.outputs.iter().map(|(_, l)| lv[l.node()]).max().unwrap_or(0)
    }

    fn eval_word(&self, inputs: &[u64], vals: &mut Vec<u64>) {
        vals.clear();
        vals.resize(self.nodes.len(), 0);
        for (k, (_, id)) in self.inputs.iter().enumerate() {
            vals[*id] = inputs[k];
        }
        let get = |vals: &[u64], l: Lit| vals[l.node()] ^ 0u64.wrapping_sub(l.is_complemented() as u64);
        for i in 0..self.nodes.len() {
            if let AigNode::And(a, b) = self.nodes[i] {
                vals[i] = get(vals, a) & get(vals, b);
            }
        }
    }
}

/// Cofactor of a 3-input table with respect to variable `v`, replicated so
/// the result no longer depends on `v`.
pub(crate) fn cofactor3(t: u8, v: usize, value: bool) -> u8 {
    let m = logic::VARS[v];
    let s = 4 >> v;
    if value {
        let c = t & m;
        c | (c >> s)
    } else {
        let c = t & !m;
        c | (c << s)
    }
}

fn lut_cost(t: u8) -> usize {
    let vars: Vec<usize> = (0..3).filter(|&v| logic::depends_on(t, v)).collect();
    if vars.len() <= 1 {
        return 0;
    }
    vars.iter().map(|&v| split_cost(t, v)).min().unwrap()
}

fn split_cost(t: u8, v: usize) -> usize {
    let f1 = cofactor3(t, v, true);
    let f0 = cofactor3(t, v, false);
    let konst = |f: u8| f == logic::FALSE || f == logic::TRUE;
    if konst(f0) {
        1 + lut_cost(f1)
    } else if konst(f1) {
        1 + lut_cost(f0)
    } else if f1 == !f0 {
        3 + lut_cost(f0)
    } else {
        3 + lut_cost(f0) + lut_cost(f1)
    }
}

impl BitCircuit for Aig {
    fn input_names(&self) -> Vec<String> {
        self.inputs.iter().map(|(n, _)| n.clone()).collect()
    }

    fn output_names(&self) -> Vec<String> {
        self.outputs.iter().map(|(n, _)| n.clone()).collect()
    }

    fn eval_block(&self, inputs: &[Vec<u64>], words: usize) -> Vec<Vec<u64>> {
        let mut out = vec![vec![0u64; words]; self.outputs.len()];
        let mut vals = Vec::new();
        let mut in_word = vec![0u64; self.inputs.len()];
        for w in 0..words {
            for (slot, src) in in_word.iter_mut().zip(inputs) {
                *slot = src[w];
            }
            self.eval_word(&in_word, &mut vals);
            for (dst, (_, l)) in out.iter_mut().zip(&self.outputs) {
                dst[w] = vals[l.node()] ^ 0u64.wrapping_sub(l.is_complemented() as u64);
            }
        }
        out
    }
}

/// Converts a netlist into a structurally hashed AIG, decomposing every
/// cell through its truth table and folding constants.
pub fn strash(n: &Netlist) -> Result<Aig, NetlistError> {
    let sorted = topo_sort(n)?;
    let mut g = Aig::new(sorted.name());
    let mut nets: HashMap<&str, Lit> = HashMap::new();
    nets.insert(super::CONST0, Lit::FALSE);
    nets.insert(CONST1, Lit::TRUE);
    for name in sorted.inputs() {
        let l = g.add_input(name.clone());
        nets.insert(name, l);
    }
    for gate in sorted.gates() {
        let mut x = [Lit::FALSE; 3];
        for (slot, net) in x.iter_mut().zip(&gate.ins) {
            *slot = *nets.get(net.as_str()).ok_or_else(|| NetlistError::UndefinedNet {
                net: net.clone(),
                line: 0,
            })?;
        }
        let l = g.lut3(gate.truth, x);
        nets.insert(&gate.out, l);
    }
    let mut pending: Vec<&(String, String)> = sorted.assigns().iter().collect();
    while !pending.is_empty() {
        let before = pending.len();
        pending.retain(|(port, src)| match nets.get(src.as_str()).copied() {
            Some(l) => {
                nets.insert(port, l);
                false
            }
            None => true,
        });
        if pending.len() == before {
            return Err(NetlistError::Cycle(pending[0].0.clone()));
        }
    }
    for o in sorted.outputs() {
        debug_assert!(!is_const_net(o));
        let l = *nets.get(o.as_str()).ok_or_else(|| NetlistError::UndrivenOutput(o.clone()))?;
        g.add_output(o.clone(), l);
    }
    Ok(g.cleanup())
}
