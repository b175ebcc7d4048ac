use std::collections::HashMap;

use crate::logic;
use crate::netlist::{Gate, Netlist, NetlistError, CONST0, CONST1};

/// A signal inside a [`Builder`]: a constant, an input or a gate output.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Sig(u32);

impl Sig {
    pub const ZERO: Sig = Sig(0);
    pub const ONE: Sig = Sig(1);

    pub fn constant(v: bool) -> Sig {
        if v {
            Sig::ONE
        } else {
            Sig::ZERO
        }
    }

    pub fn is_const(self) -> bool {
        self.0 < 2
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
enum Op {
    And,
    Or,
    Xor,
    Not,
}

impl Op {
    fn cell(self) -> (&'static str, u8) {
        match self {
            Op::And => ("AND", logic::AND),
            Op::Or => ("OR", logic::OR),
            Op::Xor => ("XOR", logic::XOR),
            Op::Not => ("NOT", logic::NOT),
        }
    }
}

#[derive(Clone, Copy, Debug)]
enum Node {
    Input(usize),
    Gate(Op, Sig, Sig),
}

/// Netlist construction over generic 2-input gates with constant folding and
/// structural hashing, so datapaths written against constant operands shrink
/// as they are built.
#[derive(Clone, Debug)]
pub struct Builder {
    name: String,
    inputs: Vec<String>,
    nodes: Vec<Node>,
    hash: HashMap<(Op, Sig, Sig), Sig>,
    complement: HashMap<Sig, Sig>,
    outputs: Vec<(String, Sig)>,
}

impl Builder {
    pub fn new(name: impl Into<String>) -> Builder {
        Builder {
            name: name.into(),
            inputs: Vec::new(),
            nodes: Vec::new(),
            hash: HashMap::new(),
            complement: HashMap::new(),
            outputs: Vec::new(),
        }
    }

    fn push(&mut self, node: Node) -> Sig {
        let s = Sig(2 + self.nodes.len() as u32);
        self.nodes.push(node);
        s
    }

    pub fn input(&mut self, name: impl Into<String>) -> Sig {
        self.inputs.push(name.into());
        self.push(Node::Input(self.inputs.len() - 1))
    }

    /// Inputs `name[0]` .. `name[width-1]`, LSB first.
    pub fn input_bus(&mut self, name: &str, width: usize) -> Vec<Sig> {
        (0..width).map(|i| self.input(format!("{name}[{i}]"))).collect()
    }

    pub fn output(&mut self, name: impl Into<String>, s: Sig) {
        self.outputs.push((name.into(), s));
    }

    pub fn output_bus(&mut self, name: &str, bits: &[Sig]) {
        for (i, &s) in bits.iter().enumerate() {
            self.output(format!("{name}[{i}]"), s);
        }
    }

    fn is_not_of(&self, x: Sig, y: Sig) -> bool {
        self.complement.get(&x) == Some(&y)
    }

    fn gate(&mut self, op: Op, a: Sig, b: Sig) -> Sig {
        let (a, b) = if op != Op::Not && b < a { (b, a) } else { (a, b) };
        if let Some(&s) = self.hash.get(&(op, a, b)) {
            return s;
        }
        let s = self.push(Node::Gate(op, a, b));
        self.hash.insert((op, a, b), s);
        s
    }

    pub fn not(&mut self, a: Sig) -> Sig {
        match a {
            Sig::ZERO => Sig::ONE,
            Sig::ONE => Sig::ZERO,
            _ => {
                if let Some(&n) = self.complement.get(&a) {
                    return n;
                }
                let n = self.gate(Op::Not, a, Sig::ZERO);
                self.complement.insert(a, n);
                self.complement.insert(n, a);
                n
            }
        }
    }

    pub fn and(&mut self, a: Sig, b: Sig) -> Sig {
        match (a, b) {
            (Sig::ZERO, _) | (_, Sig::ZERO) => Sig::ZERO,
            (Sig::ONE, x) | (x, Sig::ONE) => x,
            _ if a == b => a,
            _ if self.is_not_of(a, b) => Sig::ZERO,
            _ => self.gate(Op::And, a, b),
        }
    }

    pub fn or(&mut self, a: Sig, b: Sig) -> Sig {
        match (a, b) {
            (Sig::ONE, _) | (_, Sig::ONE) => Sig::ONE,
            (Sig::ZERO, x) | (x, Sig::ZERO) => x,
            _ if a == b => a,
            _ if self.is_not_of(a, b) => Sig::ONE,
            _ => self.gate(Op::Or, a, b),
        }
    }

    pub fn xor(&mut self, a: Sig, b: Sig) -> Sig {
        match (a, b) {
            (Sig::ZERO, x) | (x, Sig::ZERO) => x,
            (Sig::ONE, x) | (x, Sig::ONE) => self.not(x),
            _ if a == b => Sig::ZERO,
            _ if self.is_not_of(a, b) => Sig::ONE,
            _ => self.gate(Op::Xor, a, b),
        }
    }

    pub fn xnor(&mut self, a: Sig, b: Sig) -> Sig {
        let x = self.xor(a, b);
        self.not(x)
    }

    /// `s ? t : e`
    pub fn mux(&mut self, s: Sig, t: Sig, e: Sig) -> Sig {
        match (s, t, e) {
            (Sig::ONE, _, _) => t,
            (Sig::ZERO, _, _) => e,
            _ if t == e => t,
            (_, Sig::ONE, Sig::ZERO) => s,
            (_, Sig::ZERO, Sig::ONE) => self.not(s),
            (_, Sig::ZERO, _) => {
                let ns = self.not(s);
                self.and(ns, e)
            }
            (_, _, Sig::ZERO) => self.and(s, t),
            (_, Sig::ONE, _) => self.or(s, e),
            (_, _, Sig::ONE) => {
                let ns = self.not(s);
                self.or(ns, t)
            }
            _ => {
                let d = self.xor(t, e);
                let m = self.and(s, d);
                self.xor(e, m)
            }
        }
    }

    pub fn and_many(&mut self, xs: &[Sig]) -> Sig {
        xs.iter().fold(Sig::ONE, |acc, &x| self.and(acc, x))
    }

    pub fn or_many(&mut self, xs: &[Sig]) -> Sig {
        xs.iter().fold(Sig::ZERO, |acc, &x| self.or(acc, x))
    }

    pub fn gate_count(&self) -> usize {
        self.nodes.iter().filter(|n| matches!(n, Node::Gate(..))).count()
    }

    /// Emits the netlist, dropping gates that no output depends on.
    pub fn finish(self) -> Result<Netlist, NetlistError> {
        let base = 2usize;
        let mut live = vec![false; self.nodes.len()];
        let mut stack: Vec<usize> = self
            .outputs
            .iter()
            .filter(|(_, s)| !s.is_const())
            .map(|(_, s)| s.0 as usize - base)
            .collect();
        while let Some(i) = stack.pop() {
            if live[i] {
                continue;
            }
            live[i] = true;
            if let Node::Gate(op, a, b) = self.nodes[i] {
                let k = if op == Op::Not { 1 } else { 2 };
                for s in [a, b].into_iter().take(k) {
                    if !s.is_const() {
                        stack.push(s.0 as usize - base);
                    }
                }
            }
        }
        let mut claimed: HashMap<Sig, String> = HashMap::new();
        let mut assigns = Vec::new();
        for (name, s) in &self.outputs {
            let is_gate = !s.is_const() && matches!(self.nodes[s.0 as usize - base], Node::Gate(..));
            if is_gate && !claimed.contains_key(s) {
                claimed.insert(*s, name.clone());
            } else {
                assigns.push((name.clone(), *s));
            }
        }
        let mut count = 0usize;
        let mut names: Vec<String> = Vec::with_capacity(self.nodes.len());
        for (i, node) in self.nodes.iter().enumerate() {
            let s = Sig((i + base) as u32);
            names.push(match node {
                Node::Input(k) => self.inputs[*k].clone(),
                Node::Gate(..) => match claimed.get(&s) {
                    Some(n) => n.clone(),
                    None => {
                        count += 1;
                        format!("n{}", count - 1)
                    }
                },
            });
        }
        let name_of = |s: Sig| -> String {
            match s {
                Sig::ZERO => CONST0.to_string(),
                Sig::ONE => CONST1.to_string(),
                _ => names[s.0 as usize - base].clone(),
            }
        };
        let mut gates = Vec::new();
        for (i, node) in self.nodes.iter().enumerate() {
            if let (true, Node::Gate(op, a, b)) = (live[i], node) {
                let (cell, truth) = op.cell();
                let ins = if *op == Op::Not { vec![name_of(*a)] } else { vec![name_of(*a), name_of(*b)] };
                gates.push(Gate::new(cell, truth, names[i].clone(), ins));
            }
        }
        let outputs = self.outputs.iter().map(|(n, _)| n.clone()).collect();
        let assigns = assigns.into_iter().map(|(n, s)| (n, name_of(s))).collect();
        Netlist::new(self.name, self.inputs, outputs, gates, assigns)
    }
}

/// Ripple-carry `x + y + cin`, returning `(sum, carry)`. Operands of unequal
/// width are zero-extended.
pub fn add(b: &mut Builder, x: &[Sig], y: &[Sig], cin: Sig) -> (Vec<Sig>, Sig) {
    let w = x.len().max(y.len());
    let mut c = cin;
    let mut sum = Vec::with_capacity(w);
    for i in 0..w {
        let xi = x.get(i).copied().unwrap_or(Sig::ZERO);
        let yi = y.get(i).copied().unwrap_or(Sig::ZERO);
        let (s, co) = full_adder(b, xi, yi, c);
        sum.push(s);
        c = co;
    }
    (sum, c)
}

/// The 5-gate full adder.
pub fn full_adder(b: &mut Builder, x: Sig, y: Sig, c: Sig) -> (Sig, Sig) {
    let t = b.xor(x, y);
    let s = b.xor(t, c);
    let u = b.and(x, y);
    let v = b.and(t, c);
    (s, b.or(u, v))
}

/// `x + inc`, keeping the width; also returns the carry out.
pub fn increment(b: &mut Builder, x: &[Sig], inc: Sig) -> (Vec<Sig>, Sig) {
    let mut c = inc;
    let out = x
        .iter()
        .map(|&xi| {
            let s = b.xor(xi, c);
            c = b.and(xi, c);
            s
        })
        .collect();
    (out, c)
}

/// Set when `x < y` as unsigned numbers of equal width.
pub fn less_than(b: &mut Builder, x: &[Sig], y: &[Sig]) -> Sig {
    let mut lt = Sig::ZERO;
    for (&xi, &yi) in x.iter().zip(y) {
        // The higher bit decides unless equal, in which case the lower bits do.
        let d = b.xor(xi, yi);
        lt = b.mux(d, yi, lt);
    }
    lt
}

/// Returns `(s ? y : x, s ? x : y)` bitwise, sharing one XOR per bit.
pub fn cond_swap(b: &mut Builder, s: Sig, x: &[Sig], y: &[Sig]) -> (Vec<Sig>, Vec<Sig>) {
    let mut hi = Vec::with_capacity(x.len());
    let mut lo = Vec::with_capacity(x.len());
    for (&xi, &yi) in x.iter().zip(y) {
        let d = b.xor(xi, yi);
        let t = b.and(s, d);
        hi.push(b.xor(xi, t));
        lo.push(b.xor(yi, t));
    }
    (hi, lo)
}

/// Logical right shift by the unsigned amount `s` with the OR of all bits
/// shifted out. Amounts of `x.len()` or more clear the word.
pub fn shift_right_sticky(b: &mut Builder, x: &[Sig], s: &[Sig]) -> (Vec<Sig>, Sig) {
    let w = x.len();
    let mut cur = x.to_vec();
    let mut sticky = Sig::ZERO;
    for (k, &sk) in s.iter().enumerate() {
        let dist = 1usize.checked_shl(k as u32).unwrap_or(usize::MAX);
        let lost: Vec<Sig> = cur[..dist.min(w)].to_vec();
        let lost_any = b.or_many(&lost);
        let gone = b.and(sk, lost_any);
        sticky = b.or(sticky, gone);
        cur = (0..w)
            .map(|i| {
                let src = i.checked_add(dist).and_then(|j| cur.get(j).copied()).unwrap_or(Sig::ZERO);
                b.mux(sk, src, cur[i])
            })
            .collect();
    }
    (cur, sticky)
}

/// Logical left shift by the unsigned amount `s`.
pub fn shift_left(b: &mut Builder, x: &[Sig], s: &[Sig]) -> Vec<Sig> {
    let w = x.len();
    let mut cur = x.to_vec();
    for (k, &sk) in s.iter().enumerate() {
        let dist = 1usize.checked_shl(k as u32).unwrap_or(usize::MAX);
        cur = (0..w)
            .map(|i| {
                let src = i.checked_sub(dist).map_or(Sig::ZERO, |j| cur[j]);
                b.mux(sk, src, cur[i])
            })
            .collect();
    }
    cur
}

/// Bits needed to write the numbers `0..=n`.
pub fn bits_for(n: usize) -> usize {
    (usize::BITS - n.leading_zeros()).max(1) as usize
}

/// Leading-zero count of `x` (MSB is the last element), saturating at
/// `x.len()` for zero, as `bits_for(x.len())` bits LSB first.
pub fn leading_zeros(b: &mut Builder, x: &[Sig]) -> Vec<Sig> {
    let w = x.len();
    // Ones padded below the LSB stop the count at `w` for free whenever the
    // width is not a power of two.
    let p = w.next_power_of_two();
    let mut padded: Vec<Sig> = vec![Sig::ONE; p - w];
    padded.extend_from_slice(x);
    let (zero, count) = lzc_rec(b, &padded);
    if p > w {
        return count;
    }
    let nz = b.not(zero);
    let mut out: Vec<Sig> = count.iter().map(|&c| b.and(c, nz)).collect();
    out.push(zero);
    out
}

/// Returns `(x == 0, lzc(x))` for a power-of-two width; the count is only
/// meaningful when `x != 0` and has `log2(len)` bits.
fn lzc_rec(b: &mut Builder, x: &[Sig]) -> (Sig, Vec<Sig>) {
    if x.len() == 1 {
        return (b.not(x[0]), Vec::new());
    }
    let half = x.len() / 2;
    let (lo_zero, lo_cnt) = lzc_rec(b, &x[..half]);
    let (hi_zero, hi_cnt) = lzc_rec(b, &x[half..]);
    let mut cnt: Vec<Sig> = hi_cnt.iter().zip(&lo_cnt).map(|(&h, &l)| b.mux(hi_zero, l, h)).collect();
    cnt.push(hi_zero);
    (b.and(lo_zero, hi_zero), cnt)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn folding_and_hashing() {
        let mut b = Builder::new("t");
        let x = b.input("x");
        let y = b.input("y");
        assert_eq!(b.and(x, Sig::ONE), x);
        assert_eq!(b.or(x, Sig::ONE), Sig::ONE);
        let nx = b.not(x);
        assert_eq!(b.and(x, nx), Sig::ZERO);
        assert_eq!(b.not(nx), x);
        let p = b.and(x, y);
        assert_eq!(b.and(y, x), p);
        assert_eq!(b.xor(p, p), Sig::ZERO);
        assert_eq!(b.gate_count(), 2);
    }

    #[test]
    fn unused_gates_are_dropped() {
        let mut b = Builder::new("t");
        let x = b.input("x");
        let y = b.input("y");
        let _ = b.xor(x, y);
        let p = b.and(x, y);
        b.output("p", p);
        b.output("q", p);
        b.output("z", Sig::ZERO);
        let n = b.finish().unwrap();
        assert_eq!(n.gate_count(), 1);
        assert_eq!(n.assigns().len(), 2);
    }
}
