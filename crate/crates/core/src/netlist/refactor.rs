//! Cone refactoring: collapse a reconvergence-driven cut into a truth table,
//! resynthesize it as a factored sum of products, and keep the result when
//! it needs fewer nodes than the cone it frees.

use std::collections::HashMap;

use super::aig::{Aig, AigNode, Lit};
use super::truth::{factor, isop_limited, Factored, TruthTable};

const CUT_SIZES: [usize; 3] = [4, 8, 12];
const MAX_CUBES: usize = 96;

struct Work {
    fanins: Vec<Option<(Lit, Lit)>>,
    repr: Vec<Option<Lit>>,
    refs: Vec<u32>,
    dead: Vec<bool>,
    table: HashMap<(Lit, Lit), usize>,
    mark: Vec<u32>,
    stamp: u32,
}

impl Work {
    fn new(g: &Aig) -> Work {
        let n = g.nodes().len();
        let mut w = Work {
            fanins: Vec::with_capacity(n),
            repr: vec![None; n],
            refs: vec![0; n],
            dead: vec![false; n],
            table: HashMap::new(),
            mark: vec![0; n],
            stamp: 0,
        };
        for (i, node) in g.nodes().iter().enumerate() {
            match *node {
                AigNode::And(a, b) => {
                    w.fanins.push(Some((a, b)));
                    w.refs[a.node()] += 1;
                    w.refs[b.node()] += 1;
                    w.table.insert((a, b), i);
                }
                _ => w.fanins.push(None),
            }
        }
        for (_, l) in g.outputs() {
            w.refs[l.node()] += 1;
        }
        w
    }

    fn resolve(&self, mut l: Lit) -> Lit {
        while let Some(r) = self.repr[l.node()] {
            l = r.xor_if(l.is_complemented());
        }
        l
    }

    fn live_fanins(&self, id: usize) -> Option<(Lit, Lit)> {
        self.fanins[id].map(|(a, b)| (self.resolve(a), self.resolve(b)))
    }

    fn is_and(&self, id: usize) -> bool {
        self.fanins[id].is_some()
    }

    fn next_stamp(&mut self) -> u32 {
        self.stamp += 1;
        self.stamp
    }

    fn lookup(&self, a: Lit, b: Lit) -> Option<usize> {
        let key = if a < b { (a, b) } else { (b, a) };
        let id = *self.table.get(&key)?;
        if self.dead[id] || self.repr[id].is_some() {
            return None;
        }
        let (x, y) = self.live_fanins(id)?;
        let cur = if x < y { (x, y) } else { (y, x) };
        (cur == key).then_some(id)
    }

    fn and(&mut self, a: Lit, b: Lit) -> Lit {
        let (a, b) = if a < b { (a, b) } else { (b, a) };
        if a == Lit::FALSE || a == !b {
            return Lit::FALSE;
        }
        if a == Lit::TRUE || a == b {
            return b;
        }
        if let Some(id) = self.lookup(a, b) {
            return Lit::new(id, false);
        }
        let id = self.fanins.len();
        self.fanins.push(Some((a, b)));
        self.repr.push(None);
        self.refs.push(0);
        self.dead.push(false);
        self.mark.push(0);
        self.refs[a.node()] += 1;
        self.refs[b.node()] += 1;
        self.table.insert((a, b), id);
        Lit::new(id, false)
    }

    /// Reconvergence-driven cut of at most `k` leaves.
    fn cut(&mut self, root: usize, k: usize) -> Vec<usize> {
        let s = self.next_stamp();
        self.mark[root] = s;
        let mut leaves: Vec<usize> = Vec::new();
        let (a, b) = self.live_fanins(root).expect("root is an AND");
        for l in [a, b] {
            let n = l.node();
            if n != 0 && self.mark[n] != s {
                self.mark[n] = s;
                leaves.push(n);
            }
        }
        loop {
            let mut best: Option<(i32, usize, usize)> = None;
            for (pos, &leaf) in leaves.iter().enumerate() {
                let Some((x, y)) = self.live_fanins(leaf) else { continue };
                let fresh = [x.node(), y.node()]
                    .iter()
                    .enumerate()
                    .filter(|&(i, &n)| n != 0 && self.mark[n] != s && !(i == 1 && n == x.node()))
                    .count() as i32;
                let cost = fresh - 1;
                let better = match best {
                    None => true,
                    Some((c, _, id)) => cost < c || (cost == c && leaf > id),
                };
                if better {
                    best = Some((cost, pos, leaf));
                }
            }
            let Some((cost, pos, leaf)) = best else { break };
            if leaves.len() as i32 + cost > k as i32 {
                break;
            }
            leaves.swap_remove(pos);
            let (x, y) = self.live_fanins(leaf).unwrap();
            for n in [x.node(), y.node()] {
                if n != 0 && self.mark[n] != s {
                    self.mark[n] = s;
                    leaves.push(n);
                }
            }
        }
        leaves.sort_unstable();
        leaves
    }

    /// Truth table of `root` over `leaves`.
    fn cone_function(&self, root: usize, leaves: &[usize]) -> TruthTable {
        let n = leaves.len();
        let mut val: HashMap<usize, TruthTable> = HashMap::new();
        val.insert(0, TruthTable::zero(n));
        for (i, &l) in leaves.iter().enumerate() {
            val.insert(l, TruthTable::var(n, i));
        }
        let mut stack = vec![root];
        while let Some(&id) = stack.last() {
            if val.contains_key(&id) {
                stack.pop();
                continue;
            }
            let (a, b) = self.live_fanins(id).expect("cut covers every path");
            let missing: Vec<usize> = [a.node(), b.node()].into_iter().filter(|n| !val.contains_key(n)).collect();
            if missing.is_empty() {
                let get = |l: Lit| {
                    let t = &val[&l.node()];
                    if l.is_complemented() {
                        !t
                    } else {
                        t.clone()
                    }
                };
                let t = &get(a) & &get(b);
                val.insert(id, t);
                stack.pop();
            } else {
                stack.extend(missing);
            }
        }
        val.remove(&root).unwrap()
    }

    fn deref(&mut self, id: usize, leaves: &[usize], freed: &mut Vec<usize>) {
        freed.push(id);
        let (a, b) = self.live_fanins(id).unwrap();
        for n in [a.node(), b.node()] {
            self.refs[n] -= 1;
            if self.refs[n] == 0 && self.is_and(n) && !leaves.contains(&n) {
                self.deref(n, leaves, freed);
            }
        }
    }

    fn reref(&mut self, id: usize, leaves: &[usize]) {
        let (a, b) = self.live_fanins(id).unwrap();
        for n in [a.node(), b.node()] {
            if self.refs[n] == 0 && self.is_and(n) && !leaves.contains(&n) {
                self.reref(n, leaves);
            }
            self.refs[n] += 1;
        }
    }

    /// Nodes that would be freed if `root` were removed, bounded by `leaves`.
    fn mffc(&mut self, root: usize, leaves: &[usize]) -> Vec<usize> {
        let mut freed = Vec::new();
        self.deref(root, leaves, &mut freed);
        self.reref(root, leaves);
        freed
    }

    /// Counts nodes that building `e` would add, treating nodes in the
    /// marked cone as new. Returns `None` for the literal once unknown.
    fn dry_count(&self, e: &Factored, leaves: &[Lit], s: u32, budget: usize) -> (usize, Option<Lit>) {
        match e {
            Factored::Const(v) => (0, Some(if *v { Lit::TRUE } else { Lit::FALSE })),
            Factored::Lit { var, neg } => (0, Some(leaves[*var].xor_if(*neg))),
            Factored::And(x, y) | Factored::Or(x, y) => {
                let inv = matches!(e, Factored::Or(..));
                let (cx, lx) = self.dry_count(x, leaves, s, budget);
                if cx > budget {
                    return (cx, None);
                }
                let (cy, ly) = self.dry_count(y, leaves, s, budget);
                let c = cx + cy;
                let (Some(a), Some(b)) = (lx.map(|l| l.xor_if(inv)), ly.map(|l| l.xor_if(inv))) else {
                    return (c + 1, None);
                };
                let folded = if a == Lit::FALSE || b == Lit::FALSE || a == !b {
                    Some(Lit::FALSE)
                } else if a == Lit::TRUE || a == b {
                    Some(b)
                } else if b == Lit::TRUE {
                    Some(a)
                } else {
                    None
                };
                if let Some(l) = folded {
                    return (c, Some(l.xor_if(inv)));
                }
                match self.lookup(a, b) {
                    Some(id) if self.mark[id] == s => (c + 1, Some(Lit::new(id, inv))),
                    Some(id) => (c, Some(Lit::new(id, inv))),
                    None => (c + 1, None),
                }
            }
        }
    }

    fn build(&mut self, e: &Factored, leaves: &[Lit]) -> Lit {
        match e {
            Factored::Const(v) => {
                if *v {
                    Lit::TRUE
                } else {
                    Lit::FALSE
                }
            }
            Factored::Lit { var, neg } => leaves[*var].xor_if(*neg),
            Factored::And(x, y) => {
                let a = self.build(x, leaves);
                let b = self.build(y, leaves);
                self.and(a, b)
            }
            Factored::Or(x, y) => {
                let a = self.build(x, leaves);
                let b = self.build(y, leaves);
                !self.and(!a, !b)
            }
        }
    }

    /// Tries every cut size on `root` and commits the best positive gain.
    fn refactor_node(&mut self, root: usize) -> bool {
        let mut best: Option<(usize, Vec<usize>, Factored, bool)> = None;
        let mut seen_cuts: Vec<Vec<usize>> = Vec::new();
        for k in CUT_SIZES {
            let leaves = self.cut(root, k);
            if leaves.len() < 2 || seen_cuts.contains(&leaves) {
                continue;
            }
            seen_cuts.push(leaves.clone());
            let cone = self.mffc(root, &leaves);
            if cone.len() < 2 {
                continue;
            }
            let f = self.cone_function(root, &leaves);
            let s = self.next_stamp();
            for &id in &cone {
                self.mark[id] = s;
            }
            let leaf_lits: Vec<Lit> = leaves.iter().map(|&l| Lit::new(l, false)).collect();
            for compl in [false, true] {
                let target = if compl { !&f } else { f.clone() };
                let Some(cover) = isop_limited(&target, MAX_CUBES) else { continue };
                let expr = factor(&cover);
                let (cost, _) = self.dry_count(&expr, &leaf_lits, s, cone.len());
                if cost >= cone.len() {
                    continue;
                }
                let gain = cone.len() - cost;
                if best.as_ref().is_none_or(|(g, ..)| gain > *g) {
                    if expr.eval(leaves.len()) != target {
                        debug_assert!(false, "resynthesized cone differs");
                        continue;
                    }
                    best = Some((gain, leaves.clone(), expr, compl));
                }
            }
        }
        let Some((_, leaves, expr, compl)) = best else { return false };
        let mut freed = Vec::new();
        self.deref(root, &leaves, &mut freed);
        for &id in &freed {
            self.dead[id] = true;
        }
        let leaf_lits: Vec<Lit> = leaves.iter().map(|&l| Lit::new(l, false)).collect();
        let new = self.build(&expr, &leaf_lits).xor_if(compl);
        let new = self.resolve(new);
        self.refs[new.node()] += self.refs[root];
        self.refs[root] = 0;
        self.repr[root] = Some(new);
        true
    }

    fn rebuild(&self, g: &Aig) -> Aig {
        let mut out = Aig::new(g.name());
        let mut map: HashMap<usize, Lit> = HashMap::new();
        map.insert(0, Lit::FALSE);
        for (name, id) in g.input_nodes() {
            map.insert(id, out.add_input(name));
        }
        for (name, lit) in g.outputs() {
            let root = self.resolve(*lit);
            let mut stack = vec![root.node()];
            while let Some(&id) = stack.last() {
                if map.contains_key(&id) {
                    stack.pop();
                    continue;
                }
                let (a, b) = self.live_fanins(id).unwrap();
                let missing: Vec<usize> =
                    [a.node(), b.node()].into_iter().filter(|n| !map.contains_key(n)).collect();
                if missing.is_empty() {
                    let la = map[&a.node()].xor_if(a.is_complemented());
                    let lb = map[&b.node()].xor_if(b.is_complemented());
                    let l = out.and(la, lb);
                    map.insert(id, l);
                    stack.pop();
                } else {
                    stack.extend(missing);
                }
            }
            let l = map[&root.node()].xor_if(root.is_complemented());
            out.add_output(name.clone(), l);
        }
        out.cleanup()
    }
}

/// Runs up to `passes` refactoring passes. The result is never larger than
/// the input (after dead-node removal).
pub fn refactor(g: &Aig, passes: usize) -> Aig {
    let mut cur = g.cleanup();
    for _ in 0..passes {
        let mut w = Work::new(&cur);
        let original = w.fanins.len();
        let mut changed = false;
        for id in 1..original {
            if w.is_and(id) && !w.dead[id] && w.repr[id].is_none() && w.refs[id] > 0 {
                changed |= w.refactor_node(id);
            }
        }
        if !changed {
            break;
        }
        let next = w.rebuild(&cur);
        if next.and_count() >= cur.and_count() {
            break;
        }
        cur = next;
    }
    cur
}

#[cfg(test)]
mod tests {
    use super::super::equiv::{check_equiv, EquivOptions};
    use super::*;

    #[test]
    fn shared_subterm_is_found() {
        // (a & b) | (a & c) with the a-terms built separately: 3 nodes.
        let mut g = Aig::new("t");
        let a = g.add_input("a");
        let b = g.add_input("b");
        let c = g.add_input("c");
        let ab = g.and(a, b);
        let ac = g.and(a, c);
        let y = g.or(ab, ac);
        g.add_output("y", y);
        assert_eq!(g.and_count(), 3);
        let r = refactor(&g, 2);
        assert_eq!(r.and_count(), 2);
        assert!(check_equiv(&g, &r, &EquivOptions::default()).unwrap().is_equivalent());
    }

    #[test]
    fn single_and_is_fixpoint() {
        let mut g = Aig::new("t");
        let a = g.add_input("a");
        let b = g.add_input("b");
        let y = g.and(a, b);
        g.add_output("y", y);
        let r = refactor(&g, 3);
        assert_eq!(r.and_count(), 1);
        assert_eq!(r.outputs(), g.outputs());
    }

    #[test]
    fn redundant_cone_shrinks() {
        // ab + a~b + c == a + c
        let mut g = Aig::new("t");
        let a = g.add_input("a");
        let b = g.add_input("b");
        let c = g.add_input("c");
        let p = g.and(a, b);
        let q = g.and(a, !b);
        let pq = g.or(p, q);
        let y = g.or(pq, c);
        g.add_output("y", y);
        let r = refactor(&g, 2);
        assert_eq!(r.and_count(), 1);
        assert!(check_equiv(&g, &r, &EquivOptions::default()).unwrap().is_equivalent());
    }
}
