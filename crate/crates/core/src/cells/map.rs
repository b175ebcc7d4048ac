use std::collections::{BTreeMap, HashMap, HashSet};
use std::fmt;

use thiserror::Error;

use super::synth::SynthesisTable;
use super::CellLibrary;
use crate::logic;
use crate::netlist::{Aig, AigNode, Gate, Netlist, NetlistError, CONST0, CONST1};

#[derive(Debug, Error)]
pub enum MapError {
    #[error("library `{0}` cannot realize function {1:#04x}")]
    Unmappable(String, u8),
    #[error(transparent)]
    Netlist(#[from] NetlistError),
}

const MAX_CUTS: usize = 24;
const EPS: f64 = 1e-9;
/// Reference-estimate blends tried; the smallest instantiated cover wins.
const RECOVERY_ROUNDS: usize = 3;
const EXACT_PASSES: usize = 2;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
struct Cut {
    leaves: [u32; 3],
    n: u8,
    truth: u8,
}

impl Cut {
    fn leaves(&self) -> &[u32] {
        &self.leaves[..self.n as usize]
    }
}

/// Re-expresses `truth` over `from` as a function over the superset `to`.
fn stretch(truth: u8, from: &[u32], to: &[u32]) -> u8 {
    let pos: Vec<usize> = from.iter().map(|l| to.iter().position(|t| t == l).unwrap()).collect();
    let mut out = 0u8;
    for m in 0..8u8 {
        let mut idx = 0u8;
        for (i, &p) in pos.iter().enumerate() {
            let bit = (m >> (2 - p)) & 1;
            idx |= bit << (2 - i);
        }
        if (truth >> idx) & 1 == 1 {
            out |= 1 << m;
        }
    }
    out
}

fn enumerate_cuts(g: &Aig) -> Vec<Vec<Cut>> {
    let nodes = g.nodes();
    let mut cuts: Vec<Vec<Cut>> = Vec::with_capacity(nodes.len());
    for (id, node) in nodes.iter().enumerate() {
        let trivial = Cut { leaves: [id as u32, 0, 0], n: 1, truth: logic::VAR_A };
        let AigNode::And(fa, fb) = *node else {
            cuts.push(vec![trivial]);
            continue;
        };
        let mut found: Vec<Cut> = Vec::new();
        for ca in &cuts[fa.node()] {
            for cb in &cuts[fb.node()] {
                let mut merged: Vec<u32> = ca.leaves().iter().chain(cb.leaves()).copied().collect();
                merged.sort_unstable();
                merged.dedup();
                if merged.len() > 3 || merged.contains(&0) {
                    continue;
                }
                let mut ta = stretch(ca.truth, ca.leaves(), &merged);
                let mut tb = stretch(cb.truth, cb.leaves(), &merged);
                if fa.is_complemented() {
                    ta = !ta;
                }
                if fb.is_complemented() {
                    tb = !tb;
                }
                let mut leaves = [0u32; 3];
                leaves[..merged.len()].copy_from_slice(&merged);
                let cut = Cut { leaves, n: merged.len() as u8, truth: ta & tb };
                if !found.iter().any(|c| c.leaves() == cut.leaves()) {
                    found.push(cut);
                }
            }
        }
        let dominated = |c: &Cut| {
            found
                .iter()
                .any(|d| d.n < c.n && d.leaves().iter().all(|l| c.leaves().contains(l)))
        };
        let mut kept: Vec<Cut> = found.iter().filter(|c| !dominated(c)).copied().collect();
        kept.sort_by(|x, y| x.n.cmp(&y.n).then(x.leaves().cmp(y.leaves())));
        kept.truncate(MAX_CUTS - 1);
        let mut list = vec![trivial];
        list.extend(kept);
        cuts.push(list);
    }
    cuts
}

#[derive(Clone, Copy, Debug)]
enum Choice {
    Const,
    Input,
    /// Cut `cut` of the node realizing `func` over its leaves, taking leaf
    /// `i` in phase `phases >> i & 1`.
    Match { cut: usize, func: u8, phases: u8 },
    /// Inverter applied to the opposite phase of the same node.
    Invert,
}

#[derive(Clone, Copy, Debug)]
struct Best {
    area: f64,
    cells: f64,
    choice: Choice,
}

const UNSET: Best = Best {
    area: f64::INFINITY,
    cells: f64::INFINITY,
    choice: Choice::Const,
};

struct Mapper<'a> {
    g: &'a Aig,
    table: &'a SynthesisTable,
    cuts: Vec<Vec<Cut>>,
    inv_cost: f64,
}

impl Mapper<'_> {
    fn better(a: &Best, area: f64, cells: f64) -> bool {
        area < a.area - EPS || (area <= a.area + EPS && cells < a.cells - EPS)
    }

    fn cover(&self, est: &[f64]) -> Vec<[Best; 2]> {
        let mut best = vec![[UNSET; 2]; self.g.nodes().len()];
        for (id, node) in self.g.nodes().iter().enumerate() {
            match node {
                AigNode::Const => {
                    best[id] = [Best { area: 0.0, cells: 0.0, choice: Choice::Const }; 2];
                    continue;
                }
                AigNode::Input(_) => {
                    best[id][0] = Best { area: 0.0, cells: 0.0, choice: Choice::Input };
                }
                AigNode::And(..) => {
                    for (ci, cut) in self.cuts[id].iter().enumerate().skip(1) {
                        let k = cut.n as usize;
                        for p in 0..2 {
                            let target = if p == 1 { !cut.truth } else { cut.truth };
                            for q in 0..(1u8 << k) {
                                let mut f = target;
                                let mut area = 0.0;
                                for (i, &leaf) in cut.leaves().iter().enumerate() {
                                    let ph = ((q >> i) & 1) as usize;
                                    if ph == 1 {
                                        f = logic::flip_input(f, i);
                                    }
                                    area += best[leaf as usize][ph].area / est[leaf as usize];
                                }
                                let cells = self.table.cost(f);
                                let area = area + cells;
                                if Self::better(&best[id][p], area, cells) {
                                    best[id][p] = Best { area, cells, choice: Choice::Match { cut: ci, func: f, phases: q } };
                                }
                            }
                        }
                    }
                }
            }
            for p in 0..2 {
                let other = best[id][1 - p];
                if matches!(other.choice, Choice::Invert) {
                    continue;
                }
                let area = self.inv_cost + other.area;
                if Self::better(&best[id][p], area, self.inv_cost) {
                    best[id][p] = Best { area, cells: self.inv_cost, choice: Choice::Invert };
                }
            }
        }
        best
    }

    /// Node phases used by the cover reachable from the outputs, with
    /// per-node reference counts.
    fn select(&self, best: &[[Best; 2]]) -> (Vec<[bool; 2]>, Vec<f64>) {
        let n = self.g.nodes().len();
        let mut need = vec![[false; 2]; n];
        let mut refs = vec![0f64; n];
        for (_, l) in self.g.outputs() {
            need[l.node()][l.is_complemented() as usize] = true;
            refs[l.node()] += 1.0;
        }
        for id in (0..n).rev() {
            for _ in 0..2 {
                for p in 0..2 {
                    if !need[id][p] {
                        continue;
                    }
                    match best[id][p].choice {
                        Choice::Invert => {
                            if !need[id][1 - p] {
                                need[id][1 - p] = true;
                                refs[id] += 1.0;
                            }
                        }
                        Choice::Match { .. } | Choice::Const | Choice::Input => {}
                    }
                }
            }
            for p in 0..2 {
                if let (true, Choice::Match { cut, phases, .. }) = (need[id][p], best[id][p].choice) {
                    for (i, &leaf) in self.cuts[id][cut].leaves().iter().enumerate() {
                        need[leaf as usize][((phases >> i) & 1) as usize] = true;
                        refs[leaf as usize] += 1.0;
                    }
                }
            }
        }
        (need, refs)
    }
}

/// Reference counts per node phase for exact-area recovery.
struct Refs {
    count: Vec<[u32; 2]>,
}

impl Mapper<'_> {
    fn own_cost(&self, b: &Best) -> f64 {
        match b.choice {
            Choice::Const | Choice::Input => 0.0,
            Choice::Invert => self.inv_cost,
            Choice::Match { func, .. } => self.table.cost(func),
        }
    }

    fn children(&self, id: usize, p: usize, b: &Best) -> Vec<(usize, usize)> {
        match b.choice {
            Choice::Const | Choice::Input => Vec::new(),
            Choice::Invert => vec![(id, 1 - p)],
            Choice::Match { cut, phases, .. } => self.cuts[id][cut]
                .leaves()
                .iter()
                .enumerate()
                .map(|(i, &l)| (l as usize, ((phases >> i) & 1) as usize))
                .collect(),
        }
    }

    /// Adds references below `(id, p)` using choice `b`; returns the area of
    /// everything that became referenced.
    fn ref_choice(&self, best: &[[Best; 2]], refs: &mut Refs, id: usize, p: usize, b: &Best) -> f64 {
        let mut area = self.own_cost(b);
        for (l, q) in self.children(id, p, b) {
            refs.count[l][q] += 1;
            if refs.count[l][q] == 1 {
                area += self.ref_choice(best, refs, l, q, &best[l][q]);
            }
        }
        area
    }

    fn deref_choice(&self, best: &[[Best; 2]], refs: &mut Refs, id: usize, p: usize, b: &Best) -> f64 {
        let mut area = self.own_cost(b);
        for (l, q) in self.children(id, p, b) {
            refs.count[l][q] -= 1;
            if refs.count[l][q] == 0 {
                area += self.deref_choice(best, refs, l, q, &best[l][q]);
            }
        }
        area
    }

    fn candidates(&self, best: &[[Best; 2]], id: usize, p: usize) -> Vec<Best> {
        let mut out = Vec::new();
        if let AigNode::And(..) = self.g.node(id) {
            for (ci, cut) in self.cuts[id].iter().enumerate().skip(1) {
                let target = if p == 1 { !cut.truth } else { cut.truth };
                for q in 0..(1u8 << cut.n) {
                    let mut f = target;
                    for i in 0..cut.n as usize {
                        if (q >> i) & 1 == 1 {
                            f = logic::flip_input(f, i);
                        }
                    }
                    out.push(Best { area: 0.0, cells: self.table.cost(f), choice: Choice::Match { cut: ci, func: f, phases: q } });
                }
            }
        } else {
            out.push(best[id][p]);
        }
        if !matches!(best[id][1 - p].choice, Choice::Invert) && !matches!(self.g.node(id), AigNode::Const) {
            out.push(Best { area: 0.0, cells: self.inv_cost, choice: Choice::Invert });
        }
        out
    }

    /// Local exact-area improvement: each node phase in turn takes the match
    /// that adds the least area given everything else currently referenced.
    fn exact_area(&self, best: &mut [[Best; 2]], passes: usize) {
        let n = self.g.nodes().len();
        let (need, _) = self.select(best);
        let mut refs = Refs { count: vec![[0; 2]; n] };
        for (_, l) in self.g.outputs() {
            refs.count[l.node()][l.is_complemented() as usize] += 1;
        }
        for id in (0..n).rev() {
            for p in 0..2 {
                if need[id][p] {
                    for (l, q) in self.children(id, p, &best[id][p]) {
                        refs.count[l][q] += 1;
                    }
                }
            }
        }
        for _ in 0..passes {
            for id in 0..n {
                if !matches!(self.g.node(id), AigNode::And(..)) {
                    continue;
                }
                for p in 0..2 {
                    let live = refs.count[id][p] > 0;
                    if live {
                        let cur = best[id][p];
                        self.deref_choice(best, &mut refs, id, p, &cur);
                    }
                    let mut pick: Option<(f64, Best)> = None;
                    for c in self.candidates(best, id, p) {
                        let a = self.ref_choice(best, &mut refs, id, p, &c);
                        self.deref_choice(best, &mut refs, id, p, &c);
                        if pick.as_ref().is_none_or(|(pa, pb)| a < pa - EPS || (a <= pa + EPS && c.cells < pb.cells - EPS)) {
                            pick = Some((a, c));
                        }
                    }
                    let (a, mut c) = pick.expect("an AND node always has a cut");
                    c.area = a;
                    best[id][p] = c;
                    if live {
                        self.ref_choice(best, &mut refs, id, p, &c);
                    }
                }
            }
        }
    }
}

/// Permutation variants of each cell that compute the same function with
/// reordered inputs, used to merge commuted duplicates.
fn cell_variants(lib: &CellLibrary) -> Vec<Vec<([usize; 3], usize)>> {
    let cells = lib.cells();
    cells
        .iter()
        .map(|c| {
            let mut v = Vec::new();
            for perm in logic::PERMUTATIONS {
                if (c.arity()..3).any(|i| perm[i] != i) {
                    continue;
                }
                let t = logic::permute(c.truth(), perm);
                if let Some(j) = cells
                    .iter()
                    .position(|d| d.truth() == t && d.arity() == c.arity() && d.cost() == c.cost())
                {
                    v.push((perm, j));
                }
            }
            v
        })
        .collect()
}

const NO_NET: u32 = u32::MAX;

struct Builder<'a> {
    lib: &'a CellLibrary,
    table: &'a SynthesisTable,
    variants: &'a [Vec<([usize; 3], usize)>],
    cells: Vec<(usize, [u32; 3])>,
    hash: HashMap<(usize, [u32; 3]), u32>,
    first_gate_net: u32,
}

impl Builder<'_> {
    fn key(&self, cell: usize, ins: [u32; 3]) -> (usize, [u32; 3]) {
        let arity = self.lib.cells()[cell].arity();
        let mut best: Option<(usize, [u32; 3])> = None;
        for &(perm, target) in &self.variants[cell] {
            let mut m = [NO_NET; 3];
            for i in 0..arity {
                m[perm[i]] = ins[i];
            }
            let cand = (target, m);
            if best.is_none_or(|b| (cand.1, cand.0) < (b.1, b.0)) {
                best = Some(cand);
            }
        }
        best.unwrap_or_else(|| {
            let mut m = [NO_NET; 3];
            m[..arity].copy_from_slice(&ins[..arity]);
            (cell, m)
        })
    }

    fn lookup(&self, cell: usize, ins: [u32; 3]) -> Option<u32> {
        self.hash.get(&self.key(cell, ins)).copied()
    }

    fn add(&mut self, cell: usize, ins: [u32; 3]) -> u32 {
        let key = self.key(cell, ins);
        if let Some(&n) = self.hash.get(&key) {
            return n;
        }
        let net = self.first_gate_net + self.cells.len() as u32;
        self.cells.push(key);
        self.hash.insert(key, net);
        net
    }

    fn base(f: u8, leaves: &[u32; 3]) -> Option<u32> {
        match f {
            logic::FALSE => Some(0),
            logic::TRUE => Some(1),
            logic::VAR_A => Some(leaves[0]),
            logic::VAR_B => Some(leaves[1]),
            logic::VAR_C => Some(leaves[2]),
            _ => None,
        }
    }

    /// New cells needed to build `f`, and its net if it already exists.
    fn dry(&self, f: u8, leaves: &[u32; 3], memo: &mut HashMap<u8, (usize, Option<u32>)>) -> (usize, Option<u32>) {
        if let Some(n) = Self::base(f, leaves) {
            return (0, Some(n));
        }
        if let Some(&r) = memo.get(&f) {
            return r;
        }
        // Guards against revisiting `f` through its own realizations.
        memo.insert(f, (usize::MAX / 4, None));
        let mut best = (usize::MAX / 4, None);
        for r in self.table.realizations(f) {
            let arity = self.lib.cells()[r.cell].arity();
            let mut count = 0;
            let mut ins = [NO_NET; 3];
            let mut known = true;
            for i in 0..arity {
                let (c, n) = self.dry(r.kids[i], leaves, memo);
                count += c;
                match n {
                    Some(n) => ins[i] = n,
                    None => known = false,
                }
            }
            let (c, n) = match (known, known.then(|| self.lookup(r.cell, ins)).flatten()) {
                (true, Some(n)) => (count, Some(n)),
                _ => (count + 1, None),
            };
            if c < best.0 {
                best = (c, n);
            }
        }
        memo.insert(f, best);
        best
    }

    fn build(&mut self, f: u8, leaves: &[u32; 3]) -> Result<u32, MapError> {
        if let Some(n) = Self::base(f, leaves) {
            return Ok(n);
        }
        let mut memo = HashMap::new();
        let mut pick = None;
        let mut pick_cost = usize::MAX;
        for (i, r) in self.table.realizations(f).iter().enumerate() {
            let arity = self.lib.cells()[r.cell].arity();
            let mut count = 0;
            let mut ins = [NO_NET; 3];
            let mut known = true;
            for k in 0..arity {
                let (c, n) = self.dry(r.kids[k], leaves, &mut memo);
                count += c;
                match n {
                    Some(n) => ins[k] = n,
                    None => known = false,
                }
            }
            if !(known && self.lookup(r.cell, ins).is_some()) {
                count += 1;
            }
            if count < pick_cost {
                pick_cost = count;
                pick = Some(i);
            }
        }
        let r = self.table.realizations(f)[pick.ok_or_else(|| MapError::Unmappable(self.lib.name().into(), f))?];
        let arity = self.lib.cells()[r.cell].arity();
        let mut ins = [NO_NET; 3];
        for k in 0..arity {
            ins[k] = self.build(r.kids[k], leaves)?;
        }
        Ok(self.add(r.cell, ins))
    }
}

struct Mapped {
    input_count: usize,
    cells: Vec<(usize, [u32; 3])>,
    outputs: Vec<u32>,
}

impl Mapper<'_> {
    fn instantiate(
        &self,
        lib: &CellLibrary,
        variants: &[Vec<([usize; 3], usize)>],
        best: &[[Best; 2]],
        need: &[[bool; 2]],
    ) -> Result<Mapped, MapError> {
        let ni = self.g.input_count() as u32;
        let mut b = Builder {
            lib,
            table: self.table,
            variants,
            cells: Vec::new(),
            hash: HashMap::new(),
            first_gate_net: 2 + ni,
        };
        let n = self.g.nodes().len();
        let mut net = vec![[NO_NET; 2]; n];
        let not_a = !logic::VAR_A;
        for id in 0..n {
            let order = match best[id][0].choice {
                Choice::Invert => [1, 0],
                _ => [0, 1],
            };
            for p in order {
                if !need[id][p] {
                    continue;
                }
                net[id][p] = match best[id][p].choice {
                    Choice::Const => p as u32,
                    Choice::Input => match self.g.node(id) {
                        AigNode::Input(k) => 2 + k as u32,
                        _ => unreachable!("input choice on a non-input"),
                    },
                    Choice::Invert => {
                        let src = net[id][1 - p];
                        b.build(not_a, &[src, 0, 0])?
                    }
                    Choice::Match { cut, func, phases } => {
                        let c = &self.cuts[id][cut];
                        let mut leaves = [0u32; 3];
                        for (i, &leaf) in c.leaves().iter().enumerate() {
                            leaves[i] = net[leaf as usize][((phases >> i) & 1) as usize];
                            debug_assert_ne!(leaves[i], NO_NET);
                        }
                        b.build(func, &leaves)?
                    }
                };
            }
        }
        let outputs = self
            .g
            .outputs()
            .iter()
            .map(|(_, l)| net[l.node()][l.is_complemented() as usize])
            .collect();
        Ok(Mapped { input_count: ni as usize, cells: b.cells, outputs })
    }
}

impl Mapped {
    /// Drops cells not reachable from the outputs.
    fn sweep(mut self) -> Mapped {
        let base = 2 + self.input_count as u32;
        let mut live = vec![false; self.cells.len()];
        let mut stack: Vec<u32> = self.outputs.iter().copied().filter(|&n| n >= base).collect();
        while let Some(n) = stack.pop() {
            let i = (n - base) as usize;
            if live[i] {
                continue;
            }
            live[i] = true;
            stack.extend(self.cells[i].1.iter().copied().filter(|&m| m != NO_NET && m >= base));
        }
        let mut remap = vec![NO_NET; self.cells.len()];
        let mut kept = Vec::new();
        for (i, c) in self.cells.iter().enumerate() {
            if live[i] {
                remap[i] = base + kept.len() as u32;
                kept.push(*c);
            }
        }
        let fix = |n: u32| if n != NO_NET && n >= base { remap[(n - base) as usize] } else { n };
        for c in &mut kept {
            for x in &mut c.1 {
                *x = fix(*x);
            }
        }
        self.outputs = self.outputs.iter().map(|&n| fix(n)).collect();
        self.cells = kept;
        self
    }

    fn into_netlist(self, g: &Aig, lib: &CellLibrary) -> Result<Netlist, NetlistError> {
        let inputs: Vec<String> = g.input_nodes().map(|(n, _)| n.to_string()).collect();
        let outputs: Vec<String> = g.outputs().iter().map(|(n, _)| n.clone()).collect();
        let taken: HashSet<&str> = inputs.iter().chain(&outputs).map(String::as_str).collect();
        let mut prefix = String::from("_t");
        while taken.iter().any(|n| n.starts_with(&prefix)) {
            prefix.insert(0, '_');
        }
        let base = 2 + inputs.len() as u32;
        let mut names: Vec<String> = (0..self.cells.len()).map(|i| format!("{prefix}{i}")).collect();
        let mut assigns = Vec::new();
        let mut claimed = vec![false; self.cells.len()];
        for (port, &n) in outputs.iter().zip(&self.outputs) {
            if n >= base && !claimed[(n - base) as usize] {
                claimed[(n - base) as usize] = true;
                names[(n - base) as usize] = port.clone();
            } else {
                assigns.push((port.clone(), n));
            }
        }
        let name_of = |n: u32| -> String {
            match n {
                0 => CONST0.to_string(),
                1 => CONST1.to_string(),
                n if n < base => inputs[(n - 2) as usize].clone(),
                n => names[(n - base) as usize].clone(),
            }
        };
        let gates = self
            .cells
            .iter()
            .enumerate()
            .map(|(i, (cell, ins))| {
                let c = &lib.cells()[*cell];
                let ins = ins[..c.arity()].iter().map(|&n| name_of(n)).collect();
                Gate::new(c.name(), c.truth(), names[i].clone(), ins)
            })
            .collect();
        let assigns = assigns.into_iter().map(|(p, n)| (p, name_of(n))).collect();
        Netlist::new(g.name(), inputs, outputs, gates, assigns)
    }
}

/// Covers the AIG with library cells, minimizing total cell cost.
pub fn tech_map(g: &Aig, lib: &CellLibrary) -> Result<Netlist, MapError> {
    let g = g.cleanup();
    let table = SynthesisTable::cached(lib);
    let variants = cell_variants(lib);
    let mapper = Mapper {
        g: &g,
        table: &table,
        cuts: enumerate_cuts(&g),
        inv_cost: table.cost(!logic::VAR_A),
    };
    let n = g.nodes().len();
    let mut est: Vec<f64> = vec![0.0; n];
    for node in g.nodes() {
        if let AigNode::And(a, b) = node {
            est[a.node()] += 1.0;
            est[b.node()] += 1.0;
        }
    }
    for (_, l) in g.outputs() {
        est[l.node()] += 1.0;
    }
    for e in &mut est {
        *e = e.max(1.0);
    }
    let mut winner: Option<(f64, Mapped)> = None;
    for _ in 0..RECOVERY_ROUNDS {
        let best = mapper.cover(&est);
        let (need, refs) = mapper.select(&best);
        let mapped = mapper.instantiate(lib, &variants, &best, &need)?.sweep();
        let area: f64 = mapped.cells.iter().map(|(c, _)| lib.cells()[*c].cost()).sum();
        if winner.as_ref().is_none_or(|(a, _)| area < a - EPS) {
            winner = Some((area, mapped));
        }
        for (e, r) in est.iter_mut().zip(&refs) {
            *e = ((*e + 2.0 * r) / 3.0).max(1.0);
        }
        let mut best = best;
        mapper.exact_area(&mut best, EXACT_PASSES);
        let (need, _) = mapper.select(&best);
        let mapped = mapper.instantiate(lib, &variants, &best, &need)?.sweep();
        let area: f64 = mapped.cells.iter().map(|(c, _)| lib.cells()[*c].cost()).sum();
        if winner.as_ref().is_none_or(|(a, _)| area < a - EPS) {
            winner = Some((area, mapped));
        }
    }
    let (_, mapped) = winner.expect("at least one round");
    Ok(mapped.into_netlist(&g, lib)?)
}

/// Per-cell instance counts and their total.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CellCountReport {
    pub counts: BTreeMap<String, usize>,
    pub total: usize,
}

impl fmt::Display for CellCountReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (name, n) in &self.counts {
            writeln!(f, "{name} {n}")?;
        }
        write!(f, "total {}", self.total)
    }
}

pub fn cell_count_report(n: &Netlist) -> CellCountReport {
    let counts = n.cell_histogram();
    CellCountReport { total: counts.values().sum(), counts }
}
