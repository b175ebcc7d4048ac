//! Truth tables over up to 16 variables, irredundant sum-of-products and
//! algebraic factoring. Used by cone resynthesis.

use std::ops::{BitAnd, BitOr, BitXor, Not};

pub const MAX_VARS: usize = 16;

const VAR_WORDS: [u64; 6] = [
    0xAAAA_AAAA_AAAA_AAAA,
    0xCCCC_CCCC_CCCC_CCCC,
    0xF0F0_F0F0_F0F0_F0F0,
    0xFF00_FF00_FF00_FF00,
    0xFFFF_0000_FFFF_0000,
    0xFFFF_FFFF_0000_0000,
];

/// Bit `m` of the table is the value at minterm `m`, where bit `i` of `m`
/// is variable `i`. Tables with fewer than 6 variables keep the pattern
/// replicated across the whole word.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct TruthTable {
    nvars: usize,
    words: Vec<u64>,
}

fn word_count(nvars: usize) -> usize {
    if nvars <= 6 {
        1
    } else {
        1 << (nvars - 6)
    }
}

impl TruthTable {
    pub fn zero(nvars: usize) -> Self {
        assert!(nvars <= MAX_VARS, "too many variables");
        TruthTable { nvars, words: vec![0; word_count(nvars)] }
    }

    pub fn one(nvars: usize) -> Self {
        !Self::zero(nvars)
    }

    pub fn var(nvars: usize, v: usize) -> Self {
        assert!(v < nvars);
        let mut t = Self::zero(nvars);
        for (w, word) in t.words.iter_mut().enumerate() {
            *word = if v < 6 {
                VAR_WORDS[v]
            } else if (w >> (v - 6)) & 1 == 1 {
                !0
            } else {
                0
            };
        }
        t
    }

    /// Three-variable table from a cell truth byte (variable 0 is the
    /// lowest index bit, i.e. the third cell input).
    pub fn from_byte(truth: u8) -> Self {
        TruthTable {
            nvars: 3,
            words: vec![u64::from_le_bytes([truth; 8])],
        }
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn words(&self) -> &[u64] {
        &self.words
    }

    pub fn is_zero(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    pub fn is_one(&self) -> bool {
        self.words.iter().all(|&w| w == !0)
    }

    pub fn bit(&self, minterm: usize) -> bool {
        (self.words[minterm / 64] >> (minterm % 64)) & 1 == 1
    }

    pub fn cofactor(&self, v: usize, value: bool) -> Self {
        let mut t = self.clone();
        if v < 6 {
            let m = VAR_WORDS[v];
            let s = 1u32 << v;
            for w in &mut t.words {
                *w = if value {
                    (*w & m) | ((*w & m) >> s)
                } else {
                    (*w & !m) | ((*w & !m) << s)
                };
            }
        } else {
            let stride = 1 << (v - 6);
            for w in 0..t.words.len() {
                let src = if value { w | stride } else { w & !stride };
                t.words[w] = self.words[src];
            }
        }
        t
    }

    pub fn depends_on(&self, v: usize) -> bool {
        self.cofactor(v, false) != self.cofactor(v, true)
    }

    pub fn support(&self) -> Vec<usize> {
        (0..self.nvars).filter(|&v| self.depends_on(v)).collect()
    }

    fn zip(&self, other: &Self, f: impl Fn(u64, u64) -> u64) -> Self {
        assert_eq!(self.nvars, other.nvars);
        TruthTable {
            nvars: self.nvars,
            words: self.words.iter().zip(&other.words).map(|(&a, &b)| f(a, b)).collect(),
        }
    }
}

impl Not for TruthTable {
    type Output = TruthTable;
    fn not(mut self) -> TruthTable {
        for w in &mut self.words {
            *w = !*w;
        }
        self
    }
}

impl Not for &TruthTable {
    type Output = TruthTable;
    fn not(self) -> TruthTable {
        !self.clone()
    }
}

impl BitAnd for &TruthTable {
    type Output = TruthTable;
    fn bitand(self, o: &TruthTable) -> TruthTable {
        self.zip(o, |a, b| a & b)
    }
}

impl BitOr for &TruthTable {
    type Output = TruthTable;
    fn bitor(self, o: &TruthTable) -> TruthTable {
        self.zip(o, |a, b| a | b)
    }
}

impl BitXor for &TruthTable {
    type Output = TruthTable;
    fn bitxor(self, o: &TruthTable) -> TruthTable {
        self.zip(o, |a, b| a ^ b)
    }
}

/// Product term: `pos` and `neg` are bit masks of variables appearing
/// uncomplemented and complemented.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Default)]
pub struct Cube {
    pub pos: u32,
    pub neg: u32,
}

impl Cube {
    pub fn literal_count(&self) -> u32 {
        self.pos.count_ones() + self.neg.count_ones()
    }

    fn has(&self, lit: (usize, bool)) -> bool {
        let m = 1 << lit.0;
        if lit.1 {
            self.neg & m != 0
        } else {
            self.pos & m != 0
        }
    }

    fn without(mut self, lit: (usize, bool)) -> Cube {
        let m = !(1u32 << lit.0);
        if lit.1 {
            self.neg &= m;
        } else {
            self.pos &= m;
        }
        self
    }

    fn literals(&self) -> Vec<(usize, bool)> {
        let mut out = Vec::new();
        for v in 0..32 {
            if self.pos >> v & 1 == 1 {
                out.push((v, false));
            }
            if self.neg >> v & 1 == 1 {
                out.push((v, true));
            }
        }
        out
    }
}

/// Irredundant sum of products of a completely specified function.
pub fn isop(f: &TruthTable) -> Vec<Cube> {
    isop_limited(f, usize::MAX).expect("no limit")
}

/// As [`isop`], giving up once the cover exceeds `max_cubes`.
pub fn isop_limited(f: &TruthTable, max_cubes: usize) -> Option<Vec<Cube>> {
    let mut cover = Vec::new();
    isop_rec(f, f, f.nvars(), &mut cover, max_cubes)?;
    Some(cover)
}

fn isop_rec(
    lower: &TruthTable,
    upper: &TruthTable,
    top: usize,
    cover: &mut Vec<Cube>,
    limit: usize,
) -> Option<TruthTable> {
    let n = lower.nvars();
    if lower.is_zero() {
        return Some(TruthTable::zero(n));
    }
    if cover.len() >= limit {
        return None;
    }
    if upper.is_one() {
        cover.push(Cube::default());
        return Some(TruthTable::one(n));
    }
    let v = (0..top)
        .rev()
        .find(|&v| lower.depends_on(v) || upper.depends_on(v))
        .expect("non-constant bounds depend on some variable");
    let (l0, l1) = (lower.cofactor(v, false), lower.cofactor(v, true));
    let (u0, u1) = (upper.cofactor(v, false), upper.cofactor(v, true));

    let start0 = cover.len();
    let f0 = isop_rec(&(&l0 & &!&u1), &u0, v, cover, limit)?;
    for c in &mut cover[start0..] {
        c.neg |= 1 << v;
    }
    let start1 = cover.len();
    let f1 = isop_rec(&(&l1 & &!&u0), &u1, v, cover, limit)?;
    for c in &mut cover[start1..] {
        c.pos |= 1 << v;
    }
    let rest_lower = &(&l0 & &!&f0) | &(&l1 & &!&f1);
    let rest_upper = &u0 & &u1;
    let fs = isop_rec(&rest_lower, &rest_upper, v, cover, limit)?;
    let x = TruthTable::var(n, v);
    Some(&(&fs | &(&f0 & &!&x)) | &(&f1 & &x))
}

/// Evaluates a cover over the given number of variables.
pub fn cover_function(cover: &[Cube], nvars: usize) -> TruthTable {
    let mut f = TruthTable::zero(nvars);
    for c in cover {
        let mut t = TruthTable::one(nvars);
        for (v, neg) in c.literals() {
            let x = TruthTable::var(nvars, v);
            t = if neg { &t & &!&x } else { &t & &x };
        }
        f = &f | &t;
    }
    f
}

/// Factored form: a tree of two-input ANDs and ORs over literals.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Factored {
    Const(bool),
    Lit { var: usize, neg: bool },
    And(Box<Factored>, Box<Factored>),
    Or(Box<Factored>, Box<Factored>),
}

impl Factored {
    /// Number of two-input operators in the tree.
    pub fn op_count(&self) -> usize {
        match self {
            Factored::Const(_) | Factored::Lit { .. } => 0,
            Factored::And(a, b) | Factored::Or(a, b) => 1 + a.op_count() + b.op_count(),
        }
    }

    pub fn eval(&self, nvars: usize) -> TruthTable {
        match self {
            Factored::Const(true) => TruthTable::one(nvars),
            Factored::Const(false) => TruthTable::zero(nvars),
            Factored::Lit { var, neg } => {
                let x = TruthTable::var(nvars, *var);
                if *neg {
                    !x
                } else {
                    x
                }
            }
            Factored::And(a, b) => &a.eval(nvars) & &b.eval(nvars),
            Factored::Or(a, b) => &a.eval(nvars) | &b.eval(nvars),
        }
    }
}

fn chain(mut items: Vec<Factored>, and: bool) -> Factored {
    if items.is_empty() {
        return Factored::Const(and);
    }
    while items.len() > 1 {
        let mut next = Vec::with_capacity(items.len().div_ceil(2));
        let mut it = items.into_iter();
        while let Some(a) = it.next() {
            next.push(match it.next() {
                Some(b) if and => Factored::And(Box::new(a), Box::new(b)),
                Some(b) => Factored::Or(Box::new(a), Box::new(b)),
                None => a,
            });
        }
        items = next;
    }
    items.pop().unwrap()
}

fn cube_expr(c: &Cube) -> Factored {
    chain(c.literals().into_iter().map(|(var, neg)| Factored::Lit { var, neg }).collect(), true)
}

/// Algebraic factoring by repeated division on the most frequent literal.
pub fn factor(cover: &[Cube]) -> Factored {
    if cover.is_empty() {
        return Factored::Const(false);
    }
    if cover.iter().any(|c| c.literal_count() == 0) {
        return Factored::Const(true);
    }
    if cover.len() == 1 {
        return cube_expr(&cover[0]);
    }
    let mut best: Option<((usize, bool), usize)> = None;
    for v in 0..32 {
        for neg in [false, true] {
            let n = cover.iter().filter(|c| c.has((v, neg))).count();
            if n >= 2 && best.is_none_or(|(_, m)| n > m) {
                best = Some(((v, neg), n));
            }
        }
    }
    let Some((lit, _)) = best else {
        return chain(cover.iter().map(cube_expr).collect(), false);
    };
    let quotient: Vec<Cube> = cover.iter().filter(|c| c.has(lit)).map(|c| c.without(lit)).collect();
    let rest: Vec<Cube> = cover.iter().filter(|c| !c.has(lit)).copied().collect();
    let term = Factored::And(
        Box::new(Factored::Lit { var: lit.0, neg: lit.1 }),
        Box::new(factor(&quotient)),
    );
    if rest.is_empty() {
        term
    } else {
        Factored::Or(Box::new(term), Box::new(factor(&rest)))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_tables_replicate() {
        let a = TruthTable::var(2, 0);
        let b = TruthTable::var(2, 1);
        assert_eq!((&a & &b).words()[0], 0x8888_8888_8888_8888);
        assert!(TruthTable::var(3, 2).depends_on(2));
        assert!(!TruthTable::var(3, 2).depends_on(1));
    }

    #[test]
    fn wide_cofactor() {
        let x7 = TruthTable::var(8, 7);
        let x1 = TruthTable::var(8, 1);
        let f = &x7 & &x1;
        assert_eq!(f.cofactor(7, true), x1);
        assert!(f.cofactor(7, false).is_zero());
        assert_eq!(f.support(), vec![1, 7]);
    }

    #[test]
    fn isop_and_factor_reproduce_function() {
        let n = 5;
        let v: Vec<_> = (0..n).map(|i| TruthTable::var(n, i)).collect();
        let f = &(&(&v[0] & &v[1]) | &(&v[0] & &v[2])) | &(&v[3] ^ &v[4]);
        let cover = isop(&f);
        assert_eq!(cover_function(&cover, n), f);
        let fx = factor(&cover);
        assert_eq!(fx.eval(n), f);
        // a(b + c) shares the a
        let g = &(&v[0] & &v[1]) | &(&v[0] & &v[2]);
        assert_eq!(factor(&isop(&g)).op_count(), 2);
    }

    #[test]
    fn limit_stops_parity() {
        let n = 8;
        let mut f = TruthTable::zero(n);
        for i in 0..n {
            f = &f ^ &TruthTable::var(n, i);
        }
        assert!(isop_limited(&f, 20).is_none());
        assert_eq!(isop(&f).len(), 128);
    }

    #[test]
    fn constants() {
        assert_eq!(factor(&isop(&TruthTable::zero(3))), Factored::Const(false));
        assert_eq!(factor(&isop(&TruthTable::one(3))), Factored::Const(true));
    }
}
