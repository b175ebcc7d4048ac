use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use super::{write_library, CellLibrary};
use crate::logic;

const MAX_OPTIONS: usize = 32;
const EPS: f64 = 1e-9;

/// One way to build a function: `cell` applied to child functions.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Realization {
    pub cell: usize,
    pub kids: [u8; 3],
}

/// Minimum-cost formulas for all 256 functions of three inputs, built from
/// one library's cells with inputs `a`, `b`, `c` and the constants.
#[derive(Clone, Debug)]
pub struct SynthesisTable {
    cost: [f64; 256],
    options: Vec<Vec<Realization>>,
}

fn is_base(f: u8) -> bool {
    matches!(f, logic::FALSE | logic::TRUE | logic::VAR_A | logic::VAR_B | logic::VAR_C)
}

/// Preference among equal-cost realizations: plain variables in their own
/// slot first, then other support variables, then constants.
fn score(f: u8, arity: usize, kids: &[u8; 3]) -> u32 {
    kids.iter()
        .enumerate()
        .take(arity)
        .map(|(slot, &k)| {
            let in_support = (0..3).any(|v| logic::VARS[v] == k && logic::depends_on(f, v));
            if k == logic::VARS[slot] && in_support {
                0
            } else if in_support {
                1
            } else if k == logic::FALSE || k == logic::TRUE {
                2
            } else if is_base(k) {
                4
            } else {
                3
            }
        })
        .sum()
}

impl SynthesisTable {
    /// Shortest-path search over functions: a function is final once no
    /// cheaper formula can appear, and every formula's children are final
    /// before it.
    pub fn build(lib: &CellLibrary) -> SynthesisTable {
        let cells = lib.cells();
        let mut cost = [f64::INFINITY; 256];
        let mut options: Vec<Vec<Realization>> = vec![Vec::new(); 256];
        for f in [logic::FALSE, logic::TRUE, logic::VAR_A, logic::VAR_B, logic::VAR_C] {
            cost[f as usize] = 0.0;
        }
        let cmin = cells.iter().map(|c| c.cost()).fold(f64::INFINITY, f64::min);
        let mut done = [false; 256];
        let mut finals: Vec<u8> = Vec::new();
        loop {
            let next = (0..256usize)
                .filter(|&f| !done[f] && cost[f].is_finite())
                .min_by(|&x, &y| cost[x].partial_cmp(&cost[y]).unwrap().then(x.cmp(&y)));
            let Some(f) = next else { break };
            done[f] = true;
            let f = f as u8;
            let before = finals.len();
            finals.push(f);
            let cur = cost[f as usize];
            let worst = (0..256).filter(|&g| !done[g]).map(|g| cost[g]).fold(0.0f64, f64::max);
            if cur + cmin > worst + EPS {
                continue;
            }
            for (ci, cell) in cells.iter().enumerate() {
                let k = cell.arity();
                for slot in 0..k {
                    // Slots before `slot` use functions finalized earlier,
                    // so every tuple containing `f` is visited once.
                    let pool = |s: usize| -> &[u8] {
                        if s < slot {
                            &finals[..before]
                        } else {
                            &finals[..]
                        }
                    };
                    let p0: &[u8] = if slot == 0 { &[f][..] } else { pool(0) };
                    for &x in p0 {
                        let p1: &[u8] = if k < 2 {
                            &[0][..]
                        } else if slot == 1 {
                            &[f][..]
                        } else {
                            pool(1)
                        };
                        for &y in p1 {
                            let p2: &[u8] = if k < 3 {
                                &[0][..]
                            } else if slot == 2 {
                                &[f][..]
                            } else {
                                pool(2)
                            };
                            for &z in p2 {
                                let kids = [x, y, z];
                                let c = cell.cost() + kids[..k].iter().map(|&g| cost[g as usize]).sum::<f64>();
                                let out = logic::eval_word(cell.truth(), x as u64, y as u64, z as u64) as u8;
                                let o = out as usize;
                                if done[o] && !(c <= cost[o] + EPS) {
                                    continue;
                                }
                                let r = Realization { cell: ci, kids };
                                if c < cost[o] - EPS {
                                    cost[o] = c;
                                    options[o] = vec![r];
                                } else if c <= cost[o] + EPS && !is_base(out) && !options[o].contains(&r) {
                                    if options[o].len() < MAX_OPTIONS {
                                        options[o].push(r);
                                    } else {
                                        let rank = |r: &Realization| score(out, cells[r.cell].arity(), &r.kids);
                                        let victim = (0..MAX_OPTIONS)
                                            .max_by_key(|&i| (rank(&options[o][i]), i))
                                            .unwrap();
                                        if rank(&r) < rank(&options[o][victim]) {
                                            options[o][victim] = r;
                                        }
                                    }
                                }
                            }
                        }
                    }
                }
            }
        }
        for (f, opts) in options.iter_mut().enumerate() {
            opts.sort_by_key(|r| score(f as u8, cells[r.cell].arity(), &r.kids));
        }
        SynthesisTable { cost, options }
    }

    /// Shared table for a library, built once per distinct library text.
    pub fn cached(lib: &CellLibrary) -> Arc<SynthesisTable> {
        static CACHE: OnceLock<Mutex<HashMap<String, Arc<SynthesisTable>>>> = OnceLock::new();
        let key = write_library(lib);
        let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
        if let Some(t) = cache.lock().unwrap().get(&key) {
            return t.clone();
        }
        let t = Arc::new(SynthesisTable::build(lib));
        cache.lock().unwrap().insert(key, t.clone());
        t
    }

    pub fn cost(&self, f: u8) -> f64 {
        self.cost[f as usize]
    }

    pub fn realizations(&self, f: u8) -> &[Realization] {
        &self.options[f as usize]
    }
}

#[cfg(test)]
mod tests {
    use super::super::{builtin_library, LibraryId};
    use super::*;

    #[test]
    fn costs_per_library() {
        let avx2 = SynthesisTable::build(&builtin_library(LibraryId::Avx2));
        assert_eq!(avx2.cost(logic::XOR3), 2.0);
        assert_eq!(avx2.cost(logic::MAJ), 4.0);
        assert_eq!(avx2.cost(logic::ANDNOT), 1.0);
        assert_eq!(avx2.cost(logic::SEL), 3.0);
        let neon = SynthesisTable::build(&builtin_library(LibraryId::Neon));
        assert_eq!(neon.cost(logic::SEL), 1.0);
        assert_eq!(neon.cost(logic::ANDNOT), 1.0);
        assert_eq!(neon.cost(logic::MAJ), 2.0);
        let lut = SynthesisTable::build(&builtin_library(LibraryId::Avx512Lut3));
        for f in 0..=255u8 {
            assert!(lut.cost(f) <= 1.0);
        }
        let r = lut.realizations(logic::MAJ)[0];
        assert_eq!(r.kids, [logic::VAR_A, logic::VAR_B, logic::VAR_C]);
    }

    #[test]
    fn every_function_reachable_and_consistent() {
        for id in LibraryId::ALL {
            let lib = builtin_library(id);
            let t = SynthesisTable::build(&lib);
            for f in 0..=255u8 {
                assert!(t.cost(f).is_finite());
                for r in t.realizations(f) {
                    let c = &lib.cells()[r.cell];
                    let out = logic::eval_word(c.truth(), r.kids[0] as u64, r.kids[1] as u64, r.kids[2] as u64) as u8;
                    assert_eq!(out, f);
                    let kid_cost: f64 = r.kids[..c.arity()].iter().map(|&k| t.cost(k)).sum();
                    assert_eq!(c.cost() + kid_cost, t.cost(f));
                }
            }
        }
    }
}
