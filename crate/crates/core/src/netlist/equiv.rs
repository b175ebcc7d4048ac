use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::{NetlistError, Simulator};
use crate::fmt::{EncodedScalar, FpFormat};

/// Anything that maps input bit-words to output bit-words lane by lane.
pub trait BitCircuit: Sync {
    fn input_names(&self) -> Vec<String>;
    fn output_names(&self) -> Vec<String>;
    /// `inputs[i]` holds `words` u64s for input bit `i`.
    fn eval_block(&self, inputs: &[Vec<u64>], words: usize) -> Vec<Vec<u64>>;
    /// FP operands carried on the inputs, used to pick directed vectors.
    fn fp_operands(&self) -> Vec<FpOperand> {
        Vec::new()
    }
}

/// An encoded FP operand occupying input bits `bits[0]` (LSB) upward.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FpOperand {
    pub format: FpFormat,
    pub bits: Vec<usize>,
}

impl BitCircuit for Simulator {
    fn input_names(&self) -> Vec<String> {
        self.inputs().to_vec()
    }

    fn output_names(&self) -> Vec<String> {
        self.outputs().to_vec()
    }

    fn eval_block(&self, inputs: &[Vec<u64>], words: usize) -> Vec<Vec<u64>> {
        let cols: Vec<&[u64]> = inputs.iter().map(Vec::as_slice).collect();
        self.eval_words(&cols, words)
    }
}

#[derive(Clone, Debug)]
pub struct EquivOptions {
    /// Sweep exhaustively when the total input width is at most this.
    pub exhaustive_limit_bits: u32,
    pub n_random: u64,
    pub seed: u64,
    /// Words per work item.
    pub block_words: usize,
}

impl Default for EquivOptions {
    fn default() -> Self {
        EquivOptions {
            exhaustive_limit_bits: 24,
            n_random: 1 << 20,
            seed: 1,
            block_words: 256,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum EquivVerdict {
    ProvenExhaustive { vectors: u64 },
    PassedRandom { vectors: u64, seed: u64 },
    Counterexample {
        inputs: Vec<(String, bool)>,
        output: String,
        left: bool,
        right: bool,
    },
}

impl EquivVerdict {
    pub fn is_equivalent(&self) -> bool {
        !matches!(self, EquivVerdict::Counterexample { .. })
    }
}

impl fmt::Display for EquivVerdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EquivVerdict::ProvenExhaustive { vectors } => write!(f, "proven_exhaustive {vectors} vectors"),
            EquivVerdict::PassedRandom { vectors, seed } => {
                write!(f, "passed_random {vectors} vectors seed {seed}")
            }
            EquivVerdict::Counterexample { inputs, output, left, right } => {
                write!(f, "counterexample: output {output} is {} vs {} with", *left as u8, *right as u8)?;
                for (name, _) in inputs.iter().filter(|(_, v)| *v) {
                    write!(f, " {name}=1")?;
                }
                if inputs.iter().all(|(_, v)| !v) {
                    write!(f, " all inputs 0")?;
                }
                Ok(())
            }
        }
    }
}

const LANE_PATTERNS: [u64; 6] = [
    0xAAAA_AAAA_AAAA_AAAA,
    0xCCCC_CCCC_CCCC_CCCC,
    0xF0F0_F0F0_F0F0_F0F0,
    0xFF00_FF00_FF00_FF00,
    0xFFFF_0000_FFFF_0000,
    0xFFFF_FFFF_0000_0000,
];

/// Compares two circuits with identical signatures by simulation.
pub fn check_equiv(
    a: &dyn BitCircuit,
    b: &dyn BitCircuit,
    opts: &EquivOptions,
) -> Result<EquivVerdict, NetlistError> {
    let ins = a.input_names();
    let outs = a.output_names();
    if ins != b.input_names() {
        return Err(NetlistError::Signature("input lists differ".into()));
    }
    if outs != b.output_names() {
        return Err(NetlistError::Signature("output lists differ".into()));
    }
    let n = ins.len();
    let exhaustive = n as u32 <= opts.exhaustive_limit_bits;
    let block = opts.block_words.max(1);
    let fp = {
        let mut ops = a.fp_operands();
        if ops.is_empty() {
            ops = b.fp_operands();
        }
        ops
    };
    let directed = if exhaustive { Vec::new() } else { directed_vectors(n, &fp) };
    let vectors = if exhaustive {
        1u64 << n
    } else {
        opts.n_random.max(directed.len() as u64)
    };
    let total_words = vectors.div_ceil(64) as usize;
    let n_blocks = total_words.div_ceil(block);

    let mismatch = (0..n_blocks).into_par_iter().find_map_first(|blk| {
        let start = blk * block;
        let words = block.min(total_words - start);
        let inputs = if exhaustive {
            exhaustive_block(n, start, words)
        } else {
            random_block(n, start, words, opts.seed, &directed, &fp)
        };
        let ra = a.eval_block(&inputs, words);
        let rb = b.eval_block(&inputs, words);
        for w in 0..words {
            let valid = if exhaustive && n < 6 { (1u64 << (1 << n)) - 1 } else { !0 };
            for (o, (wa, wb)) in ra.iter().zip(&rb).enumerate() {
                let diff = (wa[w] ^ wb[w]) & valid;
                if diff != 0 {
                    let lane = diff.trailing_zeros();
                    let assignment = ins
                        .iter()
                        .enumerate()
                        .map(|(i, name)| (name.clone(), (inputs[i][w] >> lane) & 1 == 1))
                        .collect();
                    return Some(EquivVerdict::Counterexample {
                        inputs: assignment,
                        output: outs[o].clone(),
                        left: (wa[w] >> lane) & 1 == 1,
                        right: (wb[w] >> lane) & 1 == 1,
                    });
                }
            }
        }
        None
    });
    Ok(match mismatch {
        Some(cex) => cex,
        None if exhaustive => EquivVerdict::ProvenExhaustive { vectors },
        None => EquivVerdict::PassedRandom { vectors, seed: opts.seed },
    })
}

/// Counting patterns: lane `l` of word `w` carries input vector `64 * w + l`.
fn exhaustive_block(n: usize, start: usize, words: usize) -> Vec<Vec<u64>> {
    (0..n)
        .map(|i| {
            (start..start + words)
                .map(|w| {
                    if i < 6 {
                        LANE_PATTERNS[i]
                    } else if (w >> (i - 6)) & 1 == 1 {
                        !0
                    } else {
                        0
                    }
                })
                .collect()
        })
        .collect()
}

/// Bit vectors (one bool per input) that random vectors start with.
fn directed_vectors(n: usize, fp: &[FpOperand]) -> Vec<Vec<bool>> {
    let mut out = vec![vec![false; n], vec![true; n]];
    for i in 0..n {
        let mut v = vec![false; n];
        v[i] = true;
        out.push(v);
        let mut z = vec![true; n];
        z[i] = false;
        out.push(z);
    }
    if fp.is_empty() {
        return out;
    }
    let specials: Vec<Vec<u64>> = fp.iter().map(|op| special_encodings(op.format)).collect();
    // All combinations of special values across operands.
    let mut idx = vec![0usize; fp.len()];
    loop {
        let mut v = vec![false; n];
        for (k, op) in fp.iter().enumerate() {
            let bits = specials[k][idx[k]];
            for (j, &pos) in op.bits.iter().enumerate() {
                v[pos] = (bits >> j) & 1 == 1;
            }
        }
        out.push(v);
        let mut k = 0;
        loop {
            if k == fp.len() {
                return out;
            }
            idx[k] += 1;
            if idx[k] < specials[k].len() {
                break;
            }
            idx[k] = 0;
            k += 1;
        }
    }
}

fn special_encodings(f: FpFormat) -> Vec<u64> {
    let mut v = Vec::new();
    for neg in [false, true] {
        v.push(EncodedScalar::zero(f, neg).bits());
        let normal = |e: u64, fr: u64| EncodedScalar::normal(f, neg, e, fr).expect("fields in range").bits();
        v.push(normal(f.bias() as u64, 0));
        v.push(normal(f.max_biased_exp(), (1u64 << f.frac_bits()) - 1));
        v.push(normal(1, 0));
        v.push(EncodedScalar::infinity(f, neg).bits());
    }
    v.push(EncodedScalar::nan(f).bits());
    v
}

/// Random stimulus for one block. Each block draws from its own stream
/// derived from the seed, so results do not depend on scheduling.
fn random_block(
    n: usize,
    start: usize,
    words: usize,
    seed: u64,
    directed: &[Vec<bool>],
    fp: &[FpOperand],
) -> Vec<Vec<u64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ (start as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15));
    let mut cols = vec![vec![0u64; words]; n];
    for w in 0..words {
        for lane in 0..64 {
            let global = (start + w) * 64 + lane;
            let bits: Vec<bool> = if let Some(d) = directed.get(global) {
                d.clone()
            } else {
                random_vector(n, fp, &mut rng)
            };
            for (i, b) in bits.into_iter().enumerate() {
                cols[i][w] |= (b as u64) << lane;
            }
        }
    }
    cols
}

fn random_vector(n: usize, fp: &[FpOperand], rng: &mut ChaCha8Rng) -> Vec<bool> {
    let mut v: Vec<bool> = (0..n).map(|_| rng.random::<bool>()).collect();
    if fp.is_empty() {
        return v;
    }
    // Stratify: mostly normal operands, with exponents often close so
    // additions exercise cancellation and short alignment shifts.
    let mut first_exp: Option<i64> = None;
    for op in fp {
        let f = op.format;
        let class: u64 = match rng.random_range(0..16) {
            0 => 0,
            1 => 2,
            2 => 3,
            _ => 1,
        };
        let emax = f.max_biased_exp() as i64;
        let exp = match (first_exp, rng.random_range(0..4)) {
            (Some(e), 0 | 1) => (e + rng.random_range(-2..=2)).clamp(1, emax),
            (_, 2) => {
                if rng.random::<bool>() {
                    rng.random_range(1..=emax.min(3))
                } else {
                    rng.random_range((emax - 2).max(1)..=emax)
                }
            }
            _ => rng.random_range(0..=emax),
        };
        first_exp.get_or_insert(exp);
        let frac: u64 = rng.random::<u64>() & ((1u64 << f.frac_bits()) - 1);
        let sign = rng.random::<bool>() as u64;
        let noncanonical = rng.random_range(0..8) == 0;
        let (e, fr) = if class == 1 || noncanonical { (exp as u64, frac) } else { (0, 0) };
        let wf = f.frac_bits();
        let we = f.exp_bits();
        let bits = (class << (1 + we + wf)) | (sign << (we + wf)) | (e << wf) | fr;
        for (j, &pos) in op.bits.iter().enumerate() {
            v[pos] = (bits >> j) & 1 == 1;
        }
    }
    v
}

#[cfg(test)]
mod tests {
    use super::super::test_util::*;
    use super::super::{Gate, Netlist};
    use super::*;
    use crate::logic;

    fn gate1(t: u8, name: &str) -> Simulator {
        Netlist::new(
            "g",
            vec![s("a"), s("b")],
            vec![s("y")],
            vec![Gate::new(name, t, "y", vec![s("a"), s("b")])],
            vec![],
        )
        .unwrap()
        .simulator()
        .unwrap()
    }

    #[test]
    fn self_is_proven() {
        let fa = full_adder().simulator().unwrap();
        let v = check_equiv(&fa, &fa, &EquivOptions::default()).unwrap();
        assert_eq!(v, EquivVerdict::ProvenExhaustive { vectors: 8 });
        assert_eq!(v.to_string(), "proven_exhaustive 8 vectors");
    }

    #[test]
    fn and_vs_or_counterexample() {
        let v = check_equiv(&gate1(logic::AND, "AND"), &gate1(logic::OR, "OR"), &EquivOptions::default()).unwrap();
        match v {
            EquivVerdict::Counterexample { inputs, left, right, .. } => {
                assert_eq!(inputs, vec![(s("a"), true), (s("b"), false)]);
                assert!(!left && right);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn random_mode_is_deterministic() {
        let fa = full_adder().simulator().unwrap();
        let opts = EquivOptions {
            exhaustive_limit_bits: 0,
            n_random: 1000,
            seed: 7,
            ..Default::default()
        };
        let v = check_equiv(&fa, &fa, &opts).unwrap();
        assert_eq!(v, EquivVerdict::PassedRandom { vectors: 1000, seed: 7 });
    }

    #[test]
    fn signature_mismatch() {
        let fa = full_adder().simulator().unwrap();
        assert!(matches!(
            check_equiv(&fa, &gate1(logic::AND, "AND"), &EquivOptions::default()),
            Err(NetlistError::Signature(_))
        ));
    }
}
