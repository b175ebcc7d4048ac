use std::collections::BTreeMap;
use std::sync::OnceLock;

use super::block::{words_for, BitsliceBlock};
use super::RtError;
use crate::cells::{Cell, CellLibrary, SynthesisTable};
use crate::codegen::{BitsliceProgram, Reg};
use crate::logic;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Kind {
    Copy,
    Not,
    And,
    Or,
    Xor,
    AndNot,
    OrN,
    Bic,
    Nand,
    Nor,
    Xnor,
    Sel,
    Xor3,
    Xnor3,
    Maj,
    Lut(u8),
}

impl Kind {
    fn of(truth: u8) -> Kind {
        use logic::*;
        match truth {
            BUF => Kind::Copy,
            NOT => Kind::Not,
            AND => Kind::And,
            OR => Kind::Or,
            XOR => Kind::Xor,
            ANDNOT => Kind::AndNot,
            ORN => Kind::OrN,
            BIC => Kind::Bic,
            t if t == !AND => Kind::Nand,
            t if t == !OR => Kind::Nor,
            t if t == !XOR => Kind::Xnor,
            SEL => Kind::Sel,
            XOR3 => Kind::Xor3,
            t if t == !XOR3 => Kind::Xnor3,
            MAJ => Kind::Maj,
            t => Kind::Lut(t),
        }
    }

    #[inline(always)]
    fn apply(self, a: u64, b: u64, c: u64) -> u64 {
        match self {
            Kind::Copy => a,
            Kind::Not => !a,
            Kind::And => a & b,
            Kind::Or => a | b,
            Kind::Xor => a ^ b,
            Kind::AndNot => !a & b,
            Kind::OrN => a | !b,
            Kind::Bic => a & !b,
            Kind::Nand => !(a & b),
            Kind::Nor => !(a | b),
            Kind::Xnor => !(a ^ b),
            Kind::Sel => c ^ (a & (b ^ c)),
            Kind::Xor3 => a ^ b ^ c,
            Kind::Xnor3 => !(a ^ b ^ c),
            Kind::Maj => (a & b) | (c & (a | b)),
            Kind::Lut(t) => logic::eval_word(t, a, b, c),
        }
    }
}

/// Operand of an expanded LUT step: one of the LUT's inputs, a constant, or
/// an earlier step.
#[derive(Clone, Copy, Debug)]
enum Slot {
    Src(usize),
    Const(bool),
    Step(usize),
}

/// For every truth table, a sequence of native steps computing it; the last
/// step is the result.
fn expansions() -> &'static [Vec<(Kind, [Slot; 3])>] {
    static TABLE: OnceLock<Vec<Vec<(Kind, [Slot; 3])>>> = OnceLock::new();
    TABLE.get_or_init(|| {
        let cells = [
            ("AND", 2, "a & b", 1.0),
            ("OR", 2, "a | b", 1.0),
            ("XOR", 2, "a ^ b", 1.0),
            ("NOT", 1, "~a", 1.0),
            ("ANDNOT", 2, "~a & b", 1.0),
            ("ORN", 2, "a | ~b", 1.0),
            ("BIC", 2, "a & ~b", 1.0),
            ("NAND", 2, "~(a & b)", 1.0),
            ("NOR", 2, "~(a | b)", 1.0),
            ("XNOR", 2, "~(a ^ b)", 1.0),
            ("XOR3", 3, "a ^ b ^ c", 2.0),
            ("SEL", 3, "(a & b) | (~a & c)", 3.0),
            ("MAJ", 3, "(a & b) | (a & c) | (b & c)", 4.0),
        ];
        let cells: Vec<Cell> = cells
            .iter()
            .map(|&(n, k, e, cost)| Cell::with_ports(n, k, ["a", "b", "c"][..k].iter().map(|s| s.to_string()).collect(), e, cost).expect("native cell"))
            .collect();
        let lib = CellLibrary::new("native", cells).expect("complete");
        let table = SynthesisTable::build(&lib);
        (0..=255u8)
            .map(|f| {
                let mut steps = Vec::new();
                let top = expand(f, &lib, &table, &mut steps);
                if !matches!(top, Slot::Step(_)) {
                    steps.push((Kind::Copy, [top; 3]));
                }
                steps
            })
            .collect()
    })
}

fn expand(f: u8, lib: &CellLibrary, table: &SynthesisTable, steps: &mut Vec<(Kind, [Slot; 3])>) -> Slot {
    match f {
        logic::FALSE => return Slot::Const(false),
        logic::TRUE => return Slot::Const(true),
        _ => {}
    }
    if let Some(v) = logic::VARS.iter().position(|&x| x == f) {
        return Slot::Src(v);
    }
    let r = table.realizations(f)[0];
    let cell = &lib.cells()[r.cell];
    let mut args = [Slot::Const(false); 3];
    for (slot, &kid) in args.iter_mut().zip(&r.kids).take(cell.arity()) {
        *slot = expand(kid, lib, table, steps);
    }
    for k in cell.arity()..3 {
        args[k] = args[0];
    }
    steps.push((Kind::of(cell.truth()), args));
    Slot::Step(steps.len() - 1)
}

#[derive(Clone, Copy, Debug)]
struct XOp {
    kind: Kind,
    dst: u32,
    src: [u32; 3],
}

/// Counters for one execution over a given lane count.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ExecStats {
    pub ops: usize,
    pub native_words: usize,
    /// `ops * native_words`.
    pub word_ops: usize,
}

/// A program compiled to a flat register file: register 0 is all-zeros,
/// 1 all-ones, then the inputs, then the temps.
#[derive(Clone, Debug)]
pub struct Executor {
    name: String,
    input_names: Vec<String>,
    output_names: Vec<String>,
    n_regs: usize,
    /// Native steps; LUT cells expand to several.
    ops: Vec<XOp>,
    program_ops: usize,
    outputs: Vec<u32>,
    op_cells: BTreeMap<String, usize>,
}

impl Executor {
    pub fn new(p: &BitsliceProgram) -> Executor {
        let n_in = p.n_inputs() as u32;
        let reg = |r: &Reg| match *r {
            Reg::Const(false) => 0,
            Reg::Const(true) => 1,
            Reg::Input(i) => 2 + i,
            Reg::Temp(t) => 2 + n_in + t,
        };
        // Scratch registers for expanded LUTs sit after the temps.
        let step_base = 2 + n_in + p.n_temps;
        let mut n_steps = 0;
        let mut ops = Vec::with_capacity(p.ops.len());
        for op in &p.ops {
            let mut src = [0u32; 3];
            for (s, r) in src.iter_mut().zip(&op.srcs) {
                *s = reg(r);
            }
            // Unused slots repeat the first operand, which keeps reads in range.
            for k in op.srcs.len()..3 {
                src[k] = src[0];
            }
            let dst = 2 + n_in + op.dst;
            match Kind::of(op.truth) {
                Kind::Lut(t) => {
                    let steps = &expansions()[t as usize];
                    n_steps = n_steps.max(steps.len());
                    for (i, (kind, args)) in steps.iter().enumerate() {
                        let slot = |s: &Slot| match *s {
                            Slot::Src(v) => src[v],
                            Slot::Const(b) => b as u32,
                            Slot::Step(j) => step_base + j as u32,
                        };
                        let out = if i + 1 == steps.len() { dst } else { step_base + i as u32 };
                        ops.push(XOp { kind: *kind, dst: out, src: [slot(&args[0]), slot(&args[1]), slot(&args[2])] });
                    }
                }
                kind => ops.push(XOp { kind, dst, src }),
            }
        }
        let mut op_cells = BTreeMap::new();
        for op in &p.ops {
            *op_cells.entry(op.cell.clone()).or_insert(0) += 1;
        }
        Executor {
            name: p.name.clone(),
            input_names: p.input_names.clone(),
            output_names: p.output_names.clone(),
            n_regs: step_base as usize + n_steps,
            program_ops: p.ops.len(),
            ops,
            outputs: p.outputs.iter().map(reg).collect(),
            op_cells,
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn input_names(&self) -> &[String] {
        &self.input_names
    }

    pub fn output_names(&self) -> &[String] {
        &self.output_names
    }

    /// Ops of the source program.
    pub fn op_count(&self) -> usize {
        self.program_ops
    }

    /// Word operations the interpreter performs per native word.
    pub fn native_steps(&self) -> usize {
        self.ops.len()
    }

    pub fn op_cells(&self) -> &BTreeMap<String, usize> {
        &self.op_cells
    }

    pub fn stats(&self, lanes: usize) -> ExecStats {
        let native_words = words_for(lanes);
        ExecStats { ops: self.program_ops, native_words, word_ops: self.program_ops * native_words }
    }

    /// Runs over `words` native words per signal. `inputs` is plane-major
    /// (`input i`, word `k` at `i * words + k`), `outputs` likewise.
    pub fn run(&self, inputs: &[u64], outputs: &mut [u64], words: usize, scratch: &mut Vec<u64>) {
        assert_eq!(inputs.len(), self.input_names.len() * words, "input plane words");
        assert_eq!(outputs.len(), self.output_names.len() * words, "output plane words");
        let mut start = 0;
        while start < words {
            let left = words - start;
            let n = if left >= 8 {
                8
            } else if left >= 4 {
                4
            } else if left >= 2 {
                2
            } else {
                1
            };
            match n {
                8 => self.run_chunk::<8>(inputs, outputs, words, start, scratch),
                4 => self.run_chunk::<4>(inputs, outputs, words, start, scratch),
                2 => self.run_chunk::<2>(inputs, outputs, words, start, scratch),
                _ => self.run_chunk::<1>(inputs, outputs, words, start, scratch),
            }
            start += n;
        }
    }

    fn run_chunk<const N: usize>(
        &self,
        inputs: &[u64],
        outputs: &mut [u64],
        words: usize,
        start: usize,
        scratch: &mut Vec<u64>,
    ) {
        scratch.clear();
        scratch.resize(self.n_regs * N, 0);
        let regs = scratch.as_mut_slice();
        regs[N..2 * N].fill(!0);
        for i in 0..self.input_names.len() {
            let base = (2 + i) * N;
            regs[base..base + N].copy_from_slice(&inputs[i * words + start..i * words + start + N]);
        }
        for op in &self.ops {
            let a: [u64; N] = regs[op.src[0] as usize * N..][..N].try_into().unwrap();
            let b: [u64; N] = regs[op.src[1] as usize * N..][..N].try_into().unwrap();
            let c: [u64; N] = regs[op.src[2] as usize * N..][..N].try_into().unwrap();
            let d = &mut regs[op.dst as usize * N..][..N];
            match op.kind {
                // The common two-input cells get their own loops so each
                // compiles to straight vector code.
                Kind::And => (0..N).for_each(|k| d[k] = a[k] & b[k]),
                Kind::Or => (0..N).for_each(|k| d[k] = a[k] | b[k]),
                Kind::Xor => (0..N).for_each(|k| d[k] = a[k] ^ b[k]),
                Kind::AndNot => (0..N).for_each(|k| d[k] = !a[k] & b[k]),
                kind => (0..N).for_each(|k| d[k] = kind.apply(a[k], b[k], c[k])),
            }
        }
        for (o, &r) in self.outputs.iter().enumerate() {
            let src = r as usize * N;
            outputs[o * words + start..o * words + start + N].copy_from_slice(&regs[src..src + N]);
        }
    }
}

/// Splits `a[3]` into `("a", 3)`; a scalar port is plane 0 of its own name.
fn port_of(name: &str) -> (&str, usize) {
    if let Some(open) = name.find('[') {
        if let Some(i) = name[open + 1..].strip_suffix(']').and_then(|s| s.parse().ok()) {
            return (&name[..open], i);
        }
    }
    (name, 0)
}

/// Executes `p` over named blocks, one per input bus, all with the same lane
/// count. Outputs come back grouped by bus.
pub fn exec_program(
    p: &BitsliceProgram,
    inputs: &[(&str, &BitsliceBlock)],
) -> Result<BTreeMap<String, BitsliceBlock>, RtError> {
    let lanes = match inputs.first() {
        Some((_, b)) => b.lanes(),
        None if p.n_inputs() == 0 => 1,
        None => return Err(RtError::MissingInput(p.input_names[0].clone())),
    };
    let words = words_for(lanes);
    let mut flat = Vec::with_capacity(p.n_inputs() * words);
    for name in &p.input_names {
        let (bus, j) = port_of(name);
        let block = inputs
            .iter()
            .find(|(n, _)| *n == bus)
            .map(|(_, b)| *b)
            .ok_or_else(|| RtError::MissingInput(bus.to_string()))?;
        if block.lanes() != lanes {
            return Err(RtError::LaneMismatch { bus: bus.to_string(), expected: lanes, got: block.lanes() });
        }
        if j >= block.nbits() as usize {
            return Err(RtError::MissingPlane { bus: bus.to_string(), plane: j });
        }
        flat.extend_from_slice(block.plane(j));
    }
    let exec = Executor::new(p);
    let mut out = vec![0u64; p.n_outputs() * words];
    exec.run(&flat, &mut out, words, &mut Vec::new());

    let mut widths: BTreeMap<String, u32> = BTreeMap::new();
    for name in &p.output_names {
        let (bus, j) = port_of(name);
        let w = widths.entry(bus.to_string()).or_insert(0);
        *w = (*w).max(j as u32 + 1);
    }
    let mut blocks: BTreeMap<String, BitsliceBlock> =
        widths.into_iter().map(|(bus, w)| (bus, BitsliceBlock::zeros(w, lanes))).collect();
    // Constant-one outputs set bits above the last lane; clear them.
    let tail = if lanes % 64 == 0 { !0 } else { (1u64 << (lanes % 64)) - 1 };
    for (o, name) in p.output_names.iter().enumerate() {
        let (bus, j) = port_of(name);
        let plane = blocks.get_mut(bus).expect("bus collected above").plane_mut(j);
        plane.copy_from_slice(&out[o * words..(o + 1) * words]);
        plane[words - 1] &= tail;
    }
    Ok(blocks)
}
