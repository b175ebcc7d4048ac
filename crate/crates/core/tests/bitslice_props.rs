mod common;

use std::sync::OnceLock;

use proptest::prelude::*;

use common::{config, parse, random_netlist};
use slicefp_core::bitslice::{
    broadcast, exec_program, from_bitslice, to_bitslice, BitsliceBlock, Executor, LaneWidth,
};
use slicefp_core::cells::{builtin_library, synthesize, LibraryId};
use slicefp_core::circuit::{gen_fp_add, gen_fp_mul};
use slicefp_core::codegen::{emit_text, BitsliceProgram, lower, lower_with, Dialect, LowerOptions};
use slicefp_core::fmt::{ref_add, ref_mul, EncodedScalar, ExcClass, FpFormat, Rounding};

fn gates() -> impl Strategy<Value = Vec<(u8, [usize; 3])>> {
    prop::collection::vec((any::<u8>(), any::<[usize; 3]>()), 1..=40)
}

fn lib_strategy() -> impl Strategy<Value = LibraryId> {
    prop::sample::select(LibraryId::ALL.to_vec())
}

/// Every `(lane, value)` pair appears once the shifts wrap around.
#[test]
fn transpose_round_trip_exhaustive_small_widths() {
    for nbits in 1..=4u32 {
        let n = 1u64 << nbits;
        for w in LaneWidth::ALL {
            let lanes = w.lanes();
            for shift in 0..n {
                let values: Vec<u64> = (0..lanes as u64).map(|l| (l + shift) % n).collect();
                let b = to_bitslice(&values, nbits, lanes).unwrap();
                assert_eq!(b.words_per_plane(), w.words());
                assert_eq!(from_bitslice(&b), values);
                for (l, &v) in values.iter().enumerate() {
                    assert_eq!(b.lane(l), v);
                }
            }
        }
    }
}

proptest! {
    #![proptest_config(config(0x5eed_0401, 256))]

    #[test]
    fn transpose_round_trip(nbits in 5u32..=64, w in prop::sample::select(LaneWidth::ALL.to_vec()), seed in any::<u64>()) {
        let lanes = w.lanes();
        let mask = if nbits == 64 { !0 } else { (1u64 << nbits) - 1 };
        let values: Vec<u64> = (0..lanes as u64).map(|l| seed.rotate_left(l as u32).wrapping_mul(l * 2 + 1) & mask).collect();
        let b = to_bitslice(&values, nbits, lanes).unwrap();
        prop_assert_eq!(from_bitslice(&b), values.clone());
        let back = BitsliceBlock::read_from(&b.to_bytes()[..]).unwrap();
        prop_assert_eq!(back, b);
        let v = values[0];
        prop_assert_eq!(from_bitslice(&broadcast(v, nbits, lanes).unwrap()), vec![v; lanes]);
    }

    /// The interpreter agrees with the netlist simulator on mapped netlists.
    #[test]
    fn executor_matches_simulator(inputs in 1usize..=8, gs in gates(), outs in 1usize..=5, lib in lib_strategy(), seed in any::<u64>(), words in 1usize..=9) {
        let n = synthesize(&random_netlist(inputs, &gs, outs), &builtin_library(lib)).unwrap();
        let sim = n.simulator().unwrap();
        let prog = lower(&n).unwrap();
        prop_assert_eq!(&prog.input_names, &n.inputs().to_vec());
        let flat: Vec<u64> = (0..inputs * words).map(|i| seed.rotate_left(i as u32 * 7) ^ (i as u64).wrapping_mul(0x9e37_79b9_7f4a_7c15)).collect();
        let cols: Vec<&[u64]> = flat.chunks(words).collect();
        let want = sim.eval_words(&cols, words);
        let mut got = vec![0u64; n.outputs().len() * words];
        Executor::new(&prog).run(&flat, &mut got, words, &mut Vec::new());
        for (o, col) in want.iter().enumerate() {
            prop_assert_eq!(&got[o * words..(o + 1) * words], &col[..]);
        }
    }

    /// Register reuse changes the schedule's storage, not its results.
    #[test]
    fn reuse_matches_ssa(inputs in 1usize..=8, gs in gates(), lib in lib_strategy(), seed in any::<u64>()) {
        let n = synthesize(&random_netlist(inputs, &gs, 3), &builtin_library(lib)).unwrap();
        let ssa = lower_with(&n, LowerOptions { reuse_registers: false }).unwrap();
        let reuse = lower_with(&n, LowerOptions { reuse_registers: true }).unwrap();
        prop_assert!(ssa.is_ssa());
        prop_assert!(reuse.n_temps <= ssa.n_temps);
        prop_assert_eq!(reuse.ops.len(), ssa.ops.len());
        let words = 4;
        let flat: Vec<u64> = (0..inputs * words).map(|i| seed.wrapping_mul(i as u64 + 1).rotate_left(i as u32)).collect();
        let run = |p| {
            let mut out = vec![0u64; n.outputs().len() * words];
            Executor::new(p).run(&flat, &mut out, words, &mut Vec::new());
            out
        };
        prop_assert_eq!(run(&ssa), run(&reuse));
    }

    #[test]
    fn emission_is_deterministic(inputs in 1usize..=6, gs in gates(), lib in lib_strategy()) {
        let n = synthesize(&random_netlist(inputs, &gs, 2), &builtin_library(lib)).unwrap();
        let p = lower(&n).unwrap();
        for d in [Dialect::Portable64, Dialect::Avx512] {
            let a = emit_text(&p, d).unwrap();
            prop_assert_eq!(&a, &emit_text(&lower(&n).unwrap(), d).unwrap());
            let calls = a.lines().filter(|l| l.starts_with("    ") && l.trim_end().ends_with(");") && !l.contains(" = ")).count();
            prop_assert_eq!(calls, p.ops.len());
        }
        let native = match lib {
            LibraryId::Neon => Some(Dialect::Neon),
            LibraryId::Avx2 => Some(Dialect::Avx2),
            _ => None,
        };
        if let Some(d) = native {
            prop_assert!(emit_text(&p, d).is_ok());
        }
    }
}

fn program_blocks(f: FpFormat, values: &[(u64, u64)]) -> (BitsliceBlock, BitsliceBlock) {
    let lanes = values.len();
    let a: Vec<u64> = values.iter().map(|v| v.0).collect();
    let b: Vec<u64> = values.iter().map(|v| v.1).collect();
    (to_bitslice(&a, f.width(), lanes).unwrap(), to_bitslice(&b, f.width(), lanes).unwrap())
}

fn non_nan(f: FpFormat, x: u64) -> u64 {
    let s = EncodedScalar::from_bits(f, x % (1 << f.width())).unwrap();
    if s.class() == ExcClass::Nan {
        s.bits() & !(1 << (f.width() - 1))
    } else {
        s.bits()
    }
}

fn add_programs() -> &'static [BitsliceProgram; 2] {
    static PROGS: OnceLock<[BitsliceProgram; 2]> = OnceLock::new();
    PROGS.get_or_init(|| {
        [Rounding::Rne, Rounding::Rtz].map(|r| {
            let f = parse("e5m2", r).product_format().unwrap();
            lower(&synthesize(&gen_fp_add(f).unwrap(), &builtin_library(LibraryId::Avx2)).unwrap()).unwrap()
        })
    })
}

proptest! {
    #![proptest_config(config(0x5eed_0402, 32))]

    #[test]
    fn e5m2_add_at_64_lanes(pairs in prop::collection::vec(any::<(u64, u64)>(), 64), rtz in any::<bool>()) {
        let r = if rtz { Rounding::Rtz } else { Rounding::Rne };
        let f = parse("e5m2", r).product_format().unwrap();
        let prog = &add_programs()[rtz as usize];
        let pairs: Vec<(u64, u64)> = pairs.iter().map(|&(a, b)| (non_nan(f, a), non_nan(f, b))).collect();
        let (a, b) = program_blocks(f, &pairs);
        let out = exec_program(prog, &[("a", &a), ("b", &b)]).unwrap();
        let got = from_bitslice(&out["r"]);
        for (l, &(x, y)) in pairs.iter().enumerate() {
            let want = ref_add(&EncodedScalar::from_bits(f, x).unwrap(), &EncodedScalar::from_bits(f, y).unwrap()).unwrap();
            prop_assert_eq!(got[l], want.bits(), "lane {}", l);
        }
    }
}

#[test]
fn lane_width_independence() {
    let f = parse("e4m3", Rounding::Rne);
    let prog = lower(&synthesize(&gen_fp_mul(f).unwrap(), &builtin_library(LibraryId::Avx512Lut3)).unwrap()).unwrap();
    let pairs: Vec<(u64, u64)> = (0..512u64).map(|l| (l * 37 % 1024, (l * 101 + 13) % 1024)).collect();
    let (a, b) = program_blocks(f, &pairs);
    let wide = &exec_program(&prog, &[("a", &a), ("b", &b)]).unwrap()["r"];
    for q in 0..4 {
        let (qa, qb) = (a.slice_lanes(q * 128, 128).unwrap(), b.slice_lanes(q * 128, 128).unwrap());
        let narrow = &exec_program(&prog, &[("a", &qa), ("b", &qb)]).unwrap()["r"];
        assert_eq!(narrow, &wide.slice_lanes(q * 128, 128).unwrap());
    }
    let out = f.product_format().unwrap();
    for (l, &(x, y)) in pairs.iter().enumerate() {
        let want = ref_mul(&EncodedScalar::from_bits(f, x).unwrap(), &EncodedScalar::from_bits(f, y).unwrap(), out).unwrap();
        assert_eq!(wide.lane(l), want.bits());
    }
}

#[test]
fn one_plus_one_is_two() {
    let f = parse("e5m2", Rounding::Rne);
    let one = slicefp_core::fmt::from_binary32(1.0, f).bits();
    let two = slicefp_core::fmt::from_binary32(2.0, f).bits();
    let prog = lower(&synthesize(&gen_fp_add(f).unwrap(), &builtin_library(LibraryId::Neon)).unwrap()).unwrap();
    let a = broadcast(one, f.width(), 32).unwrap();
    let out = exec_program(&prog, &[("a", &a), ("b", &a)]).unwrap();
    assert_eq!(from_bitslice(&out["r"]), vec![two; 32]);
}
