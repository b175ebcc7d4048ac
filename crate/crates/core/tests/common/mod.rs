#![allow(dead_code)]

use proptest::test_runner::{Config, RngSeed};
use slicefp_core::fmt::{FpFormat, Precision, Rounding};

/// Property config with a pinned seed, so failures reproduce.
pub fn config(seed: u64, cases: u32) -> Config {
    Config { cases, rng_seed: RngSeed::Fixed(seed), failure_persistence: None, ..Config::default() }
}

pub fn fmt(we: u32, wf: u32, p: Precision, r: Rounding) -> FpFormat {
    FpFormat::new(we, wf, p, r).unwrap()
}

pub fn parse(s: &str, r: Rounding) -> FpFormat {
    s.parse::<FpFormat>().unwrap().with_rounding(r)
}

/// A random DAG of 3-input LUT gates. Each gate picks its fan-ins among the
/// inputs and earlier gates; the last `outs` gates are outputs.
pub fn random_netlist(inputs: usize, gates: &[(u8, [usize; 3])], outs: usize) -> slicefp_core::netlist::Netlist {
    use slicefp_core::netlist::{Gate, Netlist};
    let mut nets: Vec<String> = (0..inputs).map(|i| format!("x{i}")).collect();
    let mut gs = Vec::new();
    for (k, (truth, picks)) in gates.iter().enumerate() {
        let ins = picks.iter().map(|p| nets[p % nets.len()].clone()).collect();
        gs.push(Gate::new(slicefp_core::cells::lut_name(*truth), *truth, format!("g{k}"), ins));
        nets.push(format!("g{k}"));
    }
    let outputs = (gates.len().saturating_sub(outs)..gates.len()).map(|k| format!("g{k}")).collect();
    Netlist::new("rand", nets[..inputs].to_vec(), outputs, gs, Vec::new()).unwrap()
}
