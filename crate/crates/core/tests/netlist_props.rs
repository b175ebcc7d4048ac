mod common;

use proptest::prelude::*;

use common::config;
use slicefp_core::cells::lut_name;
use slicefp_core::netlist::{
    check_equiv, parse_netlist, refactor, strash, topo_sort, write_netlist, EquivOptions, EquivVerdict, Gate,
    Netlist,
};

/// Raw material for a random DAG: per gate a truth table and three fan-in picks.
#[derive(Clone, Debug)]
struct Shape {
    inputs: usize,
    gates: Vec<(u8, [usize; 3])>,
    outputs: Vec<usize>,
    shuffle: Vec<usize>,
}

fn shape() -> impl Strategy<Value = Shape> {
    (1usize..=7, 1usize..=40).prop_flat_map(|(inputs, n)| {
        (
            Just(inputs),
            prop::collection::vec((any::<u8>(), [any::<usize>(), any::<usize>(), any::<usize>()]), n),
            prop::collection::vec(any::<usize>(), 1..=6),
            Just((0..n).collect::<Vec<_>>()).prop_shuffle(),
        )
            .prop_map(|(inputs, gates, outputs, shuffle)| Shape { inputs, gates, outputs, shuffle })
    })
}

fn build(s: &Shape, shuffled: bool) -> Netlist {
    let mut nets: Vec<String> = (0..s.inputs).map(|i| format!("x{i}")).collect();
    let mut gates = Vec::new();
    for (k, (truth, picks)) in s.gates.iter().enumerate() {
        let ins: Vec<String> = picks.iter().map(|p| nets[p % nets.len()].clone()).collect();
        let out = format!("g{k}");
        gates.push(Gate::new(lut_name(*truth), *truth, out.clone(), ins));
        nets.push(out);
    }
    let mut outputs: Vec<String> = s.outputs.iter().map(|p| format!("g{}", p % s.gates.len())).collect();
    outputs.dedup();
    outputs.sort();
    outputs.dedup();
    if shuffled {
        gates = s.shuffle.iter().map(|&i| gates[i].clone()).collect();
    }
    let inputs = nets[..s.inputs].to_vec();
    Netlist::new("rand", inputs, outputs, gates, Vec::new()).unwrap()
}

fn exhaustive() -> EquivOptions {
    EquivOptions { exhaustive_limit_bits: 16, ..EquivOptions::default() }
}

fn proven(v: EquivVerdict) -> bool {
    matches!(v, EquivVerdict::ProvenExhaustive { .. })
}

proptest! {
    #![proptest_config(config(0x5eed_0101, 200))]

    /// Output lane `l` depends on input lane `l` only.
    #[test]
    fn simulation_is_lane_local(s in shape(), x in prop::collection::vec(any::<[u64; 2]>(), 7), y in prop::collection::vec(any::<[u64; 2]>(), 7), mask in any::<[u64; 2]>()) {
        let n = build(&s, false);
        let sim = n.simulator().unwrap();
        let k = s.inputs;
        let xs: Vec<&[u64]> = x[..k].iter().map(|w| &w[..]).collect();
        let ys: Vec<&[u64]> = y[..k].iter().map(|w| &w[..]).collect();
        let zs: Vec<[u64; 2]> = (0..k).map(|i| [0, 1].map(|w| (x[i][w] & mask[w]) | (y[i][w] & !mask[w]))).collect();
        let zs: Vec<&[u64]> = zs.iter().map(|w| &w[..]).collect();
        let (ox, oy, oz) = (sim.eval_words(&xs, 2), sim.eval_words(&ys, 2), sim.eval_words(&zs, 2));
        for o in 0..ox.len() {
            for w in 0..2 {
                prop_assert_eq!(oz[o][w], (ox[o][w] & mask[w]) | (oy[o][w] & !mask[w]));
            }
        }
    }

    #[test]
    fn rewrites_preserve_behaviour(s in shape()) {
        let n = build(&s, false);
        let sim = n.simulator().unwrap();
        let g = strash(&n).unwrap();
        prop_assert!(proven(check_equiv(&sim, &g, &exhaustive()).unwrap()));
        let r = refactor(&g, 4);
        prop_assert!(proven(check_equiv(&sim, &r, &exhaustive()).unwrap()));
        prop_assert!(r.and_count() <= g.and_count());
        let sorted = topo_sort(&build(&s, true)).unwrap();
        prop_assert!(proven(check_equiv(&sim, &sorted.simulator().unwrap(), &exhaustive()).unwrap()));
    }

    #[test]
    fn topo_sort_is_idempotent(s in shape()) {
        let once = topo_sort(&build(&s, true)).unwrap();
        prop_assert_eq!(topo_sort(&once).unwrap(), once.clone());
        prop_assert_eq!(topo_sort(&build(&s, false)).unwrap(), build(&s, false));
        let pos = |net: &str| once.gates().iter().position(|g| g.out == net);
        for (i, g) in once.gates().iter().enumerate() {
            for inp in &g.ins {
                prop_assert!(pos(inp).map_or(true, |p| p < i));
            }
        }
    }

    #[test]
    fn text_round_trip(s in shape()) {
        let n = build(&s, false);
        let text = write_netlist(&n).unwrap();
        let back = parse_netlist(&text).unwrap();
        prop_assert_eq!(write_netlist(&back).unwrap(), text);
        prop_assert!(proven(check_equiv(&n.simulator().unwrap(), &back.simulator().unwrap(), &exhaustive()).unwrap()));
    }
}

#[test]
fn cycles_are_rejected() {
    let text = "module loop\ninput a\noutput y\ngate AND y a z\ngate NOT z y\nendmodule\n";
    let n = parse_netlist(text).unwrap();
    assert!(topo_sort(&n).is_err());
    assert!(n.simulator().is_err());
    assert!(strash(&n).is_err());
}

#[test]
fn strash_merges_duplicates() {
    let text = "module dup\ninput a b\noutput y\ngate AND p a b\ngate AND q b a\ngate XOR y p q\nendmodule\n";
    let g = strash(&parse_netlist(text).unwrap()).unwrap();
    assert_eq!(g.cleanup().and_count(), 0);
}
