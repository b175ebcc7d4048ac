use std::cmp::Reverse;
use std::collections::BinaryHeap;

use super::{Netlist, NetlistError};

/// Returns the netlist with gates reordered so every gate follows its
/// fan-in. Among ready gates the original order is kept, so an already
/// sorted netlist comes back unchanged.
pub fn topo_sort(n: &Netlist) -> Result<Netlist, NetlistError> {
    let drv = n.driver_index();
    let gates = n.gates();
    let mut pending = vec![0usize; gates.len()];
    let mut fanout: Vec<Vec<usize>> = vec![Vec::new(); gates.len()];
    for (i, g) in gates.iter().enumerate() {
        for net in &g.ins {
            if let Some(&d) = drv.get(net.as_str()) {
                pending[i] += 1;
                fanout[d].push(i);
            }
        }
    }
    let mut ready: BinaryHeap<Reverse<usize>> =
        (0..gates.len()).filter(|&i| pending[i] == 0).map(Reverse).collect();
    let mut order = Vec::with_capacity(gates.len());
    while let Some(Reverse(i)) = ready.pop() {
        order.push(i);
        for &j in &fanout[i] {
            pending[j] -= 1;
            if pending[j] == 0 {
                ready.push(Reverse(j));
            }
        }
    }
    if order.len() != gates.len() {
        let stuck = (0..gates.len()).find(|&i| pending[i] > 0).map(|i| cycle_net(n, &pending, i));
        return Err(NetlistError::Cycle(stuck.unwrap_or_default()));
    }
    Ok(n.replace_gates(order.into_iter().map(|i| gates[i].clone()).collect()))
}

/// Walks back through unresolved fan-ins from `start` until a gate repeats;
/// that gate lies on a cycle.
fn cycle_net(n: &Netlist, pending: &[usize], start: usize) -> String {
    let drv = n.driver_index();
    let gates = n.gates();
    let mut seen = vec![false; gates.len()];
    let mut cur = start;
    while !seen[cur] {
        seen[cur] = true;
        let next = gates[cur]
            .ins
            .iter()
            .filter_map(|net| drv.get(net.as_str()).copied())
            .find(|&d| pending[d] > 0);
        match next {
            Some(d) => cur = d,
            None => break,
        }
    }
    gates[cur].out.clone()
}
