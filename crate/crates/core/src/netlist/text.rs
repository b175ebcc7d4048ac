use std::fmt::Write as _;

use super::{topo_sort, Gate, Netlist, NetlistError};

/// Parses netlist text, resolving cell names against the builtin libraries.
pub fn parse_netlist(text: &str) -> Result<Netlist, NetlistError> {
    parse_netlist_with(text, &crate::cells::builtin_cell_truth)
}

/// Parses netlist text with a caller-supplied cell resolver.
pub fn parse_netlist_with(
    text: &str,
    resolve: &dyn Fn(&str) -> Option<u8>,
) -> Result<Netlist, NetlistError> {
    let mut name: Option<String> = None;
    let mut inputs = Vec::new();
    let mut outputs = Vec::new();
    let mut gates = Vec::new();
    let mut assigns = Vec::new();
    let mut lines_of: Vec<(String, usize)> = Vec::new();
    let mut ended = false;
    let syntax = |line: usize, msg: &str| NetlistError::Syntax { line, msg: msg.to_string() };

    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let body = raw.split('#').next().unwrap_or("");
        let mut toks = body.split_whitespace();
        let Some(kw) = toks.next() else { continue };
        if ended {
            return Err(syntax(line, "text after endmodule"));
        }
        let rest: Vec<&str> = toks.collect();
        match kw {
            "module" => {
                if name.is_some() {
                    return Err(syntax(line, "second module header"));
                }
                match rest.as_slice() {
                    [n] => name = Some(n.to_string()),
                    _ => return Err(syntax(line, "expected `module <name>`")),
                }
            }
            _ if name.is_none() => return Err(syntax(line, "expected `module` first")),
            "input" => {
                for n in &rest {
                    lines_of.push((n.to_string(), line));
                }
                inputs.extend(rest.iter().map(|s| s.to_string()));
            }
            "output" => outputs.extend(rest.iter().map(|s| s.to_string())),
            "gate" => {
                if rest.len() < 2 || rest.len() > 5 {
                    return Err(syntax(line, "expected `gate <CELL> <out> <in>...`"));
                }
                let cell = rest[0];
                let truth = resolve(cell).ok_or_else(|| NetlistError::UnknownCell {
                    cell: cell.to_string(),
                    line,
                })?;
                lines_of.push((rest[1].to_string(), line));
                gates.push(Gate::new(cell, truth, rest[1], rest[2..].iter().map(|s| s.to_string()).collect()));
            }
            "assign" => match rest.as_slice() {
                [port, src] => {
                    lines_of.push((port.to_string(), line));
                    assigns.push((port.to_string(), src.to_string()));
                }
                _ => return Err(syntax(line, "expected `assign <port> <net>`")),
            },
            "endmodule" => {
                if !rest.is_empty() {
                    return Err(syntax(line, "unexpected tokens after endmodule"));
                }
                ended = true;
            }
            other => return Err(syntax(line, &format!("unknown keyword `{other}`"))),
        }
    }
    let Some(name) = name else {
        return Err(syntax(1, "missing module header"));
    };
    if !ended {
        return Err(syntax(text.lines().count().max(1), "missing endmodule"));
    }
    let line_of = |net: &str| lines_of.iter().find(|(n, _)| n == net).map_or(0, |(_, l)| *l);
    Netlist::new(name, inputs, outputs, gates, assigns).map_err(|e| match e {
        NetlistError::DuplicateDriver { net, .. } => {
            let line = lines_of.iter().filter(|(n, _)| *n == net).nth(1).map_or(0, |(_, l)| *l);
            NetlistError::DuplicateDriver { net, line }
        }
        NetlistError::UndefinedNet { net, .. } => {
            let line = use_line(text, &net);
            NetlistError::UndefinedNet { net, line }
        }
        NetlistError::Arity { out, cell, expected, got } => NetlistError::Syntax {
            line: line_of(&out),
            msg: format!("cell {cell} needs {expected} inputs, got {got}"),
        },
        other => other,
    })
}

/// First gate or assign line that reads `net`.
fn use_line(text: &str, net: &str) -> usize {
    for (idx, raw) in text.lines().enumerate() {
        let toks: Vec<&str> = raw.split('#').next().unwrap_or("").split_whitespace().collect();
        let reads = match toks.first() {
            Some(&"gate") if toks.len() > 3 => &toks[3..],
            Some(&"assign") if toks.len() == 3 => &toks[2..],
            _ => continue,
        };
        if reads.contains(&net) {
            return idx + 1;
        }
    }
    0
}

fn push_list(out: &mut String, kw: &str, nets: &[String]) {
    out.push_str(kw);
    for n in nets {
        out.push(' ');
        out.push_str(n);
    }
    out.push('\n');
}

/// Canonical text with gates in topological order.
pub fn write_netlist(n: &Netlist) -> Result<String, NetlistError> {
    let sorted = topo_sort(n)?;
    let mut out = String::new();
    let _ = writeln!(out, "module {}", sorted.name());
    push_list(&mut out, "input", sorted.inputs());
    push_list(&mut out, "output", sorted.outputs());
    for g in sorted.gates() {
        let _ = write!(out, "gate {} {}", g.cell, g.out);
        for i in &g.ins {
            out.push(' ');
            out.push_str(i);
        }
        out.push('\n');
    }
    for (port, src) in sorted.assigns() {
        let _ = writeln!(out, "assign {port} {src}");
    }
    out.push_str("endmodule\n");
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::super::test_util::*;
    use super::*;

    const FA: &str = "module fa
input a b cin
output sum cout
gate XOR t a b
gate XOR sum t cin
gate AND u a b
gate AND v t cin
gate OR cout u v
endmodule
";

    #[test]
    fn full_adder_round_trip() {
        let n = parse_netlist(FA).unwrap();
        assert_eq!(n, full_adder());
        assert_eq!(write_netlist(&n).unwrap(), FA);
    }

    #[test]
    fn undefined_net_has_line() {
        let text = "module m\ninput a\noutput y\n\ngate NOT y ghost\nendmodule\n";
        match parse_netlist(text) {
            Err(NetlistError::UndefinedNet { net, line }) => {
                assert_eq!(net, "ghost");
                assert_eq!(line, 5);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn duplicate_driver_has_line() {
        let text = "module m\ninput a\noutput y\ngate NOT y a\ngate NOT y a\nendmodule\n";
        assert!(matches!(parse_netlist(text), Err(NetlistError::DuplicateDriver { line: 5, .. })));
    }

    #[test]
    fn reverse_order_is_normalized() {
        let rev = "module fa
input a b cin
output sum cout
gate OR cout u v # carry
gate AND v t cin
gate AND u a b
gate XOR sum t cin
gate XOR t a b
endmodule
";
        let n = parse_netlist(rev).unwrap();
        let text = write_netlist(&n).unwrap();
        let sorted = parse_netlist(&text).unwrap();
        assert_eq!(write_netlist(&sorted).unwrap(), text);
        let pos = |net: &str| sorted.gates().iter().position(|g| g.out == net).unwrap();
        assert!(pos("t") < pos("v") && pos("v") < pos("cout"));
    }

    #[test]
    fn syntax_errors() {
        assert!(matches!(parse_netlist("input a\n"), Err(NetlistError::Syntax { line: 1, .. })));
        assert!(matches!(
            parse_netlist("module m\ninput a\noutput y\nwire y\nendmodule"),
            Err(NetlistError::Syntax { line: 4, .. })
        ));
        assert!(matches!(
            parse_netlist("module m\ninput a\noutput y\ngate FOO y a\nendmodule"),
            Err(NetlistError::UnknownCell { line: 4, .. })
        ));
        assert!(matches!(
            parse_netlist("module m\ninput a\noutput y\ngate NOT y a\n"),
            Err(NetlistError::Syntax { .. })
        ));
    }

    #[test]
    fn constants_and_passthrough() {
        let text = "module c\ninput a\noutput y z k\ngate CONST1 k\nassign y a\nassign z CONST0\nendmodule\n";
        let n = parse_netlist(text).unwrap();
        assert_eq!(write_netlist(&n).unwrap(), text);
        assert_eq!(n.gate_count(), 1);
    }
}
