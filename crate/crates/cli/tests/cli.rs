use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn slicefp(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_slicefp")).args(args).output().expect("binary runs")
}

fn ok(args: &[&str]) -> String {
    let out = slicefp(args);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn gen_is_deterministic_and_checks_exhaustively() {
    let dir = tempfile::tempdir().unwrap();
    let net = dir.path().join("mul.net");
    ok(&["gen", "--op", "mul", "--fmt", "e5m2", "--round", "rne", "--out", path(&net)]);
    let text = fs::read_to_string(&net).unwrap();
    assert!(text.starts_with("module fp_mul_e5m2_rne_single") || text.contains("module fp_mul_e5m2_rne_single"));
    assert_eq!(ok(&["gen", "--op", "mul", "--fmt", "e5m2", "--round", "rne"]), text);
    let verdict = ok(&["check", "--netlist", path(&net), "--oracle", "mul"]);
    assert_eq!(verdict.trim(), "proven_exhaustive 1048576 vectors");
}

#[test]
fn map_emit_and_check_against() {
    let dir = tempfile::tempdir().unwrap();
    let net = dir.path().join("add.net");
    let mapped = dir.path().join("add.avx512.net");
    ok(&["gen", "--op", "add", "--fmt", "e4m3", "--round", "rtz", "--class", "single", "--out", path(&net)]);
    let out = slicefp(&["map", "--netlist", path(&net), "--lib", "avx512_lut3", "--out", path(&mapped), "--report"]);
    assert!(out.status.success());
    let report = String::from_utf8(out.stderr).unwrap();
    let total: usize = report.lines().last().unwrap().strip_prefix("total ").unwrap().parse().unwrap();
    let gates = fs::read_to_string(&mapped).unwrap().lines().filter(|l| l.starts_with("gate ")).count();
    assert_eq!(total, gates);
    let v = ok(&["check", "--netlist", path(&mapped), "--against", path(&net)]);
    assert!(v.starts_with("proven_exhaustive"), "{v}");
    let v = ok(&["check", "--netlist", path(&mapped), "--oracle", "add"]);
    assert!(v.starts_with("proven_exhaustive"), "{v}");

    let c = ok(&["emit", "--netlist", path(&mapped), "--dialect", "avx512"]);
    assert!(c.contains("#include <immintrin.h>"));
    assert!(c.contains("_mm512_ternarylogic_epi64"));
    assert!(c.contains("static inline void fp_add_e4m3_rtz_single("));
    let generic = slicefp(&["emit", "--netlist", path(&mapped), "--dialect", "avx2"]);
    assert!(!generic.status.success());
}

#[test]
fn check_reports_counterexamples() {
    let dir = tempfile::tempdir().unwrap();
    let net = dir.path().join("id.net");
    let ports: Vec<String> = (0..6).map(|i| format!("a[{i}]")).collect();
    let outs: Vec<String> = (0..6).map(|i| format!("r[{i}]")).collect();
    let mut text = format!("module identity\ninput {}\noutput {}\n", ports.join(" "), outs.join(" "));
    for i in 0..6 {
        text.push_str(&format!("gate BUF r[{i}] a[{i}]\n"));
    }
    text.push_str("endmodule\n");
    fs::write(&net, text).unwrap();
    let out = slicefp(&["check", "--netlist", path(&net), "--oracle", "relu", "--fmt", "e2m1", "--round", "rne", "--class", "single"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8(out.stdout).unwrap().starts_with("counterexample"));
}

#[test]
fn report_and_bench_write_csv() {
    let dir = tempfile::tempdir().unwrap();
    let report = dir.path().join("report.csv");
    ok(&["report", "--formats", "e4m3", "--libs", "avx2,avx512_lut3", "--round", "rtz", "--out", path(&report)]);
    let text = fs::read_to_string(&report).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "format,rounding,class,op,library,cells,generic_gates");
    assert_eq!(lines.len(), 5);
    assert!(lines[1..].iter().all(|l| l.starts_with("e4m3,rtz,single,")));

    let bench = dir.path().join("bench.csv");
    ok(&[
        "bench", "--formats", "e4m3", "--libs", "avx512_lut3", "--lanes", "32,64", "--h", "5", "--w", "5", "--c", "4",
        "--m", "8", "--reps", "1", "--reference", "--out", path(&bench),
    ]);
    let text = fs::read_to_string(&bench).unwrap();
    let rows: Vec<&str> = text.lines().filter(|l| !l.starts_with('#')).collect();
    assert_eq!(rows[0], "format,rounding,class,library,lanes,mul_ops,add_ops,macs,nanos,macs_per_sec");
    assert_eq!(rows.len(), 4);
    assert!(rows[1].starts_with("e4m3,rne,single,reference,1,0,0,"));
    assert!(rows[2].starts_with("e4m3,rne,single,avx512_lut3,32,"));
    assert!(rows[3].starts_with("e4m3,rne,single,avx512_lut3,64,"));
}

#[test]
fn bad_arguments_exit_with_two() {
    let out = slicefp(&["gen", "--op", "div", "--fmt", "e5m2"]);
    assert_eq!(out.status.code(), Some(2));
    let out = slicefp(&["map", "--netlist", "/nonexistent.net", "--lib", "avx2"]);
    assert_eq!(out.status.code(), Some(2));
}
