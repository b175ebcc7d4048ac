use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};

use slicefp_core::cells::{
    builtin_cell_truth, builtin_library, cell_count_report, parse_library, synthesize, CellLibrary, LibraryId,
};
use slicefp_core::circuit::{gen_fp_add, gen_fp_mul, gen_relu, parse_module_name, FpOracle, Op};
use slicefp_core::codegen::{emit_text, lower, Dialect};
use slicefp_core::conv::{benchmark, benchmark_reference, write_csv, ConvLayerSpec, LayoutParams, MacPrograms};
use slicefp_core::fmt::{FpFormat, Precision, Rounding};
use slicefp_core::netlist::{check_equiv, parse_netlist_with, write_netlist, EquivOptions, Netlist};

#[derive(Parser)]
#[command(name = "slicefp", version, about = "Custom-precision FP circuits as bitslice programs")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Generate an FP operator netlist.
    Gen(GenArgs),
    /// Map a netlist onto a cell library.
    Map(MapArgs),
    /// Lower a mapped netlist and print it as source text.
    Emit(EmitArgs),
    /// Check a netlist against the reference arithmetic or another netlist.
    Check(CheckArgs),
    /// Time the convolution MAC loop and print CSV.
    Bench(BenchArgs),
    /// Mapped cell counts across formats and libraries as CSV.
    Report(ReportArgs),
}

#[derive(Args)]
struct FormatArgs {
    /// e<wE>m<wF>, with an `x` suffix for the extended class.
    #[arg(long = "fmt")]
    format: String,
    #[arg(long = "round", default_value = "rne")]
    rounding: String,
    /// Overrides the class implied by the format suffix.
    #[arg(long = "class")]
    class: Option<String>,
}

impl FormatArgs {
    fn resolve(&self) -> Result<FpFormat> {
        parse_format(&self.format, &self.rounding, self.class.as_deref())
    }
}

fn parse_format(format: &str, rounding: &str, class: Option<&str>) -> Result<FpFormat> {
    let mut f: FpFormat = format.parse()?;
    f = f.with_rounding(rounding.parse::<Rounding>()?);
    if let Some(c) = class {
        f = f.with_precision(c.parse::<Precision>()?);
    }
    Ok(f)
}

#[derive(Args)]
struct GenArgs {
    #[arg(long)]
    op: String,
    #[command(flatten)]
    format: FormatArgs,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct MapArgs {
    #[arg(long)]
    netlist: PathBuf,
    /// Builtin library id or a library file.
    #[arg(long)]
    lib: String,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Print the per-cell report to stderr.
    #[arg(long)]
    report: bool,
}

#[derive(Args)]
struct EmitArgs {
    #[arg(long)]
    netlist: PathBuf,
    #[arg(long)]
    dialect: String,
    /// Library file for netlists using cells outside the builtin set.
    #[arg(long)]
    lib: Option<String>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct CheckArgs {
    #[arg(long)]
    netlist: PathBuf,
    /// Compare against the reference operator (mul, add or relu).
    #[arg(long, conflicts_with = "against")]
    oracle: Option<String>,
    /// Compare against another netlist.
    #[arg(long)]
    against: Option<PathBuf>,
    /// Operand format for the oracle; read from the module name if absent.
    #[arg(long = "fmt")]
    format: Option<String>,
    #[arg(long = "round")]
    rounding: Option<String>,
    #[arg(long = "class")]
    class: Option<String>,
    #[arg(long)]
    lib: Option<String>,
    /// Random vectors when the input space is too large to sweep.
    #[arg(long, default_value_t = 1 << 20)]
    random: u64,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Largest input count checked exhaustively.
    #[arg(long, default_value_t = 24)]
    exhaustive_bits: u32,
}

#[derive(Args)]
struct BenchArgs {
    #[arg(long = "formats", value_delimiter = ',', default_value = "e5m2")]
    formats: Vec<String>,
    #[arg(long = "round", default_value = "rne")]
    rounding: String,
    #[arg(long = "class", default_value = "single")]
    class: String,
    #[arg(long = "libs", value_delimiter = ',', default_value = "avx2")]
    libs: Vec<String>,
    #[arg(long = "lanes", value_delimiter = ',', default_value = "64")]
    lanes: Vec<usize>,
    #[arg(long, default_value_t = 14)]
    h: usize,
    #[arg(long, default_value_t = 14)]
    w: usize,
    #[arg(long, default_value_t = 64)]
    c: usize,
    #[arg(long, default_value_t = 64)]
    m: usize,
    #[arg(long, default_value_t = 3)]
    k: usize,
    #[arg(long, default_value_t = 1)]
    stride: usize,
    #[arg(long)]
    depthwise: bool,
    #[arg(long, default_value_t = 3)]
    reps: usize,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Also time the scalar reference path.
    #[arg(long)]
    reference: bool,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ReportArgs {
    #[arg(long = "formats", value_delimiter = ',', default_value = "e4m3,e5m2,e5m3,e5m10")]
    formats: Vec<String>,
    #[arg(long = "libs", value_delimiter = ',', default_value = "avx2,neon,avx512_lut3")]
    libs: Vec<String>,
    #[arg(long = "round", value_delimiter = ',', default_value = "rne,rtz")]
    rounding: Vec<String>,
    #[arg(long = "class", default_value = "single")]
    class: String,
    #[arg(long)]
    out: Option<PathBuf>,
}

fn load_library(spec: &str) -> Result<CellLibrary> {
    if let Ok(id) = spec.parse::<LibraryId>() {
        return Ok(builtin_library(id));
    }
    let text = fs::read_to_string(spec).with_context(|| format!("`{spec}` is neither a builtin library nor a readable file"))?;
    Ok(parse_library(&text)?)
}

fn load_netlist(path: &Path, lib: Option<&CellLibrary>) -> Result<Netlist> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let resolve = |name: &str| lib.and_then(|l| l.cell(name)).map(|c| c.truth()).or_else(|| builtin_cell_truth(name));
    parse_netlist_with(&text, &resolve).with_context(|| format!("parsing {}", path.display()))
}

fn write_output(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(p) => fs::write(p, text).with_context(|| format!("writing {}", p.display())),
        None => {
            io::stdout().write_all(text.as_bytes())?;
            Ok(())
        }
    }
}

fn gen(a: &GenArgs) -> Result<()> {
    let op: Op = a.op.parse()?;
    let f = a.format.resolve()?;
    let n = match op {
        Op::Mul => gen_fp_mul(f)?,
        Op::Add => gen_fp_add(f)?,
        Op::Relu => gen_relu(f)?,
    };
    write_output(a.out.as_deref(), &write_netlist(&n)?)
}

fn map(a: &MapArgs) -> Result<()> {
    let lib = load_library(&a.lib)?;
    let n = load_netlist(&a.netlist, None)?;
    let mapped = synthesize(&n, &lib)?;
    if a.report {
        eprintln!("{}", cell_count_report(&mapped));
    }
    write_output(a.out.as_deref(), &write_netlist(&mapped)?)
}

fn emit(a: &EmitArgs) -> Result<()> {
    let dialect: Dialect = a.dialect.parse()?;
    let lib = a.lib.as_deref().map(load_library).transpose()?;
    let n = load_netlist(&a.netlist, lib.as_ref())?;
    let text = emit_text(&lower(&n)?, dialect)?;
    write_output(a.out.as_deref(), &text)
}

fn check(a: &CheckArgs) -> Result<bool> {
    let lib = a.lib.as_deref().map(load_library).transpose()?;
    let n = load_netlist(&a.netlist, lib.as_ref())?;
    let sim = n.simulator()?;
    let opts = EquivOptions { exhaustive_limit_bits: a.exhaustive_bits, n_random: a.random, seed: a.seed, ..Default::default() };
    let verdict = match (&a.oracle, &a.against) {
        (Some(op), None) => {
            let op: Op = op.parse()?;
            let named = parse_module_name(n.name());
            let f = match (&a.format, named) {
                (Some(fmt), _) => parse_format(fmt, a.rounding.as_deref().unwrap_or("rne"), a.class.as_deref())?,
                (None, Some((named_op, f))) => {
                    if named_op != op {
                        bail!("module {} is a {named_op} circuit, not {op}", n.name());
                    }
                    let r = match &a.rounding {
                        Some(r) => r.parse()?,
                        None => f.rounding(),
                    };
                    let c = match &a.class {
                        Some(c) => c.parse()?,
                        None => f.precision(),
                    };
                    f.with_rounding(r).with_precision(c)
                }
                (None, None) => bail!("cannot tell the format of module {}; pass --fmt", n.name()),
            };
            check_equiv(&sim, &FpOracle::new(op, f)?, &opts)?
        }
        (None, Some(other)) => {
            let m = load_netlist(other, lib.as_ref())?;
            check_equiv(&sim, &m.simulator()?, &opts)?
        }
        _ => bail!("pass exactly one of --oracle or --against"),
    };
    println!("{verdict}");
    Ok(verdict.is_equivalent())
}

fn bench(a: &BenchArgs) -> Result<()> {
    let mut rows = Vec::new();
    for fs in &a.formats {
        let f = parse_format(fs, &a.rounding, Some(&a.class))?;
        let mut spec = ConvLayerSpec::new(a.h, a.w, a.c, a.m, a.k, f);
        spec.stride = a.stride;
        spec.depthwise = a.depthwise;
        spec.validate()?;
        if a.reference {
            rows.push(benchmark_reference(&spec, a.reps, a.seed)?);
        }
        for l in &a.libs {
            let progs = MacPrograms::build(f, &load_library(l)?)?;
            for &lanes in &a.lanes {
                rows.push(benchmark(&spec, LayoutParams::new(f, lanes)?, &progs, a.reps, a.seed)?);
            }
        }
    }
    let mut buf = Vec::new();
    write_csv(&mut buf, &rows)?;
    write_output(a.out.as_deref(), &String::from_utf8(buf)?)
}

fn report(a: &ReportArgs) -> Result<()> {
    let mut text = String::from("format,rounding,class,op,library,cells,generic_gates\n");
    let libs: Vec<CellLibrary> = a.libs.iter().map(|l| load_library(l)).collect::<Result<_>>()?;
    for fs in &a.formats {
        for r in &a.rounding {
            let f = parse_format(fs, r, Some(&a.class))?;
            for op in [Op::Mul, Op::Add] {
                let n = match op {
                    Op::Mul => gen_fp_mul(f)?,
                    _ => gen_fp_add(f)?,
                };
                for lib in &libs {
                    let mapped = synthesize(&n, lib)?;
                    text.push_str(&format!(
                        "e{}m{},{},{},{},{},{},{}\n",
                        f.exp_bits(),
                        f.frac_bits(),
                        f.rounding(),
                        f.precision(),
                        op,
                        lib.name(),
                        mapped.gate_count(),
                        n.gate_count()
                    ));
                }
            }
        }
    }
    write_output(a.out.as_deref(), &text)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.cmd {
        Cmd::Gen(a) => gen(a).map(|_| true),
        Cmd::Map(a) => map(a).map(|_| true),
        Cmd::Emit(a) => emit(a).map(|_| true),
        Cmd::Check(a) => check(a),
        Cmd::Bench(a) => bench(a).map(|_| true),
        Cmd::Report(a) => report(a).map(|_| true),
    };
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
