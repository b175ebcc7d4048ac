use std::io::{self, Write};
use std::time::Instant;

use super::slice::{accumulate, check_all, prepare, MacPrograms};
use super::{reference_accumulate, synthetic_inputs, ConvError, ConvLayerSpec, LayoutParams};

/// Pins the benchmark's worker thread count when set to a positive integer.
pub const THREADS_ENV: &str = "SLICEFP_THREADS";

pub const CSV_HEADER: &str = "format,rounding,class,library,lanes,mul_ops,add_ops,macs,nanos,macs_per_sec";

/// One timed configuration. `nanos` is the mean wall time of the MAC loop
/// over the repetitions and varies from run to run; every other field is
/// deterministic.
#[derive(Clone, Debug, PartialEq)]
pub struct BenchRecord {
    pub format: String,
    pub rounding: String,
    pub class: String,
    pub library: String,
    pub lanes: usize,
    pub mul_ops: usize,
    pub add_ops: usize,
    pub macs: u64,
    pub nanos: u64,
    pub macs_per_sec: f64,
}

impl BenchRecord {
    fn new(spec: &ConvLayerSpec, library: &str, lanes: usize, ops: (usize, usize), nanos: u64) -> BenchRecord {
        let macs = spec.macs();
        let f = spec.format;
        BenchRecord {
            format: format!("e{}m{}", f.exp_bits(), f.frac_bits()),
            rounding: f.rounding().as_str().to_string(),
            class: f.precision().as_str().to_string(),
            library: library.to_string(),
            lanes,
            mul_ops: ops.0,
            add_ops: ops.1,
            macs,
            nanos,
            macs_per_sec: macs as f64 * 1e9 / nanos.max(1) as f64,
        }
    }

    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{},{},{},{},{},{},{:.0}",
            self.format,
            self.rounding,
            self.class,
            self.library,
            self.lanes,
            self.mul_ops,
            self.add_ops,
            self.macs,
            self.nanos,
            self.macs_per_sec
        )
    }
}

/// Writes a comment line on what is timed, the header, then the rows.
pub fn write_csv(mut w: impl Write, rows: &[BenchRecord]) -> io::Result<()> {
    writeln!(w, "# timed region: mul+add loop; relu, transposes and setup excluded; nanos is the mean per layer")?;
    writeln!(w, "{CSV_HEADER}")?;
    for r in rows {
        writeln!(w, "{}", r.csv_row())?;
    }
    Ok(())
}

fn pinned_threads() -> Option<usize> {
    std::env::var(THREADS_ENV).ok()?.trim().parse().ok().filter(|&n| n > 0)
}

fn run_pinned<T: Send>(f: impl FnOnce() -> T + Send) -> T {
    match pinned_threads().and_then(|n| rayon::ThreadPoolBuilder::new().num_threads(n).build().ok()) {
        Some(pool) => pool.install(f),
        None => f(),
    }
}

fn mean_nanos(repetitions: usize, mut f: impl FnMut()) -> u64 {
    let reps = repetitions.max(1);
    let start = Instant::now();
    for _ in 0..reps {
        f();
    }
    (start.elapsed().as_nanos() / reps as u128) as u64
}

/// Times the bitslice MAC loop on synthetic data.
pub fn benchmark(
    spec: &ConvLayerSpec,
    layout: LayoutParams,
    progs: &MacPrograms,
    repetitions: usize,
    seed: u64,
) -> Result<BenchRecord, ConvError> {
    let (ifm, kernels) = synthetic_inputs(spec, seed)?;
    check_all(spec, &ifm, &kernels, layout, progs)?;
    let prep = prepare(spec, &kernels, layout)?;
    let nanos = run_pinned(|| {
        mean_nanos(repetitions, || {
            std::hint::black_box(accumulate(spec, &ifm, progs, &prep));
        })
    });
    Ok(BenchRecord::new(spec, progs.library(), layout.lanes, (progs.mul_ops(), progs.add_ops()), nanos))
}

/// Times the scalar reference accumulation on the same synthetic data. The
/// row has library `reference`, one lane and no op counts.
pub fn benchmark_reference(spec: &ConvLayerSpec, repetitions: usize, seed: u64) -> Result<BenchRecord, ConvError> {
    let (ifm, kernels) = synthetic_inputs(spec, seed)?;
    reference_accumulate(spec, &ifm, &kernels)?;
    let nanos = mean_nanos(repetitions, || {
        std::hint::black_box(reference_accumulate(spec, &ifm, &kernels).expect("checked above"));
    });
    Ok(BenchRecord::new(spec, "reference", 1, (0, 0), nanos))
}
