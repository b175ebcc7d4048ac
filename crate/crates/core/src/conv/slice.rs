use rayon::prelude::*;

use super::{check_inputs, ifm_index, kernel_index, ConvError, ConvLayerSpec, LayoutParams, PackedTensor};
use crate::bitslice::{to_bitslice, Executor};
use crate::cells::{synthesize, CellLibrary};
use crate::circuit::{gen_fp_add, gen_fp_mul, gen_relu};
use crate::codegen::{lower, BitsliceProgram};
use crate::fmt::FpFormat;

/// Compiled multiplier, accumulator adder and ReLU for one format.
#[derive(Clone, Debug)]
pub struct MacPrograms {
    format: FpFormat,
    library: String,
    mul: Executor,
    add: Executor,
    relu: Executor,
}

fn expect_ports(p: &BitsliceProgram, ins: &[(&str, u32)], out: u32) -> Result<(), ConvError> {
    let want_in: Vec<String> = ins.iter().flat_map(|&(bus, w)| (0..w).map(move |i| format!("{bus}[{i}]"))).collect();
    let want_out: Vec<String> = (0..out).map(|i| format!("r[{i}]")).collect();
    let bad = |reason: String| Err(ConvError::Program { name: p.name.clone(), reason });
    if p.input_names != want_in {
        return bad(format!("inputs {:?}, expected {} bits over {:?}", p.input_names, want_in.len(), ins));
    }
    if p.output_names != want_out {
        return bad(format!("outputs {:?}, expected r[0..{out}]", p.output_names));
    }
    Ok(())
}

impl MacPrograms {
    /// Generates, maps onto `lib` and lowers the three operators.
    pub fn build(format: FpFormat, lib: &CellLibrary) -> Result<MacPrograms, ConvError> {
        let acc = format.product_format()?;
        let mul = lower(&synthesize(&gen_fp_mul(format)?, lib)?)?;
        let add = lower(&synthesize(&gen_fp_add(acc)?, lib)?)?;
        let relu = lower(&synthesize(&gen_relu(acc)?, lib)?)?;
        MacPrograms::from_programs(format, lib.name(), &mul, &add, &relu)
    }

    /// Wraps already lowered programs after checking their interfaces.
    pub fn from_programs(
        format: FpFormat,
        library: &str,
        mul: &BitsliceProgram,
        add: &BitsliceProgram,
        relu: &BitsliceProgram,
    ) -> Result<MacPrograms, ConvError> {
        let nin = format.width();
        let nout = format.product_format()?.width();
        expect_ports(mul, &[("a", nin), ("b", nin)], nout)?;
        expect_ports(add, &[("a", nout), ("b", nout)], nout)?;
        expect_ports(relu, &[("a", nout)], nout)?;
        Ok(MacPrograms {
            format,
            library: library.to_string(),
            mul: Executor::new(mul),
            add: Executor::new(add),
            relu: Executor::new(relu),
        })
    }

    pub fn format(&self) -> FpFormat {
        self.format
    }

    pub fn library(&self) -> &str {
        &self.library
    }

    pub fn mul_ops(&self) -> usize {
        self.mul.op_count()
    }

    pub fn add_ops(&self) -> usize {
        self.add.op_count()
    }

    pub fn relu_ops(&self) -> usize {
        self.relu.op_count()
    }
}

/// Kernels transposed into lane tiles, ready for the MAC loop.
pub(crate) struct Prepared {
    layout: LayoutParams,
    words: usize,
    tiles: usize,
    /// Planes of tile `t` at `(ky, kx, kc)`, `ninbits * words` each.
    weights: Vec<u64>,
}

pub(crate) fn prepare(
    spec: &ConvLayerSpec,
    kernels: &PackedTensor,
    layout: LayoutParams,
) -> Result<Prepared, ConvError> {
    let lanes = layout.lanes;
    let words = lanes.div_ceil(64);
    let tiles = spec.m.div_ceil(lanes);
    let kc_n = spec.kernel_channels();
    let mut weights = Vec::with_capacity(tiles * spec.k * spec.k * kc_n * layout.ninbits as usize * words);
    let mut lane_vals = vec![0u64; lanes];
    for t in 0..tiles {
        for ky in 0..spec.k {
            for kx in 0..spec.k {
                for kc in 0..kc_n {
                    for (l, v) in lane_vals.iter_mut().enumerate() {
                        let m = t * lanes + l;
                        *v = if m < spec.m { kernels.data()[kernel_index(spec, m, ky, kx, kc)] } else { 0 };
                    }
                    weights.extend_from_slice(to_bitslice(&lane_vals, layout.ninbits, lanes)?.planes());
                }
            }
        }
    }
    Ok(Prepared { layout, words, tiles, weights })
}

fn check_layout(spec: &ConvLayerSpec, progs: &MacPrograms, layout: LayoutParams) -> Result<(), ConvError> {
    if layout.lanes == 0 {
        return Err(ConvError::Spec("LANES must be at least 1".into()));
    }
    let want = LayoutParams::new(spec.format, layout.lanes)?;
    if layout != want {
        return Err(ConvError::Spec(format!("layout {layout:?} does not match {} ({want:?})", spec.format)));
    }
    let f = progs.format();
    if !f.same_layout(&spec.format) || f.precision() != spec.format.precision() || f.rounding() != spec.format.rounding() {
        return Err(ConvError::Program {
            name: progs.mul.name().to_string(),
            reason: format!("built for {f} {}, layer is {} {}", f.rounding(), spec.format, spec.rounding()),
        });
    }
    Ok(())
}

/// Accumulator planes per output pixel and tile, `noutbits * words` each, in
/// order `(oy, ox, tile)`.
pub(crate) fn accumulate(
    spec: &ConvLayerSpec,
    ifm: &PackedTensor,
    progs: &MacPrograms,
    prep: &Prepared,
) -> Vec<u64> {
    let LayoutParams { ninbits, noutbits, .. } = prep.layout;
    let (nin, nout, words) = (ninbits as usize, noutbits as usize, prep.words);
    let per_tile = nout * words;
    let per_pixel = prep.tiles * per_tile;
    let pixels = spec.out_h() * spec.out_w();
    let kc_n = spec.kernel_channels();
    let mut acc = vec![0u64; pixels * per_pixel];
    acc.par_chunks_mut(per_pixel).enumerate().for_each_init(
        || (vec![0u64; 2 * nin * words], vec![0u64; 2 * per_tile], vec![0u64; per_tile], Vec::new()),
        |(mul_in, add_in, sum, scratch), (pix, out)| {
            let (oy, ox) = (pix / spec.out_w(), pix % spec.out_w());
            for t in 0..prep.tiles {
                add_in.fill(0);
                for kc in 0..kc_n {
                    for ky in 0..spec.k {
                        for kx in 0..spec.k {
                            let y = oy * spec.stride + ky;
                            let x = ox * spec.stride + kx;
                            // Depthwise tiles hold one output channel per lane,
                            // so the IFM value differs per lane.
                            if spec.depthwise {
                                let mut vals = vec![0u64; prep.layout.lanes];
                                for (l, v) in vals.iter_mut().enumerate() {
                                    let m = t * prep.layout.lanes + l;
                                    if m < spec.m {
                                        *v = ifm.data()[ifm_index(spec, y, x, m)];
                                    }
                                }
                                let b = to_bitslice(&vals, ninbits, prep.layout.lanes).expect("encodings fit");
                                mul_in[..nin * words].copy_from_slice(b.planes());
                            } else {
                                let v = ifm.data()[ifm_index(spec, y, x, kc)];
                                for j in 0..nin {
                                    let fill = if (v >> j) & 1 == 1 { !0 } else { 0 };
                                    mul_in[j * words..(j + 1) * words].fill(fill);
                                }
                            }
                            let wi = (((t * spec.k + ky) * spec.k + kx) * kc_n + kc) * nin * words;
                            mul_in[nin * words..].copy_from_slice(&prep.weights[wi..wi + nin * words]);
                            progs.mul.run(mul_in, &mut add_in[per_tile..], words, scratch);
                            progs.add.run(add_in, sum, words, scratch);
                            add_in[..per_tile].copy_from_slice(sum);
                        }
                    }
                }
                out[t * per_tile..(t + 1) * per_tile].copy_from_slice(&add_in[..per_tile]);
            }
        },
    );
    acc
}

/// Applies ReLU and transposes the accumulators back into an OFM.
pub(crate) fn finish(
    spec: &ConvLayerSpec,
    progs: &MacPrograms,
    prep: &Prepared,
    acc: &[u64],
) -> Result<PackedTensor, ConvError> {
    let LayoutParams { lanes, noutbits, .. } = prep.layout;
    let (nout, words) = (noutbits as usize, prep.words);
    let per_tile = nout * words;
    let pixels = spec.out_h() * spec.out_w();
    let mut data = vec![0u64; pixels * spec.m];
    let mut r = vec![0u64; per_tile];
    let mut scratch = Vec::new();
    for pix in 0..pixels {
        for t in 0..prep.tiles {
            let off = (pix * prep.tiles + t) * per_tile;
            progs.relu.run(&acc[off..off + per_tile], &mut r, words, &mut scratch);
            for l in 0..lanes.min(spec.m - t * lanes) {
                let (word, bit) = (l / 64, l % 64);
                let v = (0..nout).fold(0u64, |v, j| v | (((r[j * words + word] >> bit) & 1) << j));
                data[pix * spec.m + t * lanes + l] = v;
            }
        }
    }
    PackedTensor::new(spec.ofm_dims(), spec.acc_format()?, data)
}

/// The layer computed `LANES` output channels at a time: each IFM value is
/// broadcast across the lanes and combined with a tile of kernel weights by
/// the mul and add programs; ReLU runs once per output.
pub fn conv_forward_bitslice(
    spec: &ConvLayerSpec,
    ifm: &PackedTensor,
    kernels: &PackedTensor,
    layout: LayoutParams,
    progs: &MacPrograms,
) -> Result<PackedTensor, ConvError> {
    check_inputs(spec, ifm, kernels)?;
    check_layout(spec, progs, layout)?;
    let prep = prepare(spec, kernels, layout)?;
    let acc = accumulate(spec, ifm, progs, &prep);
    finish(spec, progs, &prep, &acc)
}

pub(crate) fn check_all(
    spec: &ConvLayerSpec,
    ifm: &PackedTensor,
    kernels: &PackedTensor,
    layout: LayoutParams,
    progs: &MacPrograms,
) -> Result<(), ConvError> {
    check_inputs(spec, ifm, kernels)?;
    check_layout(spec, progs, layout)
}
