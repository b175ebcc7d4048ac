//! Convolution layers over encoded values: a scalar reference path, a
//! bitslice path built from mapped MAC programs, and a benchmark harness.

mod bench;
mod slice;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

pub use bench::{benchmark, benchmark_reference, write_csv, BenchRecord, CSV_HEADER, THREADS_ENV};
pub use slice::{conv_forward_bitslice, MacPrograms};

use crate::bitslice::{from_bitslice, to_bitslice, BitsliceBlock, RtError};
use crate::cells::MapError;
use crate::circuit::CircuitError;
use crate::codegen::CodegenError;
use crate::fmt::{
    add_unchecked, convert, from_binary32, mul_unchecked, ref_relu, EncodedScalar, FormatError, FpFormat,
    Precision, Rounding,
};

#[derive(Debug, Error)]
pub enum ConvError {
    #[error("invalid layer: {0}")]
    Spec(String),
    #[error("{what}: expected {expected:?}, got {got:?}")]
    Shape { what: &'static str, expected: Vec<usize>, got: Vec<usize> },
    #[error("{what}: tensor is in {got}, expected {expected}")]
    TensorFormat { what: &'static str, expected: FpFormat, got: FpFormat },
    #[error("program `{name}` does not fit: {reason}")]
    Program { name: String, reason: String },
    #[error(transparent)]
    Format(#[from] FormatError),
    #[error(transparent)]
    Circuit(#[from] CircuitError),
    #[error(transparent)]
    Map(#[from] MapError),
    #[error(transparent)]
    Codegen(#[from] CodegenError),
    #[error(transparent)]
    Runtime(#[from] RtError),
}

/// One convolution layer. `format` carries the rounding mode and the
/// accumulate class; valid padding only.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ConvLayerSpec {
    pub h: usize,
    pub w: usize,
    pub c: usize,
    pub m: usize,
    pub k: usize,
    pub stride: usize,
    pub format: FpFormat,
    /// Output channel `m` reads input channel `m` only; needs `m == c`.
    pub depthwise: bool,
}

impl ConvLayerSpec {
    pub fn new(h: usize, w: usize, c: usize, m: usize, k: usize, format: FpFormat) -> ConvLayerSpec {
        ConvLayerSpec { h, w, c, m, k, stride: 1, format, depthwise: false }
    }

    pub fn rounding(&self) -> Rounding {
        self.format.rounding()
    }

    pub fn accumulate_class(&self) -> Precision {
        self.format.precision()
    }

    pub fn validate(&self) -> Result<(), ConvError> {
        let dims = [("H", self.h), ("W", self.w), ("C", self.c), ("M", self.m), ("K", self.k), ("stride", self.stride)];
        if let Some((name, _)) = dims.iter().find(|(_, v)| *v == 0) {
            return Err(ConvError::Spec(format!("{name} must be at least 1")));
        }
        if self.k > self.h || self.k > self.w {
            return Err(ConvError::Spec(format!("kernel {} larger than input {}x{}", self.k, self.h, self.w)));
        }
        if self.depthwise && self.m != self.c {
            return Err(ConvError::Spec(format!("depthwise needs M = C, got M={} C={}", self.m, self.c)));
        }
        Ok(())
    }

    pub fn out_h(&self) -> usize {
        (self.h - self.k) / self.stride + 1
    }

    pub fn out_w(&self) -> usize {
        (self.w - self.k) / self.stride + 1
    }

    /// Channels each kernel spans.
    pub fn kernel_channels(&self) -> usize {
        if self.depthwise {
            1
        } else {
            self.c
        }
    }

    pub fn ifm_dims(&self) -> Vec<usize> {
        vec![self.h, self.w, self.c]
    }

    pub fn kernel_dims(&self) -> Vec<usize> {
        vec![self.m, self.k, self.k, self.kernel_channels()]
    }

    pub fn ofm_dims(&self) -> Vec<usize> {
        vec![self.out_h(), self.out_w(), self.m]
    }

    /// Multiply-accumulates per layer.
    pub fn macs(&self) -> u64 {
        (self.out_h() * self.out_w() * self.m * self.k * self.k * self.kernel_channels()) as u64
    }

    /// Format the products, accumulators and outputs are encoded in.
    pub fn acc_format(&self) -> Result<FpFormat, FormatError> {
        self.format.product_format()
    }
}

/// Lane count and the encoded operand widths of a MAC.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct LayoutParams {
    pub lanes: usize,
    pub ninbits: u32,
    pub noutbits: u32,
}

impl LayoutParams {
    pub fn new(format: FpFormat, lanes: usize) -> Result<LayoutParams, FormatError> {
        Ok(LayoutParams { lanes, ninbits: format.width(), noutbits: format.product_format()?.width() })
    }
}

/// Encoded values in row-major order over `dims`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PackedTensor {
    dims: Vec<usize>,
    format: FpFormat,
    data: Vec<u64>,
}

impl PackedTensor {
    pub fn new(dims: Vec<usize>, format: FpFormat, data: Vec<u64>) -> Result<PackedTensor, ConvError> {
        let len: usize = dims.iter().product();
        if data.len() != len {
            return Err(ConvError::Shape { what: "tensor data", expected: vec![len], got: vec![data.len()] });
        }
        let width = format.width();
        if let Some(&v) = data.iter().find(|&&v| width < 64 && v >> width != 0) {
            return Err(FormatError::BitsOutOfRange { bits: v, width }.into());
        }
        Ok(PackedTensor { dims, format, data })
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn format(&self) -> FpFormat {
        self.format
    }

    pub fn data(&self) -> &[u64] {
        &self.data
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn scalar(&self, i: usize) -> EncodedScalar {
        EncodedScalar::from_bits(self.format, self.data[i]).expect("checked on construction")
    }

    /// Bit-plane tiles of `lanes` consecutive elements; the last one is
    /// padded with zero encodings.
    pub fn to_tiles(&self, lanes: usize) -> Result<Vec<BitsliceBlock>, RtError> {
        let nbits = self.format.width();
        self.data
            .chunks(lanes.max(1))
            .map(|chunk| {
                let mut v = chunk.to_vec();
                v.resize(lanes, 0);
                to_bitslice(&v, nbits, lanes)
            })
            .collect()
    }

    pub fn from_tiles(dims: Vec<usize>, format: FpFormat, tiles: &[BitsliceBlock]) -> Result<PackedTensor, ConvError> {
        let len: usize = dims.iter().product();
        let mut data: Vec<u64> = tiles.iter().flat_map(from_bitslice).collect();
        if data.len() < len || tiles.iter().any(|t| t.nbits() != format.width()) {
            return Err(ConvError::Shape { what: "tiles", expected: vec![len], got: vec![data.len()] });
        }
        data.truncate(len);
        PackedTensor::new(dims, format, data)
    }

    /// Every element re-rounded into `to`.
    pub fn convert(&self, to: FpFormat) -> PackedTensor {
        let data = (0..self.len()).map(|i| convert(&self.scalar(i), to).bits()).collect();
        PackedTensor { dims: self.dims.clone(), format: to, data }
    }
}

/// Round-to-nearest-even quantization of binary32 values.
pub fn quantize_tensor(src: &[f32], dims: Vec<usize>, format: FpFormat) -> Result<PackedTensor, ConvError> {
    let q = format.with_rounding(Rounding::Rne);
    let data = src.iter().map(|&x| from_binary32(x, q).bits()).collect();
    PackedTensor::new(dims, format, data)
}

pub(crate) fn check_inputs(spec: &ConvLayerSpec, ifm: &PackedTensor, kernels: &PackedTensor) -> Result<(), ConvError> {
    spec.validate()?;
    if ifm.dims() != spec.ifm_dims() {
        return Err(ConvError::Shape { what: "ifm", expected: spec.ifm_dims(), got: ifm.dims().to_vec() });
    }
    if kernels.dims() != spec.kernel_dims() {
        return Err(ConvError::Shape { what: "kernels", expected: spec.kernel_dims(), got: kernels.dims().to_vec() });
    }
    for (what, t) in [("ifm", ifm), ("kernels", kernels)] {
        if !t.format().same_layout(&spec.format) {
            return Err(ConvError::TensorFormat { what, expected: spec.format, got: t.format() });
        }
    }
    Ok(())
}

/// Index of IFM element `(y, x, c)`.
pub(crate) fn ifm_index(spec: &ConvLayerSpec, y: usize, x: usize, c: usize) -> usize {
    (y * spec.w + x) * spec.c + c
}

/// Index of kernel weight `(m, ky, kx, c)`.
pub(crate) fn kernel_index(spec: &ConvLayerSpec, m: usize, ky: usize, kx: usize, c: usize) -> usize {
    ((m * spec.k + ky) * spec.k + kx) * spec.kernel_channels() + c
}

/// Accumulators before the activation, in OFM order.
pub(crate) fn reference_accumulate(
    spec: &ConvLayerSpec,
    ifm: &PackedTensor,
    kernels: &PackedTensor,
) -> Result<Vec<EncodedScalar>, ConvError> {
    check_inputs(spec, ifm, kernels)?;
    let fmt = spec.format;
    let acc_fmt = spec.acc_format()?;
    let ifm_s: Vec<EncodedScalar> = ifm.data().iter().map(|&b| EncodedScalar::from_bits(fmt, b)).collect::<Result<_, _>>()?;
    let ker_s: Vec<EncodedScalar> = kernels.data().iter().map(|&b| EncodedScalar::from_bits(fmt, b)).collect::<Result<_, _>>()?;
    let (oh, ow) = (spec.out_h(), spec.out_w());
    let mut out = Vec::with_capacity(oh * ow * spec.m);
    for oy in 0..oh {
        for ox in 0..ow {
            for m in 0..spec.m {
                let mut acc = EncodedScalar::zero(acc_fmt, false);
                for kc in 0..spec.kernel_channels() {
                    let c = if spec.depthwise { m } else { kc };
                    for ky in 0..spec.k {
                        for kx in 0..spec.k {
                            let a = &ifm_s[ifm_index(spec, oy * spec.stride + ky, ox * spec.stride + kx, c)];
                            let w = &ker_s[kernel_index(spec, m, ky, kx, kc)];
                            acc = add_unchecked(&acc, &mul_unchecked(a, w, acc_fmt));
                        }
                    }
                }
                out.push(acc);
            }
        }
    }
    Ok(out)
}

/// Scalar convolution: products and sums in the accumulator format, summed
/// over `(c, ky, kx)` in that order from `+0`, then ReLU.
pub fn conv_forward_reference(
    spec: &ConvLayerSpec,
    ifm: &PackedTensor,
    kernels: &PackedTensor,
) -> Result<PackedTensor, ConvError> {
    let acc = reference_accumulate(spec, ifm, kernels)?;
    let data = acc.iter().map(|a| ref_relu(a).bits()).collect();
    PackedTensor::new(spec.ofm_dims(), spec.acc_format()?, data)
}

/// Random IFM and kernels for `spec`: values spread over a few binades of
/// both signs, with some exact zeros.
pub fn synthetic_inputs(spec: &ConvLayerSpec, seed: u64) -> Result<(PackedTensor, PackedTensor), ConvError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut draw = |n: usize| -> Vec<f32> {
        (0..n)
            .map(|_| {
                if rng.random_bool(0.1) {
                    0.0
                } else {
                    let mag = rng.random_range(0.25f32..4.0);
                    if rng.random_bool(0.4) {
                        -mag
                    } else {
                        mag
                    }
                }
            })
            .collect()
    };
    let ifm_dims = spec.ifm_dims();
    let ker_dims = spec.kernel_dims();
    let ifm = draw(ifm_dims.iter().product());
    let ker = draw(ker_dims.iter().product());
    Ok((quantize_tensor(&ifm, ifm_dims, spec.format)?, quantize_tensor(&ker, ker_dims, spec.format)?))
}

#[cfg(test)]
mod tests;
