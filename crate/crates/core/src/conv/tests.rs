use super::*;
use crate::cells::{builtin_library, LibraryId};
use crate::fmt::{encode, ExcClass, RationalValue};

fn fmt(s: &str, r: Rounding) -> FpFormat {
    s.parse::<FpFormat>().unwrap().with_rounding(r)
}

fn encode_f(x: f32, f: FpFormat) -> u64 {
    from_binary32(x, f).bits()
}

#[test]
fn layer_geometry() {
    let f = fmt("e5m3", Rounding::Rne);
    let mut s = ConvLayerSpec::new(14, 14, 64, 64, 3, f);
    assert_eq!((s.out_h(), s.out_w()), (12, 12));
    assert_eq!(s.macs(), 12 * 12 * 64 * 9 * 64);
    s.stride = 2;
    assert_eq!(s.out_h(), 6);
    s.depthwise = true;
    assert_eq!(s.kernel_dims(), vec![64, 3, 3, 1]);
    s.m = 32;
    assert!(s.validate().is_err());
    assert!(ConvLayerSpec::new(2, 2, 1, 1, 3, f).validate().is_err());
    let l = LayoutParams::new(f, 64).unwrap();
    assert_eq!((l.ninbits, l.noutbits), (11, 12));
    assert_eq!(LayoutParams::new(f.with_precision(Precision::Extended), 64).unwrap().noutbits, 15);
}

#[test]
fn quantize_examples() {
    let f = fmt("e5m2", Rounding::Rne);
    let t = quantize_tensor(&[1.0, 1.0, 0.1, f32::NAN], vec![4], f).unwrap();
    assert_eq!(t.data()[0], t.data()[1]);
    assert_eq!(t.scalar(0).decode(), RationalValue::from_integer(1));
    let exact = RationalValue::from_f64(0.1f32 as f64);
    assert_eq!(t.data()[2], encode(&exact, f).bits());
    assert_eq!(t.scalar(3).class(), ExcClass::Nan);
}

#[test]
fn tiles_round_trip() {
    let f = fmt("e4m3", Rounding::Rne);
    let src: Vec<f32> = (0..150).map(|i| i as f32 * 0.37 - 20.0).collect();
    let t = quantize_tensor(&src, vec![10, 15], f).unwrap();
    let tiles = t.to_tiles(64).unwrap();
    assert_eq!(tiles.len(), 3);
    assert_eq!(PackedTensor::from_tiles(vec![10, 15], f, &tiles).unwrap(), t);
}

#[test]
fn single_mac_reference() {
    let f = fmt("e5m3", Rounding::Rne);
    let spec = ConvLayerSpec::new(1, 1, 1, 1, 1, f);
    let ifm = PackedTensor::new(vec![1, 1, 1], f, vec![encode_f(2.0, f)]).unwrap();
    let ker = PackedTensor::new(vec![1, 1, 1, 1], f, vec![encode_f(1.5, f)]).unwrap();
    let out = conv_forward_reference(&spec, &ifm, &ker).unwrap();
    let acc = spec.acc_format().unwrap();
    assert_eq!(out.data(), &[encode_f(3.0, acc)]);
    assert_eq!(out.format().width(), 12);
}

#[test]
fn negative_products_clamp_to_zero() {
    let f = fmt("e5m2", Rounding::Rtz);
    let spec = ConvLayerSpec::new(3, 3, 2, 2, 2, f);
    let ifm = quantize_tensor(&[1.5; 18], spec.ifm_dims(), f).unwrap();
    let ker = quantize_tensor(&[-0.75; 16], spec.kernel_dims(), f).unwrap();
    let out = conv_forward_reference(&spec, &ifm, &ker).unwrap();
    assert!(out.data().iter().all(|&v| v == 0));
}

#[test]
fn pinned_reference_values() {
    let f = fmt("e5m3", Rounding::Rne);
    let spec = ConvLayerSpec::new(4, 4, 2, 2, 3, f);
    let (ifm, ker) = synthetic_inputs(&spec, 7).unwrap();
    let out = conv_forward_reference(&spec, &ifm, &ker).unwrap();
    assert_eq!(out.dims(), &[2, 2, 2]);
    assert_eq!(out.data(), &PINNED);
}

const PINNED: [u64; 8] = [1328, 0, 0, 1339, 1329, 0, 1328, 0];

fn programs(f: FpFormat, lib: LibraryId) -> MacPrograms {
    MacPrograms::build(f, &builtin_library(lib)).unwrap()
}

#[test]
fn bitslice_matches_reference() {
    let f = fmt("e5m2", Rounding::Rne);
    let progs = programs(f, LibraryId::Avx2);
    let spec = ConvLayerSpec::new(8, 8, 16, 32, 3, f);
    let (ifm, ker) = synthetic_inputs(&spec, 11).unwrap();
    let want = conv_forward_reference(&spec, &ifm, &ker).unwrap();
    let got = conv_forward_bitslice(&spec, &ifm, &ker, LayoutParams::new(f, 64).unwrap(), &progs).unwrap();
    assert_eq!(got, want);

    // One real channel in a 32-lane tile.
    let spec = ConvLayerSpec::new(5, 4, 3, 1, 2, f);
    let (ifm, ker) = synthetic_inputs(&spec, 12).unwrap();
    let got = conv_forward_bitslice(&spec, &ifm, &ker, LayoutParams::new(f, 32).unwrap(), &progs).unwrap();
    assert_eq!(got, conv_forward_reference(&spec, &ifm, &ker).unwrap());

    // Strided depthwise over two 128-lane tiles.
    let mut spec = ConvLayerSpec::new(7, 7, 130, 130, 3, f);
    spec.stride = 2;
    spec.depthwise = true;
    let (ifm, ker) = synthetic_inputs(&spec, 13).unwrap();
    let got = conv_forward_bitslice(&spec, &ifm, &ker, LayoutParams::new(f, 128).unwrap(), &progs).unwrap();
    assert_eq!(got, conv_forward_reference(&spec, &ifm, &ker).unwrap());
}

#[test]
fn mismatched_programs_are_rejected() {
    let f = fmt("e4m2", Rounding::Rne);
    let progs = programs(f, LibraryId::Avx512Lut3);
    let spec = ConvLayerSpec::new(3, 3, 1, 1, 1, f.with_rounding(Rounding::Rtz));
    let (ifm, ker) = synthetic_inputs(&spec, 1).unwrap();
    let layout = LayoutParams::new(f, 64).unwrap();
    assert!(matches!(conv_forward_bitslice(&spec, &ifm, &ker, layout, &progs), Err(ConvError::Program { .. })));
    let spec = ConvLayerSpec::new(3, 3, 1, 1, 1, f);
    let bad = LayoutParams { noutbits: 9, ..layout };
    assert!(matches!(conv_forward_bitslice(&spec, &ifm, &ker, bad, &progs), Err(ConvError::Spec(_))));
    let short = PackedTensor::new(vec![3, 3, 1], f, vec![0; 9]).unwrap();
    assert!(conv_forward_bitslice(&spec, &short, &short, layout, &progs).is_err());
}

#[test]
fn bench_rows() {
    let f = fmt("e4m2", Rounding::Rne);
    let progs = programs(f, LibraryId::Avx512Lut3);
    let spec = ConvLayerSpec::new(4, 4, 2, 64, 3, f);
    let r = benchmark(&spec, LayoutParams::new(f, 64).unwrap(), &progs, 2, 3).unwrap();
    assert_eq!((r.mul_ops, r.add_ops), (progs.mul_ops(), progs.add_ops()));
    assert_eq!(r.macs, spec.macs());
    assert_eq!(r.library, "avx512_lut3");
    let mut csv = Vec::new();
    write_csv(&mut csv, &[r, benchmark_reference(&spec, 1, 3).unwrap()]).unwrap();
    let text = String::from_utf8(csv).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[1], CSV_HEADER);
    assert!(lines[2].starts_with("e4m2,rne,single,avx512_lut3,64,"));
    assert!(lines[3].starts_with("e4m2,rne,single,reference,1,0,0,"));
}
