mod common;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::Signed;
use proptest::prelude::*;

use common::{config, fmt};
use slicefp_core::fmt::{
    encode, ref_add, ref_mul, EncodedScalar, ExcClass, FpFormat, Precision, RationalValue, Rounding,
};

fn canonical(f: FpFormat) -> Vec<EncodedScalar> {
    (0..1u64 << f.width())
        .map(|b| EncodedScalar::from_bits(f, b).unwrap())
        .filter(|x| x.is_canonical())
        .collect()
}

fn rat(x: &EncodedScalar) -> BigRational {
    x.decode().to_rational().expect("finite")
}

#[test]
fn encode_decode_round_trip_exhaustive() {
    for we in 2..=5 {
        for wf in 1..=4 {
            for r in [Rounding::Rne, Rounding::Rtz] {
                let f = fmt(we, wf, Precision::Single, r);
                for x in canonical(f) {
                    assert_eq!(encode(&x.decode(), f), x, "{f} {x:?}");
                }
            }
        }
    }
}

fn finite_normals(f: FpFormat) -> Vec<(BigRational, EncodedScalar)> {
    let mut v: Vec<_> =
        canonical(f).into_iter().filter(|x| x.class() == ExcClass::Normal).map(|x| (rat(&x), x)).collect();
    v.sort_by(|a, b| a.0.cmp(&b.0));
    v
}

fn rational(num: i64, den: i64) -> BigRational {
    BigRational::new(BigInt::from(num), BigInt::from(den))
}

fn pow2(e: i64) -> BigRational {
    if e >= 0 {
        BigRational::from_integer(BigInt::from(1) << e as usize)
    } else {
        BigRational::new(BigInt::from(1), BigInt::from(1) << (-e) as usize)
    }
}

proptest! {
    #![proptest_config(config(0x5eed_0001, 2000))]

    /// Points between two adjacent normals, ties included.
    #[test]
    fn rne_picks_a_nearest_neighbor(which in 0usize..3, pos in 0.0f64..1.0, t in 0i64..=64, negative in any::<bool>()) {
        let f = [fmt(4, 3, Precision::Single, Rounding::Rne), fmt(5, 2, Precision::Single, Rounding::Rne), fmt(3, 4, Precision::Single, Rounding::Rne)][which];
        let values: Vec<_> = finite_normals(f).into_iter().filter(|(v, _)| v.is_positive()).collect();
        let i = ((values.len() - 1) as f64 * pos) as usize;
        let (lo, hi) = (&values[i], &values[(i + 1).min(values.len() - 1)]);
        let mut r = &lo.0 + (&hi.0 - &lo.0) * rational(t, 64);
        if negative {
            r = -r;
        }
        let got = encode(&RationalValue::from_rational(r.clone()), f);
        let want = if t < 32 || lo.1 == hi.1 {
            lo.1
        } else if t > 32 {
            hi.1
        } else if lo.1.frac_field() & 1 == 0 {
            lo.1
        } else {
            hi.1
        };
        let want = if negative { EncodedScalar::from_bits(f, want.bits() | 1 << (f.width() - 3)).unwrap() } else { want };
        prop_assert_eq!(got, want, "r = {}", r);
        if t != 32 {
            let d = (rat(&got) - &r).abs();
            prop_assert!(d <= (&lo.0 - r.abs()).abs() && d <= (&hi.0 - r.abs()).abs());
        }
    }

    /// Magnitudes below twice the largest normal, where truncation stays finite.
    #[test]
    fn rtz_never_grows_magnitude(we in 2u32..=6, wf in 1u32..=6, e in 0i64..=64, k in 0i64..1 << 20, negative in any::<bool>()) {
        let f = fmt(we, wf, Precision::Single, Rounding::Rtz);
        let bias = f.bias();
        let e = 1 - bias - 2 + e % (2 * bias + 2);
        let mut r = (BigRational::from_integer(1.into()) + rational(k, 1 << 20)) * pow2(e);
        if negative {
            r = -r;
        }
        let got = encode(&RationalValue::from_rational(r.clone()), f);
        prop_assert!(matches!(got.class(), ExcClass::Normal | ExcClass::Zero));
        prop_assert!(rat(&got).abs() <= r.abs());
        prop_assert!(got.class() == ExcClass::Zero || got.sign() == negative);
    }
}

#[test]
fn mul_and_add_commute_exhaustive() {
    for (we, wf) in [(2, 1), (2, 3), (3, 2), (3, 3), (4, 3), (5, 2), (5, 3)] {
        for r in [Rounding::Rne, Rounding::Rtz] {
            let f = fmt(we, wf, Precision::Single, r);
            let out = f.product_format().unwrap();
            let all: Vec<EncodedScalar> = (0..1u64 << f.width())
                .map(|b| EncodedScalar::from_bits(f, b).unwrap())
                .filter(|x| x.class() != ExcClass::Nan)
                .collect();
            for a in &all {
                for b in &all {
                    assert_eq!(ref_mul(a, b, out).unwrap(), ref_mul(b, a, out).unwrap());
                    assert_eq!(ref_add(a, b).unwrap(), ref_add(b, a).unwrap());
                }
            }
        }
    }
}

#[test]
fn extended_products_are_exact() {
    for (we, wf) in [(2, 1), (3, 2), (3, 3), (4, 3), (5, 3)] {
        let f = fmt(we, wf, Precision::Extended, Rounding::Rtz);
        let out = f.product_format().unwrap();
        let finite: Vec<(EncodedScalar, BigRational)> = canonical(f)
            .into_iter()
            .filter(|x| matches!(x.class(), ExcClass::Normal | ExcClass::Zero))
            .map(|x| (x, rat(&x)))
            .collect();
        for (a, ra) in &finite {
            for (b, rb) in &finite {
                let p = ref_mul(a, b, out).unwrap();
                if p.class() == ExcClass::Normal || (ra * rb) == BigRational::from_integer(0.into()) {
                    assert_eq!(rat(&p), ra * rb, "{f}: {a:?} * {b:?}");
                } else {
                    // Outside the exponent range: overflow or underflow.
                    assert!(p.class() == ExcClass::Infinity || p.class() == ExcClass::Zero);
                }
            }
        }
    }
}
