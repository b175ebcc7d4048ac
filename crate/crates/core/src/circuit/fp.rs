use super::builder::{
    add, bits_for, cond_swap, increment, leading_zeros, less_than, shift_left, shift_right_sticky, Builder, Sig,
};
use super::{module_name, CircuitError, Op};
use crate::fmt::{FpFormat, Rounding};
use crate::netlist::Netlist;

/// Decoded view of one encoded operand bus.
struct Operand {
    sign: Sig,
    exp: Vec<Sig>,
    frac: Vec<Sig>,
    zero: Sig,
    normal: Sig,
    inf: Sig,
    nan: Sig,
}

fn unpack(b: &mut Builder, bits: &[Sig], f: FpFormat) -> Operand {
    let wf = f.frac_bits() as usize;
    let we = f.exp_bits() as usize;
    let lo = bits[wf + we + 1];
    let hi = bits[wf + we + 2];
    let nlo = b.not(lo);
    let nhi = b.not(hi);
    Operand {
        sign: bits[wf + we],
        exp: bits[wf..wf + we].to_vec(),
        frac: bits[..wf].to_vec(),
        zero: b.and(nhi, nlo),
        normal: b.and(nhi, lo),
        inf: b.and(hi, nlo),
        nan: b.and(hi, lo),
    }
}

/// Canonical encoding: fields are cleared unless the result is normal, and
/// nan carries no sign.
fn pack(b: &mut Builder, nan: Sig, inf: Sig, normal: Sig, sign: Sig, exp: &[Sig], frac: &[Sig]) -> Vec<Sig> {
    let mut out: Vec<Sig> = frac.iter().chain(exp).map(|&x| b.and(x, normal)).collect();
    let not_nan = b.not(nan);
    out.push(b.and(sign, not_nan));
    out.push(b.or(nan, normal));
    out.push(b.or(nan, inf));
    out
}

fn constant_word(v: i64, width: usize) -> Vec<Sig> {
    (0..width).map(|i| Sig::constant((v >> i) & 1 == 1)).collect()
}

/// Range checks on a two's-complement biased exponent: `(overflow, underflow)`
/// for the normal range `1 ..= 2^wE - 1`.
fn range_flags(b: &mut Builder, t: &[Sig], we: usize) -> (Sig, Sig) {
    let neg = *t.last().unwrap();
    let not_neg = b.not(neg);
    let high = b.or_many(&t[we..t.len() - 1]);
    let ovf = b.and(not_neg, high);
    let any = b.or_many(&t[..t.len() - 1]);
    let none = b.not(any);
    let unf = b.or(neg, none);
    (ovf, unf)
}

/// Round-to-nearest-even increment of `kept` given guard and sticky; returns
/// the rounded bits and the carry out of the top.
fn round_rne(b: &mut Builder, kept: &[Sig], guard: Sig, sticky: Sig) -> (Vec<Sig>, Sig) {
    let t = b.or(sticky, kept[0]);
    let up = b.and(guard, t);
    increment(b, kept, up)
}

/// Unsigned array multiplier: one partial-product row per bit of `y`, folded
/// in with ripple adders.
pub(super) fn multiply(b: &mut Builder, x: &[Sig], y: &[Sig]) -> Vec<Sig> {
    let w = x.len() + y.len();
    let mut acc: Vec<Sig> = vec![Sig::ZERO; w];
    for (j, &yj) in y.iter().enumerate() {
        let row: Vec<Sig> = x.iter().map(|&xi| b.and(xi, yj)).collect();
        if j == 0 {
            acc[..row.len()].copy_from_slice(&row);
            continue;
        }
        let (s, c) = add(b, &acc[j..j + x.len()], &row, Sig::ZERO);
        acc[j..j + x.len()].copy_from_slice(&s);
        acc[j + x.len()] = c;
    }
    acc
}

/// Multiplier from `fmt` into `fmt.product_format()`: rounded under
/// `fmt.rounding()` in the single class and exact in the extended class.
pub fn gen_fp_mul(fmt: FpFormat) -> Result<Netlist, CircuitError> {
    let fo = fmt.product_format()?;
    let n = fmt.width() as usize;
    let wf = fmt.frac_bits() as usize;
    let we = fmt.exp_bits() as usize;
    let wfo = fo.frac_bits() as usize;
    let mut b = Builder::new(module_name(Op::Mul, fmt));
    let ab = b.input_bus("a", n);
    let bb = b.input_bus("b", n);
    let x = unpack(&mut b, &ab, fmt);
    let y = unpack(&mut b, &bb, fmt);

    let mut mx = x.frac.clone();
    mx.push(Sig::ONE);
    let mut my = y.frac.clone();
    my.push(Sig::ONE);
    let p = multiply(&mut b, &mx, &my);
    let norm = p[2 * wf + 1];
    // Fraction below the leading one, 2wF+1 bits.
    let f: Vec<Sig> = (0..=2 * wf)
        .map(|i| {
            let low = if i == 0 { Sig::ZERO } else { p[i - 1] };
            b.mux(norm, p[i], low)
        })
        .collect();
    let (frac, rc) = if wfo == 2 * wf + 1 {
        (f, Sig::ZERO)
    } else {
        let kept = &f[wf..];
        match fmt.rounding() {
            Rounding::Rtz => (kept.to_vec(), Sig::ZERO),
            Rounding::Rne => {
                let sticky = b.or_many(&f[..wf - 1]);
                round_rne(&mut b, kept, f[wf - 1], sticky)
            }
        }
    };

    let tw = we + 2;
    let (s, c) = add(&mut b, &x.exp, &y.exp, norm);
    let mut s = s;
    s.push(c);
    s.push(Sig::ZERO);
    let (s, _) = increment(&mut b, &s, rc);
    let (t, _) = add(&mut b, &s, &constant_word(-fmt.bias(), tw), Sig::ZERO);
    let (ovf, unf) = range_flags(&mut b, &t, we);

    let both_normal = b.and(x.normal, y.normal);
    let ix = b.and(x.inf, y.zero);
    let iy = b.and(x.zero, y.inf);
    let nan = b.or_many(&[x.nan, y.nan, ix, iy]);
    let not_nan = b.not(nan);
    let ovf_n = b.and(both_normal, ovf);
    let any_inf = b.or_many(&[x.inf, y.inf, ovf_n]);
    let inf = b.and(not_nan, any_inf);
    let in_range = b.or(ovf, unf);
    let in_range = b.not(in_range);
    let normal = b.and(both_normal, in_range);
    let sign = b.xor(x.sign, y.sign);
    let r = pack(&mut b, nan, inf, normal, sign, &t[..we], &frac);
    b.output_bus("r", &r);
    Ok(b.finish()?)
}

/// Single-path adder over one format: magnitude compare and swap, aligned
/// subtraction or addition with guard, round and sticky bits, leading-zero
/// normalization and rounding under `fmt.rounding()`.
pub fn gen_fp_add(fmt: FpFormat) -> Result<Netlist, CircuitError> {
    let n = fmt.width() as usize;
    let wf = fmt.frac_bits() as usize;
    let we = fmt.exp_bits() as usize;
    let mut b = Builder::new(module_name(Op::Add, fmt));
    let ab = b.input_bus("a", n);
    let bb = b.input_bus("b", n);
    let x = unpack(&mut b, &ab, fmt);
    let y = unpack(&mut b, &bb, fmt);

    // Magnitudes with non-normal operands cleared to zero, implicit bit on top.
    let mag = |b: &mut Builder, o: &Operand| -> Vec<Sig> {
        let mut m: Vec<Sig> = o.frac.iter().chain(&o.exp).map(|&v| b.and(v, o.normal)).collect();
        m.push(o.normal);
        m
    };
    let ma = mag(&mut b, &x);
    let mb = mag(&mut b, &y);
    let swap = less_than(&mut b, &ma, &mb);
    let mut wa = ma.clone();
    wa.push(x.sign);
    let mut wb = mb.clone();
    wb.push(y.sign);
    let (big, small) = cond_swap(&mut b, swap, &wa, &wb);
    let sx = big[wf + we + 1];
    let ex = big[wf..wf + we].to_vec();
    let ey = small[wf..wf + we].to_vec();
    let mx = &big[..wf];
    let my = &small[..wf];
    let ix = big[wf + we];
    let iy = small[wf + we];
    let eff_sub = b.xor(x.sign, y.sign);

    let ney: Vec<Sig> = ey.iter().map(|&e| b.not(e)).collect();
    let (diff, _) = add(&mut b, &ex, &ney, Sig::ONE);
    let smax = wf + 3;
    let k = bits_for(smax);
    let amount: Vec<Sig> = if we > k {
        let hi = b.or_many(&diff[k..]);
        diff[..k].iter().map(|&d| b.or(d, hi)).collect()
    } else {
        diff.clone()
    };

    // Datapath, LSB first: sticky, round, guard, fraction, integer, carry.
    let w = wf + 5;
    let mut yin = vec![Sig::ZERO, Sig::ZERO];
    yin.extend_from_slice(my);
    yin.push(iy);
    let (ysh, st) = shift_right_sticky(&mut b, &yin, &amount);
    let mut yd = vec![st];
    yd.extend_from_slice(&ysh);
    yd.push(Sig::ZERO);
    let mut xd = vec![Sig::ZERO; 3];
    xd.extend_from_slice(mx);
    xd.push(ix);
    xd.push(Sig::ZERO);
    let yc: Vec<Sig> = yd.iter().map(|&v| b.xor(v, eff_sub)).collect();
    let (sum, _) = add(&mut b, &xd, &yc, eff_sub);

    let lz = leading_zeros(&mut b, &sum);
    let norm = shift_left(&mut b, &sum, &lz);
    let any = b.or_many(&sum);
    let zero_sum = b.not(any);
    let kept = &norm[w - 1 - wf..w - 1];
    let (frac, rc) = match fmt.rounding() {
        Rounding::Rtz => (kept.to_vec(), Sig::ZERO),
        Rounding::Rne => {
            let sticky = b.or_many(&norm[..w - 2 - wf]);
            round_rne(&mut b, kept, norm[w - 2 - wf], sticky)
        }
    };

    // Biased result exponent eX + 1 - lz + rc in two's complement.
    let tw = we.max(lz.len()) + 2;
    let nlz: Vec<Sig> = (0..tw).map(|i| b.not(lz.get(i).copied().unwrap_or(Sig::ZERO))).collect();
    let (t, _) = add(&mut b, &ex, &nlz, Sig::ONE);
    let (t, _) = increment(&mut b, &t, Sig::ONE);
    let (t, _) = increment(&mut b, &t, rc);
    let (ovf, unf) = range_flags(&mut b, &t, we);

    let both_inf = b.and(x.inf, y.inf);
    let clash = b.and(both_inf, eff_sub);
    let nan = b.or_many(&[x.nan, y.nan, clash]);
    let not_nan = b.not(nan);
    let special = b.or_many(&[x.inf, y.inf, x.nan, y.nan]);
    let regular = b.not(special);
    let ovf_r = b.and(regular, ovf);
    let any_inf = b.or_many(&[x.inf, y.inf, ovf_r]);
    let inf = b.and(not_nan, any_inf);
    let bad = b.or_many(&[ovf, unf, zero_sum]);
    let good = b.not(bad);
    let normal = b.and(regular, good);

    let both_zero = b.and(x.zero, y.zero);
    let zz = b.and_many(&[both_zero, x.sign, y.sign]);
    let s_path = b.mux(zero_sum, zz, sx);
    let s_inf = b.mux(y.inf, y.sign, s_path);
    let sign = b.mux(x.inf, x.sign, s_inf);
    let r = pack(&mut b, nan, inf, normal, sign, &t[..we], &frac);
    b.output_bus("r", &r);
    Ok(b.finish()?)
}

/// ReLU over one format with canonical output.
pub fn gen_relu(fmt: FpFormat) -> Result<Netlist, CircuitError> {
    let n = fmt.width() as usize;
    let mut b = Builder::new(module_name(Op::Relu, fmt));
    let ab = b.input_bus("a", n);
    let x = unpack(&mut b, &ab, fmt);
    let pos = b.not(x.sign);
    let inf = b.and(x.inf, pos);
    let exp_set = b.or_many(&x.exp);
    let normal = b.and_many(&[x.normal, pos, exp_set]);
    let r = pack(&mut b, x.nan, inf, normal, Sig::ZERO, &x.exp, &x.frac);
    b.output_bus("r", &r);
    Ok(b.finish()?)
}
