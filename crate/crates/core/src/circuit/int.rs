use super::builder::{add, bits_for, leading_zeros, shift_right_sticky, Builder};
use super::fp::multiply;
use super::CircuitError;
use crate::netlist::Netlist;

fn check_width(w: usize) -> Result<(), CircuitError> {
    if w == 0 {
        Err(CircuitError::Width(w))
    } else {
        Ok(())
    }
}

/// Ripple-carry adder: `sum[w]` and `cout` from `x[w] + y[w] + cin`.
pub fn gen_int_adder(w: usize) -> Result<Netlist, CircuitError> {
    check_width(w)?;
    let mut b = Builder::new(format!("int_add_{w}"));
    let x = b.input_bus("x", w);
    let y = b.input_bus("y", w);
    let cin = b.input("cin");
    let (sum, cout) = add(&mut b, &x, &y, cin);
    b.output_bus("sum", &sum);
    b.output("cout", cout);
    Ok(b.finish()?)
}

/// Array multiplier: `p[2w] = a[w] * b[w]`.
pub fn gen_int_mul(w: usize) -> Result<Netlist, CircuitError> {
    check_width(w)?;
    let mut b = Builder::new(format!("int_mul_{w}"));
    let x = b.input_bus("a", w);
    let y = b.input_bus("b", w);
    let p = multiply(&mut b, &x, &y);
    b.output_bus("p", &p);
    Ok(b.finish()?)
}

/// Logarithmic right shifter: `out[w] = in >> s` with `sticky` set when any
/// one bit was shifted out. `s` has enough bits to hold `smax`.
pub fn gen_right_shifter(w: usize, smax: usize) -> Result<Netlist, CircuitError> {
    check_width(w)?;
    let mut b = Builder::new(format!("shr_{w}_{smax}"));
    let x = b.input_bus("in", w);
    let s = b.input_bus("s", bits_for(smax));
    let (out, sticky) = shift_right_sticky(&mut b, &x, &s);
    b.output_bus("out", &out);
    b.output("sticky", sticky);
    Ok(b.finish()?)
}

/// Leading-zero counter: `lz` is the number of zeros above the highest one of
/// `in[w]`, and `w` when there is none.
pub fn gen_lzc(w: usize) -> Result<Netlist, CircuitError> {
    check_width(w)?;
    let mut b = Builder::new(format!("lzc_{w}"));
    let x = b.input_bus("in", w);
    let lz = leading_zeros(&mut b, &x);
    b.output_bus("lz", &lz);
    Ok(b.finish()?)
}
