//! 3-input truth tables.
//!
//! A truth table is one byte. Bit `4*a + 2*b + c` holds the output for
//! inputs `(a, b, c) = (in1, in2, in3)`, the same numbering as the AVX512
//! ternary-logic immediate. Cells with fewer inputs ignore the unused
//! positions, so their tables repeat.

/// `in1`
pub const VAR_A: u8 = 0xF0;
/// `in2`
pub const VAR_B: u8 = 0xCC;
/// `in3`
pub const VAR_C: u8 = 0xAA;

pub const FALSE: u8 = 0x00;
pub const TRUE: u8 = 0xFF;
pub const BUF: u8 = VAR_A;
pub const NOT: u8 = !VAR_A;
pub const AND: u8 = VAR_A & VAR_B;
pub const OR: u8 = VAR_A | VAR_B;
pub const XOR: u8 = VAR_A ^ VAR_B;
/// `~a & b`
pub const ANDNOT: u8 = !VAR_A & VAR_B;
/// `a | ~b`
pub const ORN: u8 = VAR_A | !VAR_B;
/// `a & ~b`
pub const BIC: u8 = VAR_A & !VAR_B;
/// `a ? b : c`
pub const SEL: u8 = (VAR_A & VAR_B) | (!VAR_A & VAR_C);
pub const XOR3: u8 = VAR_A ^ VAR_B ^ VAR_C;
pub const MAJ: u8 = (VAR_A & VAR_B) | (VAR_A & VAR_C) | (VAR_B & VAR_C);

pub const VARS: [u8; 3] = [VAR_A, VAR_B, VAR_C];

#[inline]
fn mask(bit: u8) -> u64 {
    0u64.wrapping_sub(bit as u64)
}

#[inline]
fn eval2(nibble: u8, b: u64, c: u64) -> u64 {
    (mask(nibble & 1) & !b & !c)
        | (mask((nibble >> 1) & 1) & !b & c)
        | (mask((nibble >> 2) & 1) & b & !c)
        | (mask((nibble >> 3) & 1) & b & c)
}

/// Bitwise evaluation over 64 lanes.
#[inline]
pub fn eval_word(truth: u8, a: u64, b: u64, c: u64) -> u64 {
    match truth {
        AND => a & b,
        OR => a | b,
        XOR => a ^ b,
        NOT => !a,
        ANDNOT => !a & b,
        ORN => a | !b,
        BIC => a & !b,
        SEL => (a & b) | (!a & c),
        XOR3 => a ^ b ^ c,
        MAJ => (a & b) | (c & (a | b)),
        BUF => a,
        FALSE => 0,
        TRUE => !0,
        t => (a & eval2(t >> 4, b, c)) | (!a & eval2(t & 0xF, b, c)),
    }
}

#[inline]
pub fn eval_bit(truth: u8, a: bool, b: bool, c: bool) -> bool {
    let idx = ((a as u8) << 2) | ((b as u8) << 1) | (c as u8);
    (truth >> idx) & 1 == 1
}

/// Whether the function reads input `var` (0 = a, 1 = b, 2 = c).
pub fn depends_on(truth: u8, var: usize) -> bool {
    let shift = 4 >> var;
    let m = VARS[var];
    ((truth & m) >> shift) != (truth & !m)
}

/// Number of leading inputs a cell needs to expose this function: the index
/// of the highest input the function depends on, plus one.
pub fn support_width(truth: u8) -> usize {
    (0..3).rev().find(|&v| depends_on(truth, v)).map_or(0, |v| v + 1)
}

/// Function of the inputs after complementing input `var`.
pub fn flip_input(truth: u8, var: usize) -> u8 {
    let shift = 4 >> var;
    let m = VARS[var];
    ((truth & m) >> shift) | ((truth & !m) << shift)
}

/// `g(x) = f(x[perm[0]], x[perm[1]], x[perm[2]])`.
pub fn permute(truth: u8, perm: [usize; 3]) -> u8 {
    let mut out = 0u8;
    for idx in 0..8u8 {
        let x = [(idx >> 2) & 1 == 1, (idx >> 1) & 1 == 1, idx & 1 == 1];
        if eval_bit(truth, x[perm[0]], x[perm[1]], x[perm[2]]) {
            out |= 1 << idx;
        }
    }
    out
}

pub const PERMUTATIONS: [[usize; 3]; 6] = [[0, 1, 2], [0, 2, 1], [1, 0, 2], [1, 2, 0], [2, 0, 1], [2, 1, 0]];

/// `f(g0, g1, g2)` where each `g` is itself a truth table over (a, b, c).
pub fn compose(f: u8, g: [u8; 3]) -> u8 {
    let mut out = 0u8;
    for idx in 0..8 {
        let bit = |t: u8| (t >> idx) & 1 == 1;
        if eval_bit(f, bit(g[0]), bit(g[1]), bit(g[2])) {
            out |= 1 << idx;
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn known_tables() {
        assert_eq!(XOR3, 150);
        assert_eq!(MAJ, 232);
        assert_eq!(SEL, 0xCA);
        // ~(B | A) & C
        assert_eq!(!(VAR_B | VAR_A) & VAR_C, 2);
    }

    #[test]
    fn word_eval_matches_bit_eval() {
        for t in 0..=255u8 {
            let (a, b, c) = (0xF0u64, 0xCCu64, 0xAAu64);
            assert_eq!(eval_word(t, a, b, c) & 0xFF, t as u64, "truth {t}");
        }
    }

    #[test]
    fn dependencies() {
        assert_eq!(support_width(AND), 2);
        assert_eq!(support_width(NOT), 1);
        assert_eq!(support_width(SEL), 3);
        assert_eq!(support_width(TRUE), 0);
        assert!(!depends_on(VAR_C & VAR_A, 1));
        assert_eq!(flip_input(AND, 0), ANDNOT);
        assert_eq!(permute(ANDNOT, [1, 0, 2]), BIC);
        assert_eq!(compose(AND, [VAR_A, VAR_C, 0]), VAR_A & VAR_C);
    }
}
