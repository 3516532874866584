//! Reference implementation used by the integration tests. It shares no code
//! with the library: fractional powers come from the closed-form sum
//! `Xᵗ[j,l] = (1/d) Σₖ e^{2πik(t−j+l)/d}`, overlaps from `|tr(A†B)|²/d²`.

#![allow(dead_code)]

use num_complex::Complex64;
use std::f64::consts::PI;

pub type Mat = Vec<Vec<Complex64>>;

pub const QUBIT: f64 = 0.728_553_390_593_273_7;

pub fn table(d: usize) -> Vec<[usize; 2]> {
    match d {
        2 => vec![[0, 0], [0, 1], [1, 1], [1, 0]],
        3 => vec![[0, 0], [0, 1], [0, 2], [1, 2], [1, 0], [1, 1], [2, 1], [2, 2], [2, 0]],
        4 => vec![
            [0, 0], [0, 1], [0, 2], [0, 3], [1, 3], [1, 0], [1, 1], [1, 2],
            [2, 2], [2, 3], [2, 0], [2, 1], [3, 1], [3, 2], [3, 3], [3, 0],
        ],
        _ => panic!("no reference table for d = {d}"),
    }
}

/// `X^a Z^b` for real exponents.
pub fn weyl(d: usize, a: f64, b: f64) -> Mat {
    let df = d as f64;
    (0..d)
        .map(|j| {
            (0..d)
                .map(|l| {
                    let x: Complex64 = (0..d)
                        .map(|k| Complex64::from_polar(1.0, 2.0 * PI * k as f64 * (a - j as f64 + l as f64) / df))
                        .sum::<Complex64>()
                        / df;
                    x * Complex64::from_polar(1.0, 2.0 * PI * l as f64 * b / df)
                })
                .collect()
        })
        .collect()
}

/// `|⟨ψ⁺|(A† B ⊗ 1)|ψ⁺⟩|²`.
pub fn overlap(d: usize, a: &Mat, b: &Mat) -> f64 {
    let mut acc = Complex64::new(0.0, 0.0);
    for j in 0..d {
        for l in 0..d {
            acc += a[j][l].conj() * b[j][l];
        }
    }
    acc.norm_sqr() / (d * d) as f64
}

fn position(t: &[[usize; 2]], p: [usize; 2]) -> usize {
    t.iter().position(|&q| q == p).expect("pair in table")
}

pub struct Qracse {
    pub per_choice: [f64; 2],
    pub p_avg: f64,
    pub p_min: f64,
}

/// Success probabilities of the two-string protocol with table `t`.
pub fn qracse(d: usize, t: &[[usize; 2]]) -> Qracse {
    let n = d * d;
    let df = d as f64;
    let enc = |e0: usize, e1: usize| weyl(d, e0 as f64 / df, e1 as f64 / df);
    let bob = |c: usize, b0: usize, b1: usize| {
        let s = if c == 0 { 1.0 } else { -1.0 };
        let off = (1.0 - c as f64) / 2.0 - 1.0 / (2.0 * df);
        weyl(d, s * b0 as f64 + off, s * b1 as f64 + off)
    };
    let mut per_choice = [0.0; 2];
    let mut p_min = f64::INFINITY;
    for c in 0..2 {
        for s in 0..n {
            let mut total = 0.0;
            for o in 0..n {
                let (a0, a1) = if c == 0 { (s, o) } else { (o, s) };
                let (x0, x1) = ([a0 / d, a0 % d], [a1 / d, a1 % d]);
                let e0 = position(t, [x0[0], x1[0]]);
                let e1 = position(t, [x0[1], x1[1]]);
                total += overlap(d, &bob(c, s / d, s % d), &enc(e0, e1));
            }
            let avg = total / n as f64;
            per_choice[c] += avg / n as f64;
            p_min = p_min.min(avg);
        }
    }
    Qracse { per_choice, p_avg: 0.5 * (per_choice[0] + per_choice[1]), p_min }
}

/// Probability that the qubit family `X^{sx·bx+ox} Z^{sz·bz+oz}` returns
/// `(bx, bz)` on the four-bit encoding of `bits` (a0 a1 a2 a3).
pub fn four_bit_outcome(bits: [usize; 4], fam: (f64, f64, f64, f64), bx: usize, bz: usize) -> f64 {
    let t = table(2);
    let e0 = position(&t, [bits[0], bits[2]]);
    let e1 = position(&t, [bits[1], bits[3]]);
    let enc = weyl(2, e0 as f64 / 2.0, e1 as f64 / 2.0);
    let (sx, ox, sz, oz) = fam;
    overlap(2, &weyl(2, sx * bx as f64 + ox, sz * bz as f64 + oz), &enc)
}

pub const F01: (f64, f64, f64, f64) = (1.0, 0.25, 1.0, 0.25);
pub const F23: (f64, f64, f64, f64) = (-1.0, -0.25, -1.0, -0.25);

/// Average over all 16 inputs of the full-outcome success of the `{a0,a1}` family.
pub fn four_bit_single() -> f64 {
    let mut total = 0.0;
    for input in 0..16 {
        let b = [(input >> 3) & 1, (input >> 2) & 1, (input >> 1) & 1, input & 1];
        total += four_bit_outcome(b, F01, b[0], b[1]);
    }
    total / 16.0
}
