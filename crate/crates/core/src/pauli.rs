//! Generalized Pauli (Weyl) operators on a qudit and their fractional powers.
//!
//! `X|k⟩ = |k ⊕ 1⟩`, `Z|k⟩ = ωᵏ|k⟩` with `ω = e^{2πi/d}`. Fractional powers are
//! defined spectrally: `Z^t = diag(e^{2πi k t/d})` on the eigenvalue index `k`
//! chosen by [`Branch`], and `X^t = F† Z^t F` where `F[j,k] = ω^{jk}/√d`.
//! Because `k` is an integer, both are periodic in `t` with period `d`.

use std::f64::consts::PI;
use std::fmt;

use num_traits::{ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{check_dim, QracError, Result};
use crate::qcore::{bell_state, c64, kron, ComplexMatrix, Ket, Rational, C64};

/// Which integer labels the eigenvalues `ωᵏ` carry when raised to a real power.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Branch {
    /// `k = 0, …, d−1`.
    #[default]
    Canonical,
    /// `k ∈ (−d/2, d/2]`, i.e. principal arguments.
    Centered,
}

impl Branch {
    fn label(self, k: usize, d: usize) -> f64 {
        match self {
            Branch::Canonical => k as f64,
            Branch::Centered => {
                if 2 * k > d {
                    k as f64 - d as f64
                } else {
                    k as f64
                }
            }
        }
    }
}

/// Exponent of a fractional Weyl power, stored exactly and reduced into `[0, d)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct WeylExponent {
    d: usize,
    t: Rational,
}

impl WeylExponent {
    pub fn new(d: usize, t: Rational) -> Result<Self> {
        check_dim(d)?;
        let period = Rational::from_integer(d as i128);
        let mut r = t - (t / period).floor() * period;
        if r >= period {
            r -= period;
        }
        Ok(Self { d, t: r })
    }

    /// `j/d`, the exponent of `(ᵈ√X)ʲ`.
    pub fn steps(d: usize, j: i128) -> Result<Self> {
        Self::new(d, Rational::new(j, d as i128))
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn exact(&self) -> Rational {
        self.t
    }

    pub fn value(&self) -> f64 {
        self.t.numer().to_f64().unwrap() / self.t.denom().to_f64().unwrap()
    }
}

impl fmt::Display for WeylExponent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.t)
    }
}

/// Label `(a, b)` of the generalized Bell state `(XᵃZᵇ ⊗ 1)|ψ⁺⟩`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct BellLabel {
    pub d: usize,
    pub a: usize,
    pub b: usize,
}

impl BellLabel {
    pub fn new(d: usize, a: usize, b: usize) -> Result<Self> {
        check_dim(d)?;
        if a >= d || b >= d {
            return Err(QracError::OutOfRange(format!("Bell label ({a}, {b}) for d = {d}")));
        }
        Ok(Self { d, a, b })
    }

    /// Position in the `a·d + b` ordering.
    pub fn index(&self) -> usize {
        self.a * self.d + self.b
    }

    pub fn from_index(d: usize, index: usize) -> Result<Self> {
        Self::new(d, index / d, index % d)
    }

    /// `XᵃZᵇ`.
    pub fn operator(&self) -> ComplexMatrix {
        let x = shift_x(self.d).unwrap();
        let z = clock_z(self.d).unwrap();
        &x.pow(self.a as u32) * &z.pow(self.b as u32)
    }
}

fn omega_pow(num: f64, d: usize) -> C64 {
    let phase = 2.0 * PI * num / d as f64;
    c64(phase.cos(), phase.sin())
}

/// Cyclic shift `X|k⟩ = |k ⊕ 1⟩`.
pub fn shift_x(d: usize) -> Result<ComplexMatrix> {
    check_dim(d)?;
    Ok(ComplexMatrix::from_fn(d, d, |i, j| {
        if i == (j + 1) % d {
            c64(1.0, 0.0)
        } else {
            C64::zero()
        }
    }))
}

/// Clock `Z|k⟩ = e^{2πik/d}|k⟩`.
pub fn clock_z(d: usize) -> Result<ComplexMatrix> {
    check_dim(d)?;
    let diag: Vec<C64> = (0..d).map(|k| omega_pow(k as f64, d)).collect();
    Ok(ComplexMatrix::from_diagonal(&diag))
}

/// Discrete Fourier transform `F[j,k] = ω^{jk}/√d`; satisfies `F† Z F = X`.
pub fn dft(d: usize) -> Result<ComplexMatrix> {
    check_dim(d)?;
    let norm = 1.0 / (d as f64).sqrt();
    Ok(ComplexMatrix::from_fn(d, d, |j, k| omega_pow(((j * k) % d) as f64, d) * norm))
}

pub fn frac_power_z(d: usize, t: f64) -> Result<ComplexMatrix> {
    frac_power_z_with_branch(d, t, Branch::Canonical)
}

pub fn frac_power_x(d: usize, t: f64) -> Result<ComplexMatrix> {
    frac_power_x_with_branch(d, t, Branch::Canonical)
}

pub fn frac_power_z_with_branch(d: usize, t: f64, branch: Branch) -> Result<ComplexMatrix> {
    check_dim(d)?;
    if !t.is_finite() {
        return Err(QracError::InvalidArgument(format!("non-finite exponent {t}")));
    }
    let diag: Vec<C64> = (0..d).map(|k| omega_pow(branch.label(k, d) * t, d)).collect();
    Ok(ComplexMatrix::from_diagonal(&diag))
}

pub fn frac_power_x_with_branch(d: usize, t: f64, branch: Branch) -> Result<ComplexMatrix> {
    let f = dft(d)?;
    let zt = frac_power_z_with_branch(d, t, branch)?;
    Ok(&(&f.adjoint() * &zt) * &f)
}

/// `X^a Z^b` for real exponents.
pub fn weyl(d: usize, a: f64, b: f64) -> Result<ComplexMatrix> {
    weyl_with_branch(d, a, b, Branch::Canonical)
}

pub fn weyl_with_branch(d: usize, a: f64, b: f64, branch: Branch) -> Result<ComplexMatrix> {
    Ok(&frac_power_x_with_branch(d, a, branch)? * &frac_power_z_with_branch(d, b, branch)?)
}

/// `X^a Z^b` from exact exponents (reduced mod `d` before evaluation).
pub fn weyl_exact(a: WeylExponent, b: WeylExponent, branch: Branch) -> Result<ComplexMatrix> {
    if a.d != b.d {
        return Err(QracError::Shape(format!("exponent dims {} and {} differ", a.d, b.d)));
    }
    weyl_with_branch(a.d, a.value(), b.value(), branch)
}

/// `(op ⊗ 1)|ψ⁺⟩` without forming the `d² × d²` operator.
pub fn act_on_first(op: &ComplexMatrix, d: usize) -> Result<Ket> {
    check_dim(d)?;
    if op.rows() != d || op.cols() != d {
        return Err(QracError::Shape(format!("expected a {d}x{d} operator")));
    }
    // (op ⊗ 1)(1/√d)Σ|ii⟩ = (1/√d) Σ_{j,i} op[j,i] |j i⟩
    let s = 1.0 / (d as f64).sqrt();
    let mut amps = vec![C64::zero(); d * d];
    for j in 0..d {
        for i in 0..d {
            amps[j * d + i] = op[(j, i)] * s;
        }
    }
    Ket::normalized(amps)
}

/// Generalized Bell state `(XᵃZᵇ ⊗ 1)|ψ⁺⟩`.
pub fn bell_basis_element(label: BellLabel) -> Ket {
    act_on_first(&label.operator(), label.d).expect("label dims are validated")
}

/// All `d²` Bell states in `a·d + b` order.
pub fn bell_basis(d: usize) -> Result<Vec<Ket>> {
    check_dim(d)?;
    Ok((0..d * d).map(|i| bell_basis_element(BellLabel::from_index(d, i).unwrap())).collect())
}

/// Reference check that [`act_on_first`] agrees with the explicit tensor product.
pub fn act_on_first_dense(op: &ComplexMatrix, d: usize) -> Result<Ket> {
    let full = kron(op, &ComplexMatrix::identity(d));
    Ok(bell_state(d)?.evolve(&full))
}

#[cfg(test)]
mod tests {
    use super::*;

    const TOL: f64 = 1e-12;

    fn m(rows: usize, entries: &[(f64, f64)]) -> ComplexMatrix {
        ComplexMatrix::new(rows, rows, entries.iter().map(|&(r, i)| c64(r, i)).collect()).unwrap()
    }

    #[test]
    fn qubit_paulis() {
        let x = shift_x(2).unwrap();
        let z = clock_z(2).unwrap();
        assert!(x.approx_eq(&m(2, &[(0., 0.), (1., 0.), (1., 0.), (0., 0.)]), TOL));
        assert!(z.approx_eq(&m(2, &[(1., 0.), (0., 0.), (0., 0.), (-1., 0.)]), TOL));
    }

    #[test]
    fn shift_wraps_around() {
        let x = shift_x(3).unwrap();
        let out = x.apply(&Ket::basis(3, 2));
        assert!((out[0] - c64(1.0, 0.0)).norm() < TOL);
    }

    #[test]
    fn weyl_commutation_and_order() {
        for d in 2..=6 {
            let x = shift_x(d).unwrap();
            let z = clock_z(d).unwrap();
            let w = omega_pow(1.0, d);
            assert!((&z * &x).approx_eq(&(&x * &z).scale(w), TOL), "d={d}");
            assert!(x.pow(d as u32).approx_eq(&ComplexMatrix::identity(d), TOL));
            assert!(z.pow(d as u32).approx_eq(&ComplexMatrix::identity(d), TOL));
            assert!(x.is_unitary(TOL) && z.is_unitary(TOL));
        }
    }

    #[test]
    fn dft_convention() {
        let h = dft(2).unwrap();
        let s = 1.0 / 2f64.sqrt();
        assert!(h.approx_eq(&m(2, &[(s, 0.), (s, 0.), (s, 0.), (-s, 0.)]), TOL));
        for d in 2..=8 {
            assert!(dft(d).unwrap().is_unitary(TOL));
        }
        for d in 2..=6 {
            let f = dft(d).unwrap();
            let z = clock_z(d).unwrap();
            assert!((&(&f.adjoint() * &z) * &f).approx_eq(&shift_x(d).unwrap(), TOL), "d={d}");
        }
        // the other direction yields X† once d > 2
        let f = dft(3).unwrap();
        let other = &(&f * &clock_z(3).unwrap()) * &f.adjoint();
        assert!(other.approx_eq(&shift_x(3).unwrap().adjoint(), TOL));
    }

    #[test]
    fn sqrt_x_qubit() {
        let sx = frac_power_x(2, 0.5).unwrap();
        let expect = m(2, &[(0.5, 0.5), (0.5, -0.5), (0.5, -0.5), (0.5, 0.5)]);
        assert!(sx.approx_eq(&expect, TOL), "{sx:?}");
    }

    #[test]
    fn frac_powers_reproduce_integer_powers() {
        for d in 2..=6 {
            let x = shift_x(d).unwrap();
            let z = clock_z(d).unwrap();
            assert!(frac_power_x(d, 0.0).unwrap().approx_eq(&ComplexMatrix::identity(d), TOL));
            assert!(frac_power_z(d, 0.0).unwrap().approx_eq(&ComplexMatrix::identity(d), TOL));
            for n in 0..2 * d as u32 {
                assert!(frac_power_x(d, n as f64).unwrap().approx_eq(&x.pow(n), TOL));
                assert!(frac_power_z(d, n as f64).unwrap().approx_eq(&z.pow(n), TOL));
            }
            let h = frac_power_x(d, 0.5).unwrap();
            assert!((&h * &h).approx_eq(&x, TOL), "d={d}");
        }
    }

    #[test]
    fn centered_branch_agrees_on_integers() {
        for d in 2..=5 {
            for n in 0..d {
                let a = frac_power_x_with_branch(d, n as f64, Branch::Centered).unwrap();
                assert!(a.approx_eq(&shift_x(d).unwrap().pow(n as u32), TOL));
            }
        }
    }

    #[test]
    fn weyl_examples() {
        let xz = weyl(2, 1.0, 1.0).unwrap();
        assert!(xz.approx_eq(&m(2, &[(0., 0.), (-1., 0.), (1., 0.), (0., 0.)]), TOL));

        let psi = bell_state(2).unwrap();
        let rotated = act_on_first(&weyl(2, 0.25, 0.25).unwrap(), 2).unwrap();
        let expect = (3.0 + 2.0 * 2f64.sqrt()) / 8.0;
        assert!((psi.overlap(&rotated) - expect).abs() < TOL);
    }

    #[test]
    fn weyl_traces_vanish_off_identity() {
        for d in 2..=5 {
            for a in 0..d {
                for b in 0..d {
                    let w = weyl(d, a as f64, b as f64).unwrap();
                    let v = (w.trace() / d as f64).norm_sqr();
                    let expect = if a == 0 && b == 0 { 1.0 } else { 0.0 };
                    assert!((v - expect).abs() < TOL, "d={d} a={a} b={b}");
                }
            }
        }
    }

    #[test]
    fn bell_basis_is_orthonormal() {
        for d in 2..=5 {
            let basis = bell_basis(d).unwrap();
            assert!(basis[0].same_state(&bell_state(d).unwrap(), 1e-14));
            for (i, u) in basis.iter().enumerate() {
                for (j, v) in basis.iter().enumerate() {
                    let g = u.inner(v);
                    let expect = if i == j { 1.0 } else { 0.0 };
                    assert!((g - c64(expect, 0.0)).norm() < TOL, "d={d} ({i},{j})");
                }
            }
        }
    }

    #[test]
    fn sparse_and_dense_bell_actions_agree() {
        let op = weyl(3, 1.0 / 3.0, 2.0 / 3.0).unwrap();
        let a = act_on_first(&op, 3).unwrap();
        let b = act_on_first_dense(&op, 3).unwrap();
        assert!((a.inner(&b) - c64(1.0, 0.0)).norm() < TOL);
    }

    #[test]
    fn exponent_reduction() {
        let e = WeylExponent::new(3, Rational::new(-7, 6)).unwrap();
        assert_eq!(e.exact(), Rational::new(11, 6));
        let e = WeylExponent::steps(4, 16).unwrap();
        assert_eq!(e.exact(), Rational::zero());
        let a = weyl_exact(WeylExponent::new(3, Rational::new(-7, 6)).unwrap(), WeylExponent::steps(3, 0).unwrap(), Branch::Canonical).unwrap();
        assert!(a.approx_eq(&weyl(3, -7.0 / 6.0, 0.0).unwrap(), 1e-12));
        assert!(BellLabel::new(2, 2, 0).is_err());
    }
}
