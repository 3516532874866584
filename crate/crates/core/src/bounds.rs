//! Upper bounds for the classical-input no-signalling QRAC from monogamy of
//! entanglement: optimal cloning fidelities and the entanglement-fidelity
//! trade-off between several receivers.

use nalgebra::{DMatrix, DVector};
use num_traits::ToPrimitive;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{check_dim, QracError, Result};
use crate::qcore::{
    chunk_rng, entanglement_from_transmission, random_unitary, square_root_dim, ComplexMatrix, DensityMatrix,
    Rational, C64,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CloningParams {
    pub n1: usize,
    pub n2: usize,
    pub d: usize,
}

impl CloningParams {
    pub fn new(n1: usize, n2: usize, d: usize) -> Result<Self> {
        check_dim(d)?;
        if n1 == 0 || n1 > n2 {
            return Err(QracError::InvalidArgument(format!("need 1 ≤ N1 ≤ N2, got N1 = {n1}, N2 = {n2}")));
        }
        Ok(Self { n1, n2, d })
    }
}

const PROB_TOL: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AsymSpec {
    pub d: usize,
    pub probabilities: Vec<f64>,
}

impl AsymSpec {
    pub fn new(d: usize, probabilities: Vec<f64>) -> Result<Self> {
        check_dim(d)?;
        if probabilities.iter().any(|&p| !(p >= 0.0)) {
            return Err(QracError::InvalidArgument("probabilities must be non-negative".into()));
        }
        let total: f64 = probabilities.iter().sum();
        if (total - 1.0).abs() > PROB_TOL {
            return Err(QracError::InvalidArgument(format!("probabilities sum to {total}, not 1")));
        }
        Ok(Self { d, probabilities })
    }

    pub fn n(&self) -> usize {
        self.probabilities.len()
    }
}

/// A bound value; `numerator`/`denominator` are set when it is an exact rational.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundResult {
    pub name: String,
    pub value: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub numerator: Option<i64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub denominator: Option<i64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub point: Option<Vec<f64>>,
}

impl BoundResult {
    pub fn exact(name: impl Into<String>, r: Rational) -> Self {
        Self {
            name: name.into(),
            value: rational_f64(r),
            numerator: r.numer().to_i64(),
            denominator: r.denom().to_i64(),
            point: None,
        }
    }

    pub fn approximate(name: impl Into<String>, value: f64) -> Self {
        Self { name: name.into(), value, numerator: None, denominator: None, point: None }
    }
}

fn rational_f64(r: Rational) -> f64 {
    r.numer().to_f64().unwrap() / r.denom().to_f64().unwrap()
}

/// Optimal `N₁ → N₂` universal cloning fidelity per output.
pub fn werner_fidelity(params: CloningParams) -> Rational {
    let n1 = params.n1 as i128;
    let n2 = params.n2 as i128;
    let d = params.d as i128;
    Rational::new(n1, n2) + Rational::new((n2 - n1) * (n1 + 1), n2 * (n1 + d))
}

/// `(N + d − 1)/(d N)`.
pub fn symmetric_bound(d: usize, n: usize) -> Result<Rational> {
    check_dim(d)?;
    if n == 0 {
        return Err(QracError::InvalidArgument("need at least one receiver".into()));
    }
    Ok(Rational::new((n + d - 1) as i128, (d * n) as i128))
}

/// The same bound reached through `1 → N` cloning: convert each clone's
/// fidelity to an entanglement fidelity and average.
pub fn symmetric_bound_via_cloning(d: usize, n: usize) -> Result<Rational> {
    let f = werner_fidelity(CloningParams::new(1, n, d)?);
    let big_f = entanglement_from_transmission(f, d)?;
    let total: Rational = (0..n).map(|_| big_f).sum();
    Ok(total / Rational::from_integer(n as i128))
}

/// `(d−1)/d + (Σ√Fᵢ)²/(N+d−1) − ΣFᵢ`; non-negative exactly when the
/// fidelities are jointly achievable.
pub fn kay_constraint_residual(f_values: &[f64], d: usize) -> Result<f64> {
    check_dim(d)?;
    if f_values.iter().any(|&f| !(0.0..=1.0).contains(&f)) {
        return Err(QracError::OutOfRange("fidelities must lie in [0, 1]".into()));
    }
    let n = f_values.len() as f64;
    let df = d as f64;
    let roots: f64 = f_values.iter().map(|f| f.sqrt()).sum();
    let sum: f64 = f_values.iter().sum();
    Ok((df - 1.0) / df + roots * roots / (n + df - 1.0) - sum)
}

/// `½(1 + √(1 + 4(d²−1)(p−1)p/d²))`.
pub fn asym_closed_form_n2(p: f64, d: usize) -> Result<f64> {
    check_dim(d)?;
    if !(0.0..=1.0).contains(&p) {
        return Err(QracError::OutOfRange(format!("p = {p} outside [0, 1]")));
    }
    let d2 = (d * d) as f64;
    Ok(0.5 * (1.0 + (1.0 + 4.0 * (d2 - 1.0) * (p - 1.0) * p / d2).sqrt()))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AsymOptimum {
    pub value: f64,
    /// `xᵢ = √Fᵢ` at the optimum.
    pub point: Vec<f64>,
}

const ASCENT_TOL: f64 = 1e-10;
const MAX_ITERS: usize = 20_000;
pub const DEFAULT_RESTARTS: usize = 64;

struct Ellipsoid {
    n: usize,
    inv_s: f64,
    c: f64,
}

impl Ellipsoid {
    /// `xᵀ(1 − J/s)x`.
    fn quad(&self, x: &[f64]) -> f64 {
        let sum: f64 = x.iter().sum();
        x.iter().map(|v| v * v).sum::<f64>() - self.inv_s * sum * sum
    }

    fn normal(&self, x: &[f64]) -> Vec<f64> {
        let sum: f64 = x.iter().sum();
        x.iter().map(|v| v - self.inv_s * sum).collect()
    }

    fn retract(&self, x: &mut [f64]) -> Result<()> {
        for v in x.iter_mut() {
            *v = v.max(0.0);
        }
        let q = self.quad(x);
        if !(q > 0.0) {
            return Err(QracError::Infeasible("iterate left the feasible region".into()));
        }
        let scale = (self.c / q).sqrt();
        for v in x.iter_mut() {
            *v *= scale;
        }
        if x.iter().any(|&v| v > 1.0 + 1e-9) {
            return Err(QracError::Infeasible("constraint surface leaves the unit box".into()));
        }
        Ok(())
    }
}

fn objective(p: &[f64], x: &[f64]) -> f64 {
    p.iter().zip(x).map(|(p, x)| p * x * x).sum()
}

fn ascend(p: &[f64], e: &Ellipsoid, mut x: Vec<f64>) -> Result<(f64, Vec<f64>)> {
    e.retract(&mut x)?;
    let mut value = objective(p, &x);
    let mut step = 0.5;
    for _ in 0..MAX_ITERS {
        let g: Vec<f64> = p.iter().zip(&x).map(|(p, x)| 2.0 * p * x).collect();
        let nrm = e.normal(&x);
        let nn: f64 = nrm.iter().map(|v| v * v).sum();
        let gn: f64 = g.iter().zip(&nrm).map(|(a, b)| a * b).sum();
        let tangent: Vec<f64> = g.iter().zip(&nrm).map(|(g, n)| g - gn / nn * n).collect();
        let mut candidate: Vec<f64> = x.iter().zip(&tangent).map(|(x, t)| x + step * t).collect();
        e.retract(&mut candidate)?;
        let next = objective(p, &candidate);
        if next > value {
            let gain = next - value;
            x = candidate;
            value = next;
            if gain < ASCENT_TOL * 1e-3 {
                break;
            }
        } else {
            step *= 0.5;
            if step < ASCENT_TOL {
                break;
            }
        }
    }
    Ok((value, x))
}

/// Maximizes `Σ pᵢ xᵢ²` over `x ≥ 0` on `Σxᵢ² − (Σxᵢ)²/(N+d−1) = (d−1)/d`.
///
/// Projected gradient ascent from `restarts` seeded random starts, each
/// iterate pulled back to the surface by a radial rescale. The best value
/// wins; ties go to the lowest restart index.
pub fn asym_optimize(spec: &AsymSpec, restarts: usize, seed: u64) -> Result<AsymOptimum> {
    let n = spec.n();
    if n < 2 {
        return Err(QracError::InvalidArgument("need at least two receivers".into()));
    }
    if restarts == 0 {
        return Err(QracError::InvalidArgument("need at least one restart".into()));
    }
    let d = spec.d as f64;
    let e = Ellipsoid { n, inv_s: 1.0 / (n as f64 + d - 1.0), c: (d - 1.0) / d };
    let p = &spec.probabilities;
    let runs: Vec<Result<(f64, Vec<f64>)>> = (0..restarts)
        .into_par_iter()
        .map(|r| {
            let mut rng = chunk_rng(seed, r as u64);
            let start: Vec<f64> = if r == 0 {
                vec![1.0; e.n]
            } else {
                (0..e.n).map(|_| rng.gen_range(0.0..1.0)).collect()
            };
            ascend(p, &e, start)
        })
        .collect();
    let mut best: Option<(f64, Vec<f64>)> = None;
    for run in runs {
        let (v, x) = run?;
        if best.as_ref().is_none_or(|b| v > b.0) {
            best = Some((v, x));
        }
    }
    let (value, point) = best.expect("at least one restart");
    Ok(AsymOptimum { value, point })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FefMethod {
    /// Exact two-qubit formula.
    MagicBasis,
    /// Local-unitary ascent; a lower estimate.
    PolarAscent,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FefEstimate {
    pub value: f64,
    pub method: FefMethod,
}

const FEF_SEED: u64 = 0x5eed_fef0;
const FEF_RESTARTS: usize = 16;

/// `max ⟨ψ|ρ|ψ⟩` over maximally entangled `ψ`.
pub fn fully_entangled_fraction(rho: &DensityMatrix) -> Result<FefEstimate> {
    let d = square_root_dim(rho.dim())?;
    if d == 2 {
        return Ok(FefEstimate { value: fef_magic_basis(rho.matrix()), method: FefMethod::MagicBasis });
    }
    fully_entangled_fraction_ascent(rho, FEF_RESTARTS, FEF_SEED)
}

/// Largest eigenvalue of the real part of `ρ` in the magic basis.
fn fef_magic_basis(rho: &ComplexMatrix) -> f64 {
    let s = 1.0 / 2f64.sqrt();
    let (o, one, i) = (C64::new(0.0, 0.0), C64::new(s, 0.0), C64::new(0.0, s));
    #[rustfmt::skip]
    let m = DMatrix::from_row_slice(4, 4, &[
        one, o, o, i,
        o, i, one, o,
        o, i, -one, o,
        one, o, o, -i,
    ]);
    let in_magic = m.adjoint() * rho.as_nalgebra() * &m;
    let re = DMatrix::from_fn(4, 4, |r, c| (in_magic[(r, c)].re + in_magic[(c, r)].re) * 0.5);
    re.symmetric_eigenvalues().iter().copied().fold(f64::NEG_INFINITY, f64::max)
}

fn row_major_vec(u: &DMatrix<C64>) -> DVector<C64> {
    DVector::from_iterator(u.len(), u.transpose().iter().copied())
}

/// Iterates `U ← polar(unvec(ρ vec U))`, which never decreases
/// `vec(U)† ρ vec(U) / d`, from seeded Haar-random starts.
pub fn fully_entangled_fraction_ascent(rho: &DensityMatrix, restarts: usize, seed: u64) -> Result<FefEstimate> {
    let d = square_root_dim(rho.dim())?;
    if restarts == 0 {
        return Err(QracError::InvalidArgument("need at least one restart".into()));
    }
    let r = rho.matrix().as_nalgebra();
    let value_of = |u: &DMatrix<C64>| -> f64 {
        let v = row_major_vec(u);
        (v.adjoint() * r * &v)[(0, 0)].re / d as f64
    };
    let best = (0..restarts)
        .into_par_iter()
        .map(|k| {
            let mut rng = chunk_rng(seed, k as u64);
            let mut u = random_unitary(d, &mut rng).as_nalgebra().clone();
            let mut value = value_of(&u);
            for _ in 0..2000 {
                let w = r * row_major_vec(&u);
                let g = DMatrix::from_fn(d, d, |j, i| w[j * d + i]);
                let svd = g.svd(true, true);
                let (Some(left), Some(right)) = (svd.u, svd.v_t) else { break };
                u = left * right;
                let next = value_of(&u);
                let done = next - value < 1e-14;
                value = value.max(next);
                if done {
                    break;
                }
            }
            value
        })
        .collect::<Vec<f64>>()
        .into_iter()
        .fold(f64::NEG_INFINITY, f64::max);
    Ok(FefEstimate { value: best, method: FefMethod::PolarAscent })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pauli::{bell_basis_element, BellLabel};
    use crate::qcore::{bell_state, chunk_rng, random_density_matrix};

    fn r(n: i128, d: i128) -> Rational {
        Rational::new(n, d)
    }

    #[test]
    fn werner_examples() {
        assert_eq!(werner_fidelity(CloningParams::new(1, 2, 2).unwrap()), r(5, 6));
        assert_eq!(werner_fidelity(CloningParams::new(1, 3, 2).unwrap()), r(7, 9));
        assert_eq!(werner_fidelity(CloningParams::new(3, 3, 5).unwrap()), r(1, 1));
        assert!(CloningParams::new(3, 2, 2).is_err());
        assert!(CloningParams::new(0, 2, 2).is_err());
    }

    #[test]
    fn symmetric_examples() {
        assert_eq!(symmetric_bound(2, 2).unwrap(), r(3, 4));
        assert_eq!(symmetric_bound(3, 2).unwrap(), r(2, 3));
        assert_eq!(symmetric_bound(4, 1).unwrap(), r(1, 1));
        for d in 2..=6 {
            for n in 1..=8 {
                assert_eq!(symmetric_bound_via_cloning(d, n).unwrap(), symmetric_bound(d, n).unwrap());
            }
        }
    }

    #[test]
    fn kay_examples() {
        let f = rational_f64(symmetric_bound(2, 3).unwrap());
        assert!(kay_constraint_residual(&[f, f, f], 2).unwrap().abs() < 1e-12);
        assert!((kay_constraint_residual(&[0.0, 0.0], 3).unwrap() - 2.0 / 3.0).abs() < 1e-15);
        let full = kay_constraint_residual(&[1.0, 1.0], 2).unwrap();
        assert!((full - (0.5 + 4.0 / 3.0 - 2.0)).abs() < 1e-15);
        assert!(kay_constraint_residual(&[1.2], 2).is_err());
    }

    #[test]
    fn closed_form_examples() {
        assert!((asym_closed_form_n2(0.5, 2).unwrap() - 0.75).abs() < 1e-15);
        assert_eq!(asym_closed_form_n2(0.0, 3).unwrap(), 1.0);
        assert_eq!(asym_closed_form_n2(1.0, 3).unwrap(), 1.0);
        assert!((asym_closed_form_n2(0.25, 2).unwrap() - 0.5 * (1.0 + (7.0f64 / 16.0).sqrt())).abs() < 1e-15);
    }

    #[test]
    fn optimizer_examples() {
        let uni = asym_optimize(&AsymSpec::new(2, vec![0.5, 0.5]).unwrap(), 64, 1).unwrap();
        assert!((uni.value - 0.75).abs() < 1e-6);
        let edge = asym_optimize(&AsymSpec::new(2, vec![1.0, 0.0]).unwrap(), 64, 1).unwrap();
        assert!((edge.value - 1.0).abs() < 1e-6);
        let three = asym_optimize(&AsymSpec::new(2, vec![1.0 / 3.0; 3]).unwrap(), 64, 1).unwrap();
        assert!((three.value - 2.0 / 3.0).abs() < 1e-6);
    }

    #[test]
    fn optimizer_rejects_bad_specs() {
        assert!(AsymSpec::new(2, vec![0.5, 0.6]).is_err());
        assert!(AsymSpec::new(2, vec![1.5, -0.5]).is_err());
        assert!(asym_optimize(&AsymSpec::new(2, vec![1.0]).unwrap(), 8, 0).is_err());
    }

    #[test]
    fn fef_examples() {
        let psi = DensityMatrix::from_ket(&bell_state(2).unwrap());
        assert!((fully_entangled_fraction(&psi).unwrap().value - 1.0).abs() < 1e-12);
        let mixed = DensityMatrix::maximally_mixed(4);
        assert!((fully_entangled_fraction(&mixed).unwrap().value - 0.25).abs() < 1e-12);
        let weights = [0.7, 0.1, 0.1, 0.1];
        let m = (0..4).fold(ComplexMatrix::zeros(4, 4), |acc, i| {
            let p = bell_basis_element(BellLabel::from_index(2, i).unwrap()).projector();
            &acc + &p.scale(C64::new(weights[i], 0.0))
        });
        let bd = DensityMatrix::new(m).unwrap();
        let est = fully_entangled_fraction(&bd).unwrap();
        assert_eq!(est.method, FefMethod::MagicBasis);
        assert!((est.value - 0.7).abs() < 1e-12);
    }

    #[test]
    fn ascent_agrees_with_magic_basis() {
        let mut rng = chunk_rng(5, 0);
        for _ in 0..10 {
            let rho = random_density_matrix(4, &mut rng);
            let exact = fully_entangled_fraction(&rho).unwrap().value;
            let est = fully_entangled_fraction_ascent(&rho, 8, 3).unwrap().value;
            assert!(est <= exact + 1e-10);
            assert!((est - exact).abs() < 1e-6, "{est} vs {exact}");
        }
    }

    #[test]
    fn qutrit_ascent_finds_bell_states() {
        let psi = DensityMatrix::from_ket(&bell_basis_element(BellLabel::from_index(3, 5).unwrap()));
        let est = fully_entangled_fraction(&psi).unwrap();
        assert_eq!(est.method, FefMethod::PolarAscent);
        assert!((est.value - 1.0).abs() < 1e-9);
    }
}
