//! Teleportation with a restricted number of measurement outcomes, and the
//! no-signalling QRAC strategies built from it.

use nalgebra::DVector;
use num_traits::ToPrimitive;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::codes::builtin_table;
use crate::error::{check_dim, QracError, Result};
use crate::pauli::{act_on_first, BellLabel};
use crate::qcore::{
    bell_state, entanglement_fidelity, partial_trace_matrix, singlet_overlap, ComplexMatrix, DensityMatrix, Ket,
    Rational, C64, PSD_TOL,
};
use crate::qracse::{encode, encoding_indices, measurement_basis};

const POVM_TOL: f64 = 1e-10;

#[derive(Clone, Debug)]
pub struct Povm {
    d: usize,
    elements: Vec<ComplexMatrix>,
}

impl Povm {
    /// Elements act on a `d²`-dimensional space; each must be PSD and they must sum to 1.
    pub fn new(d: usize, elements: Vec<ComplexMatrix>) -> Result<Self> {
        check_dim(d)?;
        let n = d * d;
        if elements.is_empty() {
            return Err(QracError::InvalidArgument("POVM needs at least one element".into()));
        }
        let mut sum = ComplexMatrix::zeros(n, n);
        for (i, e) in elements.iter().enumerate() {
            if e.rows() != n || e.cols() != n {
                return Err(QracError::Shape(format!("element {i} is {}x{}, expected {n}x{n}", e.rows(), e.cols())));
            }
            if !e.is_hermitian(POVM_TOL) {
                return Err(QracError::InvalidArgument(format!("element {i} is not Hermitian")));
            }
            let min = e.hermitian_eigenvalues().first().copied().unwrap_or(0.0);
            if min < PSD_TOL {
                return Err(QracError::InvalidArgument(format!("element {i} has eigenvalue {min}")));
            }
            sum = &sum + e;
        }
        if !sum.approx_eq(&ComplexMatrix::identity(n), POVM_TOL) {
            return Err(QracError::InvalidArgument("POVM elements do not sum to the identity".into()));
        }
        Ok(Self { d, elements })
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn elements(&self) -> &[ComplexMatrix] {
        &self.elements
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StrategyResult {
    pub strategy_name: String,
    pub d: usize,
    #[serde(rename = "entanglement_fidelity")]
    pub entanglement_fidelity_f: Option<f64>,
    #[serde(rename = "transmission_fidelity")]
    pub transmission_fidelity_f: Option<f64>,
    pub success_probability: f64,
    /// Exact value of the headline quantity, as `n/m`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub exact: Option<String>,
    /// Independent simulation of the headline quantity.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<f64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
}

fn rational_f64(r: Rational) -> f64 {
    r.numer().to_f64().unwrap() / r.denom().to_f64().unwrap()
}

fn transmission(f_ent: f64, d: usize) -> f64 {
    (d as f64 * f_ent + 1.0) / (d as f64 + 1.0)
}

fn check_k(d: usize, k: usize) -> Result<()> {
    check_dim(d)?;
    if k == 0 || k > d * d {
        return Err(QracError::OutOfRange(format!("k = {k} outside 1..={}", d * d)));
    }
    Ok(())
}

/// `(W* ⊗ 1)|ψ⁺⟩`, the complex conjugate of the Bell state for `label`.
fn conjugate_bell(label: BellLabel) -> Ket {
    let k = act_on_first(&label.operator(), label.d).expect("label dims are validated");
    Ket::new(k.amplitudes().iter().map(|a| a.conj()).collect()).expect("conjugation keeps the norm")
}

/// `k − 1` transposed Bell projectors plus the complement of their sum.
pub fn constrained_povm(d: usize, k: usize) -> Result<Povm> {
    check_k(d, k)?;
    let n = d * d;
    let mut elements: Vec<ComplexMatrix> =
        (0..k - 1).map(|i| conjugate_bell(BellLabel::from_index(d, i).unwrap()).projector()).collect();
    let used = elements.iter().fold(ComplexMatrix::zeros(n, n), |acc, e| &acc + e);
    elements.push(&ComplexMatrix::identity(n) - &used);
    Povm::new(d, elements)
}

fn embed(op: &ComplexMatrix, before: usize, after: usize) -> ComplexMatrix {
    ComplexMatrix::identity(before).kron(op).kron(&ComplexMatrix::identity(after))
}

/// Per-outcome singlet overlaps `⟨ψ⁺|ρ⁽ⁱ⁾_CB|ψ⁺⟩` for the constrained protocol.
///
/// Subsystems are ordered `C, D, A, B`; `ψ⁺_CD ⊗ ψ⁺_AB` is measured on `DA`
/// and outcome `i` is corrected on `B` with the conjugate Weyl operator of
/// its label (the complement uses the last label).
pub fn constrained_teleport_contributions(d: usize, k: usize) -> Result<Vec<f64>> {
    let povm = constrained_povm(d, k)?;
    let psi = bell_state(d)?.kron(&bell_state(d)?);
    let v = psi.as_nalgebra();
    let dims = [d, d, d, d];
    povm.elements()
        .par_iter()
        .enumerate()
        .map(|(i, m)| {
            let correction = BellLabel::from_index(d, i)?.operator().conj();
            let u = embed(&correction, d * d * d, 1);
            let left: DVector<C64> = u.as_nalgebra() * (embed(m, d, d).as_nalgebra() * v);
            let right: DVector<C64> = u.as_nalgebra() * v;
            let sigma = ComplexMatrix::from_fn(left.len(), right.len(), |r, c| left[r] * right[c].conj());
            let cb = partial_trace_matrix(&sigma, &dims, &[0, 3])?;
            Ok(singlet_overlap(&cb, d))
        })
        .collect()
}

/// Entanglement fidelity of teleportation when Alice's measurement has `k` outcomes.
pub fn constrained_teleport_fidelity(d: usize, k: usize) -> Result<StrategyResult> {
    let f_ent: f64 = constrained_teleport_contributions(d, k)?.iter().sum();
    let exact = Rational::new(k as i128, (d * d) as i128);
    Ok(StrategyResult {
        strategy_name: format!("constrained teleportation (k = {k})"),
        d,
        entanglement_fidelity_f: Some(f_ent),
        transmission_fidelity_f: Some(transmission(f_ent, d)),
        success_probability: f_ent,
        exact: Some(exact.to_string()),
        witness: Some(rational_f64(exact)),
        notes: Vec::new(),
    })
}

/// Both qudits teleported through one `d²`-outcome measurement, `k′` outcomes
/// serving the first qudit and the rest the second.
pub fn nsqrac_split_strategy(d: usize, k_prime: usize) -> Result<StrategyResult> {
    check_dim(d)?;
    let n = d * d;
    if k_prime > n {
        return Err(QracError::OutOfRange(format!("k' = {k_prime} outside 0..={n}")));
    }
    let outcomes = constrained_teleport_contributions(d, n)?;
    let f1: f64 = outcomes[..k_prime].iter().sum();
    let f2: f64 = outcomes[k_prime..].iter().sum();
    let p = 0.5 * (f1 + f2);
    let exact = Rational::new(1, 2) * (Rational::new(k_prime as i128, n as i128) + Rational::new((n - k_prime) as i128, n as i128));
    Ok(StrategyResult {
        strategy_name: format!("split outcomes (k' = {k_prime})"),
        d,
        entanglement_fidelity_f: None,
        transmission_fidelity_f: None,
        success_probability: p,
        exact: Some(exact.to_string()),
        witness: Some(p),
        notes: vec![format!("F1 = {f1}, F2 = {f2}")],
    })
}

/// Teleport the first qudit perfectly and answer the second with the maximally mixed state.
pub fn nsqrac_favored_strategy(d: usize) -> Result<StrategyResult> {
    check_dim(d)?;
    let n = d * d;
    let exact = Rational::new(1, 2) * (Rational::from_integer(1) + Rational::new(1, n as i128));
    let perfect: f64 = constrained_teleport_contributions(d, n)?.iter().sum();
    let guess = entanglement_fidelity(&DensityMatrix::maximally_mixed(n))?.value();
    Ok(StrategyResult {
        strategy_name: "favored first qudit".into(),
        d,
        entanglement_fidelity_f: None,
        transmission_fidelity_f: None,
        success_probability: rational_f64(exact),
        exact: Some(exact.to_string()),
        witness: Some(0.5 * (perfect + guess)),
        notes: Vec::new(),
    })
}

/// `|tr(W_g† W_i)/2|²`: fidelity left by correcting Bell outcome `i` with `W_g`.
pub fn correction_fidelity(g: BellLabel, i: BellLabel) -> f64 {
    (&g.operator().adjoint() * &i.operator()).trace().norm_sqr() / (g.d * g.d) as f64
}

/// Two teleportations whose four outcome bits are sent by QRAC-SE; Bob decodes
/// the outcome of the qubit he is asked about and corrects with it.
pub fn composite_nsqrac_via_qracse(d: usize) -> Result<StrategyResult> {
    check_dim(d)?;
    if d != 2 {
        return Err(QracError::NotAvailable(format!("the composite protocol is defined for d = 2, got {d}")));
    }
    let table = builtin_table(2)?;
    let kernel = crate::qracse::ProtocolKernel::new(2)?;
    let labels: Vec<BellLabel> = (0..4).map(|i| BellLabel::from_index(2, i).unwrap()).collect();
    let mut f_ent = 0.0;
    for x in 0..2 {
        let mut total = 0.0;
        for s0 in 0..4 {
            for s1 in 0..4 {
                let strings = [[s0 / 2, s0 % 2], [s1 / 2, s1 % 2]];
                let (e0, e1) = encoding_indices(&table, strings[0], strings[1])?;
                let truth = labels[if x == 0 { s0 } else { s1 }];
                total += (0..4)
                    .map(|g| kernel.outcome_probability(x, g, e0, e1) * correction_fidelity(labels[g], truth))
                    .sum::<f64>();
            }
        }
        f_ent += 0.5 * total / 16.0;
    }
    let witness = composite_state_simulation()?;
    Ok(StrategyResult {
        strategy_name: "teleportation outcomes via QRAC-SE".into(),
        d,
        entanglement_fidelity_f: Some(f_ent),
        transmission_fidelity_f: Some(transmission(f_ent, d)),
        success_probability: f_ent,
        exact: None,
        witness: Some(witness),
        notes: vec!["the success probability is the entanglement fidelity F".into()],
    })
}

/// State-level version of [`composite_nsqrac_via_qracse`]: the teleported pair
/// is `(1 ⊗ W_a†)|ψ⁺⟩`, the QRAC-SE decoding probabilities come from explicit
/// encoded states and measurement bases, and Bob's correction acts on the state.
fn composite_state_simulation() -> Result<f64> {
    let d = 2;
    let table = builtin_table(d)?;
    let psi = bell_state(d)?;
    let bases = [measurement_basis(d, 0)?, measurement_basis(d, 1)?];
    let id = ComplexMatrix::identity(d);
    let mut f_ent = 0.0;
    for x in 0..2 {
        for s0 in 0..4 {
            for s1 in 0..4 {
                let strings = [[s0 / 2, s0 % 2], [s1 / 2, s1 % 2]];
                let encoded = encode(d, &table, strings[0], strings[1])?;
                let a = BellLabel::from_index(d, if x == 0 { s0 } else { s1 })?;
                let after = psi.evolve(&id.kron(&a.operator().adjoint()));
                for (g, b) in bases[x].iter().enumerate() {
                    let corrected = after.evolve(&id.kron(&BellLabel::from_index(d, g)?.operator()));
                    f_ent += 0.5 / 16.0 * b.overlap(&encoded) * psi.overlap(&corrected);
                }
            }
        }
    }
    Ok(f_ent)
}
