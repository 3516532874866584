//! Dense complex linear algebra and the quantum primitives everything else is
//! built from: kets, density matrices, tensor products, partial traces and the
//! two fidelity figures of merit.
//!
//! Random sampling uses `ChaCha8Rng` seeded with `seed_from_u64`; Monte Carlo
//! work is cut into fixed-size chunks and chunk `c` draws from ChaCha stream
//! `c`, so estimates are bit-identical no matter how many threads run them.

use std::fmt;
use std::ops::{Add, Index, Mul, Sub};

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use num_rational::Ratio;
use num_traits::Zero;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{check_dim, QracError, Result};

pub type C64 = Complex64;

/// Exact rational used by every closed-form quantity.
pub type Rational = Ratio<i128>;

/// Norm tolerance for [`Ket`].
pub const KET_NORM_TOL: f64 = 1e-12;
/// Hermiticity and trace tolerance for [`DensityMatrix`].
pub const DENSITY_TOL: f64 = 1e-12;
/// Smallest eigenvalue accepted as positive semidefinite.
pub const PSD_TOL: f64 = -1e-10;

/// Samples per Monte Carlo chunk; each chunk owns one ChaCha stream.
const MC_CHUNK: usize = 256;

#[inline]
pub fn c64(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

/// Dense complex matrix, row-major on construction.
#[derive(Clone, PartialEq)]
pub struct ComplexMatrix(DMatrix<C64>);

impl ComplexMatrix {
    /// Builds a matrix from row-major entries. Rejects NaN/Inf.
    pub fn new(rows: usize, cols: usize, entries: Vec<C64>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(QracError::Shape(format!("empty matrix {rows}x{cols}")));
        }
        if entries.len() != rows * cols {
            return Err(QracError::Shape(format!(
                "{} entries for a {rows}x{cols} matrix",
                entries.len()
            )));
        }
        if entries.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(QracError::InvalidArgument("non-finite matrix entry".into()));
        }
        Ok(Self(DMatrix::from_row_slice(rows, cols, &entries)))
    }

    pub fn from_fn(rows: usize, cols: usize, f: impl FnMut(usize, usize) -> C64) -> Self {
        Self(DMatrix::from_fn(rows, cols, f))
    }

    pub fn identity(n: usize) -> Self {
        Self(DMatrix::identity(n, n))
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self(DMatrix::zeros(rows, cols))
    }

    pub fn from_diagonal(diag: &[C64]) -> Self {
        Self(DMatrix::from_diagonal(&DVector::from_column_slice(diag)))
    }

    pub fn from_nalgebra(m: DMatrix<C64>) -> Self {
        Self(m)
    }

    pub fn as_nalgebra(&self) -> &DMatrix<C64> {
        &self.0
    }

    pub fn rows(&self) -> usize {
        self.0.nrows()
    }

    pub fn cols(&self) -> usize {
        self.0.ncols()
    }

    pub fn is_square(&self) -> bool {
        self.rows() == self.cols()
    }

    /// Row-major copy of the entries.
    pub fn to_row_major(&self) -> Vec<C64> {
        self.0.transpose().iter().copied().collect()
    }

    pub fn adjoint(&self) -> Self {
        Self(self.0.adjoint())
    }

    pub fn transpose(&self) -> Self {
        Self(self.0.transpose())
    }

    pub fn conj(&self) -> Self {
        Self(self.0.map(|z| z.conj()))
    }

    pub fn trace(&self) -> C64 {
        self.0.trace()
    }

    pub fn scale(&self, s: C64) -> Self {
        Self(&self.0 * s)
    }

    pub fn kron(&self, other: &Self) -> Self {
        kron(self, other)
    }

    /// Largest entrywise modulus of `self - other`.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        assert_eq!(self.0.shape(), other.0.shape(), "shape mismatch in max_abs_diff");
        self.0
            .iter()
            .zip(other.0.iter())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    pub fn approx_eq(&self, other: &Self, tol: f64) -> bool {
        self.0.shape() == other.0.shape() && self.max_abs_diff(other) <= tol
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.is_square() && self.max_abs_diff(&self.adjoint()) <= tol
    }

    pub fn is_unitary(&self, tol: f64) -> bool {
        self.is_square() && (&self.adjoint() * self).approx_eq(&Self::identity(self.rows()), tol)
    }

    /// Ascending eigenvalues of the Hermitian part of the matrix.
    pub fn hermitian_eigenvalues(&self) -> Vec<f64> {
        let h = (&self.0 + self.0.adjoint()) * c64(0.5, 0.0);
        let mut ev: Vec<f64> = h.symmetric_eigenvalues().iter().copied().collect();
        ev.sort_by(f64::total_cmp);
        ev
    }

    pub fn apply(&self, ket: &Ket) -> DVector<C64> {
        &self.0 * &ket.0
    }

    /// Integer matrix power `self^n`.
    pub fn pow(&self, n: u32) -> Self {
        let mut out = Self::identity(self.rows());
        for _ in 0..n {
            out = &out * self;
        }
        out
    }
}

impl Index<(usize, usize)> for ComplexMatrix {
    type Output = C64;

    fn index(&self, idx: (usize, usize)) -> &C64 {
        &self.0[idx]
    }
}

impl Mul for &ComplexMatrix {
    type Output = ComplexMatrix;

    fn mul(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!(self.cols(), rhs.rows(), "matrix product shape mismatch");
        ComplexMatrix(&self.0 * &rhs.0)
    }
}

impl Add for &ComplexMatrix {
    type Output = ComplexMatrix;

    fn add(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        ComplexMatrix(&self.0 + &rhs.0)
    }
}

impl Sub for &ComplexMatrix {
    type Output = ComplexMatrix;

    fn sub(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        ComplexMatrix(&self.0 - &rhs.0)
    }
}

impl fmt::Debug for ComplexMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "ComplexMatrix {}x{} [", self.rows(), self.cols())?;
        for i in 0..self.rows() {
            write!(f, "  ")?;
            for j in 0..self.cols() {
                let z = self.0[(i, j)];
                write!(f, "{:+.6}{:+.6}i  ", z.re, z.im)?;
            }
            writeln!(f)?;
        }
        write!(f, "]")
    }
}

/// Unit-norm pure state vector.
#[derive(Clone, Debug, PartialEq)]
pub struct Ket(DVector<C64>);

impl Ket {
    /// Wraps amplitudes that must already have unit norm.
    pub fn new(amplitudes: Vec<C64>) -> Result<Self> {
        let v = DVector::from_vec(amplitudes);
        if v.is_empty() {
            return Err(QracError::InvalidState("empty ket".into()));
        }
        let norm = v.norm();
        if !norm.is_finite() || (norm - 1.0).abs() > KET_NORM_TOL {
            return Err(QracError::InvalidState(format!("ket norm {norm} is not 1")));
        }
        Ok(Self(v))
    }

    /// Normalizes arbitrary nonzero amplitudes.
    pub fn normalized(amplitudes: Vec<C64>) -> Result<Self> {
        let v = DVector::from_vec(amplitudes);
        let norm = v.norm();
        if norm == 0.0 || !norm.is_finite() {
            return Err(QracError::InvalidState("cannot normalize a zero vector".into()));
        }
        Ok(Self(v / c64(norm, 0.0)))
    }

    /// Computational basis vector `|index⟩`.
    pub fn basis(dim: usize, index: usize) -> Self {
        assert!(index < dim, "basis index {index} out of range for dim {dim}");
        let mut v = DVector::zeros(dim);
        v[index] = C64::new(1.0, 0.0);
        Self(v)
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn amplitudes(&self) -> &[C64] {
        self.0.as_slice()
    }

    pub fn as_nalgebra(&self) -> &DVector<C64> {
        &self.0
    }

    /// `⟨self|other⟩`.
    pub fn inner(&self, other: &Ket) -> C64 {
        assert_eq!(self.dim(), other.dim(), "inner product dimension mismatch");
        self.0.dotc(&other.0)
    }

    /// `|⟨self|other⟩|²`.
    pub fn overlap(&self, other: &Ket) -> f64 {
        self.inner(other).norm_sqr()
    }

    /// Equality up to a global phase.
    pub fn same_state(&self, other: &Ket, tol: f64) -> bool {
        self.dim() == other.dim() && (self.inner(other).norm() - 1.0).abs() <= tol
    }

    pub fn projector(&self) -> ComplexMatrix {
        ComplexMatrix(&self.0 * self.0.adjoint())
    }

    pub fn kron(&self, other: &Ket) -> Ket {
        Ket(self.0.kronecker(&other.0))
    }

    /// Applies a unitary. The result is renormalized to absorb rounding.
    pub fn evolve(&self, unitary: &ComplexMatrix) -> Ket {
        let v = unitary.apply(self);
        let n = v.norm();
        debug_assert!((n - 1.0).abs() < 1e-9, "evolve with a non-unitary operator");
        Ket(v / c64(n, 0.0))
    }
}

/// Validated mixed state.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityMatrix {
    matrix: ComplexMatrix,
}

impl DensityMatrix {
    pub fn new(matrix: ComplexMatrix) -> Result<Self> {
        if !matrix.is_square() {
            return Err(QracError::Shape(format!(
                "density matrix must be square, got {}x{}",
                matrix.rows(),
                matrix.cols()
            )));
        }
        if !matrix.is_hermitian(DENSITY_TOL) {
            return Err(QracError::InvalidState("density matrix is not Hermitian".into()));
        }
        let tr = matrix.trace();
        if (tr.re - 1.0).abs() > DENSITY_TOL || tr.im.abs() > DENSITY_TOL {
            return Err(QracError::InvalidState(format!("trace {tr} is not 1")));
        }
        let min_ev = matrix.hermitian_eigenvalues()[0];
        if min_ev < PSD_TOL {
            return Err(QracError::InvalidState(format!("negative eigenvalue {min_ev}")));
        }
        Ok(Self { matrix })
    }

    pub fn from_ket(ket: &Ket) -> Self {
        Self { matrix: ket.projector() }
    }

    pub fn maximally_mixed(dim: usize) -> Self {
        Self { matrix: ComplexMatrix::identity(dim).scale(c64(1.0 / dim as f64, 0.0)) }
    }

    pub fn dim(&self) -> usize {
        self.matrix.rows()
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> ComplexMatrix {
        self.matrix
    }

    /// `⟨ψ|ρ|ψ⟩`.
    pub fn expectation(&self, ket: &Ket) -> f64 {
        ket.0.dotc(&self.matrix.apply(ket)).re
    }

    pub fn kron(&self, other: &DensityMatrix) -> DensityMatrix {
        DensityMatrix { matrix: kron(&self.matrix, &other.matrix) }
    }

    /// `U ρ U†`.
    pub fn conjugate_by(&self, unitary: &ComplexMatrix) -> DensityMatrix {
        DensityMatrix { matrix: &(unitary * &self.matrix) * &unitary.adjoint() }
    }
}

/// A fidelity value in `[0, 1]`.
#[derive(Clone, Copy, Debug, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Fidelity(f64);

impl Fidelity {
    pub fn new(value: f64) -> Result<Self> {
        if !value.is_finite() || !(-1e-12..=1.0 + 1e-12).contains(&value) {
            return Err(QracError::OutOfRange(format!("fidelity {value} outside [0, 1]")));
        }
        Ok(Self(value.clamp(0.0, 1.0)))
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

/// Maximally entangled state `(1/√d) Σᵢ |ii⟩`.
pub fn bell_state(d: usize) -> Result<Ket> {
    check_dim(d)?;
    let mut v = DVector::zeros(d * d);
    let amp = c64(1.0 / (d as f64).sqrt(), 0.0);
    for i in 0..d {
        v[i * d + i] = amp;
    }
    Ok(Ket(v))
}

pub fn kron(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    ComplexMatrix(a.0.kronecker(&b.0))
}

/// Partial trace of an arbitrary square matrix (not necessarily a state).
///
/// `dims` lists the subsystem dimensions in tensor order; `keep` the subsystem
/// indices that survive, returned in ascending order.
pub fn partial_trace_matrix(m: &ComplexMatrix, dims: &[usize], keep: &[usize]) -> Result<ComplexMatrix> {
    if !m.is_square() {
        return Err(QracError::Shape("partial trace of a non-square matrix".into()));
    }
    if dims.is_empty() || dims.contains(&0) {
        return Err(QracError::Shape(format!("invalid subsystem dims {dims:?}")));
    }
    let total: usize = dims.iter().product();
    if total != m.rows() {
        return Err(QracError::Shape(format!(
            "subsystem dims {dims:?} multiply to {total}, matrix is {}",
            m.rows()
        )));
    }
    let mut keep_sorted = keep.to_vec();
    keep_sorted.sort_unstable();
    keep_sorted.dedup();
    if keep_sorted.len() != keep.len() || keep_sorted.iter().any(|&k| k >= dims.len()) {
        return Err(QracError::Shape(format!("invalid keep set {keep:?} for {} subsystems", dims.len())));
    }

    let mut strides = vec![1usize; dims.len()];
    for i in (0..dims.len().saturating_sub(1)).rev() {
        strides[i] = strides[i + 1] * dims[i + 1];
    }
    let traced: Vec<usize> = (0..dims.len()).filter(|i| !keep_sorted.contains(i)).collect();
    let offsets = |subsystems: &[usize]| -> Vec<usize> {
        let mut out = vec![0usize];
        for &s in subsystems {
            out = out
                .iter()
                .flat_map(|&base| {
                    let stride = strides[s];
                    (0..dims[s]).map(move |digit| base + digit * stride)
                })
                .collect();
        }
        out
    };
    let keep_off = offsets(&keep_sorted);
    let trace_off = offsets(&traced);

    let n = keep_off.len();
    let out = DMatrix::from_fn(n, n, |i, j| {
        trace_off
            .iter()
            .map(|&t| m.0[(keep_off[i] + t, keep_off[j] + t)])
            .fold(C64::zero(), |acc, z| acc + z)
    });
    Ok(ComplexMatrix(out))
}

pub fn partial_trace(rho: &DensityMatrix, dims: &[usize], keep: &[usize]) -> Result<DensityMatrix> {
    let m = partial_trace_matrix(&rho.matrix, dims, keep)?;
    Ok(DensityMatrix { matrix: m })
}

/// Returns `d` when `n = d²` with `d ≥ 2`.
pub fn square_root_dim(n: usize) -> Result<usize> {
    let d = (n as f64).sqrt().round() as usize;
    if d < 2 || d * d != n {
        return Err(QracError::Shape(format!("dimension {n} is not d² with d ≥ 2")));
    }
    Ok(d)
}

/// Singlet fraction `⟨ψ⁺|ρ|ψ⁺⟩` of a state on `d × d`.
pub fn entanglement_fidelity(rho: &DensityMatrix) -> Result<Fidelity> {
    let d = square_root_dim(rho.dim())?;
    Fidelity::new(singlet_overlap(rho.matrix(), d))
}

/// `⟨ψ⁺|M|ψ⁺⟩` for any (possibly unnormalized) operator on `d × d`.
pub(crate) fn singlet_overlap(m: &ComplexMatrix, d: usize) -> f64 {
    let mut acc = C64::zero();
    for i in 0..d {
        for j in 0..d {
            acc += m[(i * d + i, j * d + j)];
        }
    }
    acc.re / d as f64
}

fn check_rational_fidelity(x: Rational) -> Result<()> {
    if x < Rational::zero() || x > Rational::from_integer(1) {
        return Err(QracError::OutOfRange(format!("fidelity {x} outside [0, 1]")));
    }
    Ok(())
}

/// Transmission fidelity `f = (F·d + 1)/(d + 1)`, exactly.
pub fn transmission_from_entanglement(f_ent: Rational, d: usize) -> Result<Rational> {
    check_dim(d)?;
    check_rational_fidelity(f_ent)?;
    let d = d as i128;
    Ok((f_ent * d + 1) / (d + 1))
}

/// Inverse of [`transmission_from_entanglement`]: `F = (f·(d + 1) − 1)/d`.
pub fn entanglement_from_transmission(f_trans: Rational, d: usize) -> Result<Rational> {
    check_dim(d)?;
    check_rational_fidelity(f_trans)?;
    let d = d as i128;
    let out = (f_trans * (d + 1) - 1) / d;
    // f < 1/(d+1) has no preimage in [0, 1]
    check_rational_fidelity(out)?;
    Ok(out)
}

pub fn transmission_from_entanglement_f64(f_ent: Fidelity, d: usize) -> Result<Fidelity> {
    check_dim(d)?;
    let d = d as f64;
    Fidelity::new((f_ent.value() * d + 1.0) / (d + 1.0))
}

pub fn entanglement_from_transmission_f64(f_trans: Fidelity, d: usize) -> Result<Fidelity> {
    check_dim(d)?;
    let d = d as f64;
    Fidelity::new((f_trans.value() * (d + 1.0) - 1.0) / d)
}

/// Monte Carlo estimate with its standard error.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct McEstimate {
    pub mean: f64,
    pub std_err: f64,
    pub samples: usize,
}

/// Haar-averaged `⟨φ|Λ(|φ⟩⟨φ|)|φ⟩` over `samples` random pure states.
pub fn transmission_fidelity_mc<F>(channel: F, d: usize, samples: usize, seed: u64) -> Result<McEstimate>
where
    F: Fn(&Ket) -> DensityMatrix + Sync,
{
    check_dim(d)?;
    if samples == 0 {
        return Err(QracError::InvalidArgument("samples must be at least 1".into()));
    }
    let chunks = samples.div_ceil(MC_CHUNK);
    let values: Vec<f64> = (0..chunks)
        .into_par_iter()
        .flat_map_iter(|c| {
            let mut rng = chunk_rng(seed, c as u64);
            let n = MC_CHUNK.min(samples - c * MC_CHUNK);
            let channel = &channel;
            (0..n)
                .map(move |_| {
                    let phi = random_ket(d, &mut rng);
                    channel(&phi).expectation(&phi)
                })
                .collect::<Vec<_>>()
        })
        .collect();
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let std_err = if values.len() > 1 {
        let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
        (var / n).sqrt()
    } else {
        0.0
    };
    Ok(McEstimate { mean, std_err, samples })
}

/// Deterministic RNG for chunk `stream` of a seeded computation.
pub fn chunk_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

fn gaussian_c64<R: Rng + ?Sized>(rng: &mut R) -> C64 {
    c64(rng.sample(StandardNormal), rng.sample(StandardNormal))
}

/// Haar-random pure state: normalized i.i.d. complex Gaussian vector.
pub fn random_ket<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> Ket {
    loop {
        let v: Vec<C64> = (0..dim).map(|_| gaussian_c64(rng)).collect();
        if let Ok(k) = Ket::normalized(v) {
            return k;
        }
    }
}

/// Random full-rank state `G G† / tr(G G†)` with Ginibre `G`.
pub fn random_density_matrix<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> DensityMatrix {
    let g = ComplexMatrix::from_fn(dim, dim, |_, _| gaussian_c64(rng));
    let m = &g * &g.adjoint();
    let tr = m.trace().re;
    let mut m = m.scale(c64(1.0 / tr, 0.0));
    // symmetrize away rounding so the Hermitian check is exact
    m = (&m + &m.adjoint()).scale(c64(0.5, 0.0));
    DensityMatrix { matrix: m }
}

/// Haar-random unitary via QR of a Ginibre matrix with phase fix.
pub fn random_unitary<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> ComplexMatrix {
    let g = DMatrix::from_fn(dim, dim, |_, _| gaussian_c64(rng));
    let qr = g.qr();
    let q = qr.q();
    let r = qr.r();
    let phases = DMatrix::from_diagonal(&DVector::from_fn(dim, |i, _| {
        let z = r[(i, i)];
        if z.norm() == 0.0 {
            C64::new(1.0, 0.0)
        } else {
            z / z.norm()
        }
    }));
    ComplexMatrix(q * phases)
}
