//! QRAC-SE: Alice encodes two `d`-ary digit pairs into one maximally entangled
//! pair via fractional Weyl powers, Bob recovers either string with a
//! measurement in a rotated Bell basis.

use std::collections::BTreeMap;
use std::io::Write;

use num_traits::{One, ToPrimitive, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::codes::{builtin_table, generate_single_distance, EncodingTable};
use crate::error::{check_dim, QracError, Result};
use crate::pauli::{act_on_first, bell_basis, weyl_exact, BellLabel, Branch, WeylExponent};
use crate::qcore::{ComplexMatrix, Ket, Rational, C64};

/// Largest dimension the exhaustive engine accepts.
pub const MAX_D: usize = 8;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct TruthTable([u8; 8]);

impl TruthTable {
    /// Entries indexed by `4·x0 + 2·x1 + x2`; each must be 0 or 1.
    pub fn new(entries: &[u8]) -> Result<Self> {
        if entries.len() != 8 {
            return Err(QracError::InvalidArgument(format!("truth table needs 8 entries, got {}", entries.len())));
        }
        if entries.iter().any(|&v| v > 1) {
            return Err(QracError::InvalidArgument("truth table entries must be 0 or 1".into()));
        }
        let mut t = [0u8; 8];
        t.copy_from_slice(entries);
        Ok(Self(t))
    }

    pub fn from_fn(f: impl Fn(u8, u8, u8) -> bool) -> Self {
        let mut t = [0u8; 8];
        for (i, v) in t.iter_mut().enumerate() {
            *v = f((i >> 2) as u8 & 1, (i >> 1) as u8 & 1, i as u8 & 1) as u8;
        }
        Self(t)
    }

    pub fn majority() -> Self {
        Self::from_fn(|a, b, c| a + b + c >= 2)
    }

    pub fn parity() -> Self {
        Self::from_fn(|a, b, c| (a ^ b ^ c) == 1)
    }

    pub fn constant(v: bool) -> Self {
        Self::from_fn(|_, _, _| v)
    }

    pub fn entries(&self) -> [u8; 8] {
        self.0
    }

    pub fn eval(&self, x0: u8, x1: u8, x2: u8) -> u8 {
        self.0[(4 * x0 + 2 * x1 + x2) as usize]
    }

    /// The four induced bits: bit `j` is `f` of the other three input bits in index order.
    pub fn induced_bits(&self, bits: [u8; 4]) -> [u8; 4] {
        let mut out = [0u8; 4];
        for (j, slot) in out.iter_mut().enumerate() {
            let rest: Vec<u8> = (0..4).filter(|&i| i != j).map(|i| bits[i]).collect();
            *slot = self.eval(rest[0], rest[1], rest[2]);
        }
        out
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Variant {
    TwoStrings,
    FourDitsPairs,
    FourDitsSingle,
    BooleanF(TruthTable),
}

impl Variant {
    pub fn label(&self, d: usize) -> String {
        match self {
            Variant::TwoStrings => format!("2_{} -> (1_{d}, 1_{d})", d * d),
            Variant::FourDitsPairs => "4_2 -> 2_2".into(),
            Variant::FourDitsSingle => "4_2 -> 1_2".into(),
            Variant::BooleanF(_) => "f: 4_2 -> 1_2".into(),
        }
    }
}

/// How a four-bit decoder is credited for one requested bit.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Credit {
    /// The bit counts only when the whole two-digit outcome of the pair measurement is right.
    #[default]
    PairOutcome,
    /// The bit counts whenever its own digit of the outcome is right.
    Marginal,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QracTask {
    pub d: usize,
    pub table: EncodingTable,
    pub variant: Variant,
    #[serde(default)]
    pub branch: Branch,
}

impl QracTask {
    pub fn new(d: usize, table: EncodingTable, variant: Variant) -> Result<Self> {
        check_dim(d)?;
        if table.d() != d {
            return Err(QracError::Shape(format!("table is for d = {}, task has d = {d}", table.d())));
        }
        if !matches!(variant, Variant::TwoStrings) && d != 2 {
            return Err(QracError::InvalidArgument(format!("{} needs d = 2", variant.label(d))));
        }
        Ok(Self { d, table, variant, branch: Branch::Canonical })
    }

    /// Task with the published table for `d ≤ 4`, the generated run table above.
    pub fn standard(d: usize, variant: Variant) -> Result<Self> {
        let table = builtin_table(d).or_else(|_| generate_single_distance(d))?;
        Self::new(d, table, variant)
    }

    pub fn with_branch(mut self, branch: Branch) -> Self {
        self.branch = branch;
        self
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExactSummary {
    pub p_avg: String,
    pub p_min: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProtocolReport {
    pub label: String,
    pub d: usize,
    pub variant: Variant,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub credit: Option<Credit>,
    /// choice → string value → success probability averaged over the other inputs.
    pub per_string: BTreeMap<String, BTreeMap<String, f64>>,
    pub per_choice: BTreeMap<String, f64>,
    pub p_avg: f64,
    pub p_min: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub exact: Option<ExactSummary>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
}

impl ProtocolReport {
    fn from_per_string(label: String, d: usize, variant: Variant, per_string: BTreeMap<String, BTreeMap<String, f64>>) -> Self {
        let per_choice: BTreeMap<String, f64> = per_string
            .iter()
            .map(|(c, m)| (c.clone(), m.values().sum::<f64>() / m.len() as f64))
            .collect();
        let p_avg = per_choice.values().sum::<f64>() / per_choice.len() as f64;
        let p_min = per_string.values().flat_map(|m| m.values().copied()).fold(f64::INFINITY, f64::min);
        Self { label, d, variant, credit: None, per_string, per_choice, p_avg, p_min, exact: None, notes: Vec::new() }
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    /// One row per (choice, string): `choice,string,probability`.
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut wr = csv::Writer::from_writer(w);
        wr.write_record(["choice", "string", "probability"])?;
        for (c, m) in &self.per_string {
            for (s, p) in m {
                wr.write_record([c.as_str(), s.as_str(), &p.to_string()])?;
            }
        }
        wr.flush()?;
        Ok(())
    }

    pub fn to_csv_string(&self) -> Result<String> {
        let mut buf = Vec::new();
        self.write_csv(&mut buf)?;
        Ok(String::from_utf8(buf).expect("csv output is utf-8"))
    }
}

fn string_key(digits: &[usize]) -> String {
    digits.iter().map(|v| v.to_string()).collect()
}

fn choice_key(c: usize) -> String {
    format!("c={c}")
}

fn rational_f64(r: Rational) -> f64 {
    r.numer().to_f64().unwrap() / r.denom().to_f64().unwrap()
}

fn check_pair(d: usize, p: [usize; 2]) -> Result<()> {
    if p[0] >= d || p[1] >= d {
        return Err(QracError::OutOfRange(format!("digit pair {p:?} for d = {d}")));
    }
    Ok(())
}

/// `(e₀, e₁)`: table positions of the first-digit pair and the second-digit pair.
pub fn encoding_indices(table: &EncodingTable, a0: [usize; 2], a1: [usize; 2]) -> Result<(usize, usize)> {
    let d = table.d();
    check_pair(d, a0)?;
    check_pair(d, a1)?;
    let e0 = table
        .index_of([a0[0], a1[0]])
        .ok_or_else(|| QracError::Encoding(format!("pair {:?} missing from table", [a0[0], a1[0]])))?;
    let e1 = table
        .index_of([a0[1], a1[1]])
        .ok_or_else(|| QracError::Encoding(format!("pair {:?} missing from table", [a0[1], a1[1]])))?;
    Ok((e0, e1))
}

fn encoding_operator(d: usize, e0: usize, e1: usize, branch: Branch) -> Result<ComplexMatrix> {
    weyl_exact(WeylExponent::steps(d, e0 as i128)?, WeylExponent::steps(d, e1 as i128)?, branch)
}

/// `((ᵈ√X)^{e₀} (ᵈ√Z)^{e₁} ⊗ 1)|ψ⁺⟩`.
pub fn encode(d: usize, table: &EncodingTable, a0: [usize; 2], a1: [usize; 2]) -> Result<Ket> {
    check_dim(d)?;
    if table.d() != d {
        return Err(QracError::Shape(format!("table is for d = {}", table.d())));
    }
    let report = table.validate();
    if !report.is_valid() {
        return Err(QracError::Encoding(format!("invalid table: {report}")));
    }
    let (e0, e1) = encoding_indices(table, a0, a1)?;
    act_on_first(&encoding_operator(d, e0, e1, Branch::Canonical)?, d)
}

fn check_choice(c: usize) -> Result<()> {
    if c > 1 {
        return Err(QracError::OutOfRange(format!("choice bit must be 0 or 1, got {c}")));
    }
    Ok(())
}

/// Exponents `(−1)ᶜ b + (1−c)/2 − 1/(2d)` for outcome `(b₀, b₁)`.
pub fn measurement_exponents(d: usize, c: usize, b0: usize, b1: usize) -> Result<(WeylExponent, WeylExponent)> {
    check_dim(d)?;
    check_choice(c)?;
    let sign = if c == 0 { 1 } else { -1 };
    let off = Rational::new(1 - c as i128, 2) - Rational::new(1, 2 * d as i128);
    let x = WeylExponent::new(d, Rational::from_integer(sign * b0 as i128) + off)?;
    let z = WeylExponent::new(d, Rational::from_integer(sign * b1 as i128) + off)?;
    Ok((x, z))
}

fn basis_operator(d: usize, c: usize, b: usize, branch: Branch) -> Result<ComplexMatrix> {
    let (x, z) = measurement_exponents(d, c, b / d, b % d)?;
    weyl_exact(x, z, branch)
}

/// Bob's basis for choice `c`, outcomes in `b₀·d + b₁` order.
pub fn measurement_basis(d: usize, c: usize) -> Result<Vec<Ket>> {
    check_dim(d)?;
    check_choice(c)?;
    (0..d * d).map(|b| act_on_first(&basis_operator(d, c, b, Branch::Canonical)?, d)).collect()
}

/// The qubit form `(−1)ᶜ b + (1−2c)/4` of Bob's exponents.
pub fn measurement_basis_qubit_formula(c: usize) -> Result<Vec<Ket>> {
    check_choice(c)?;
    let sign = if c == 0 { 1 } else { -1 };
    let off = Rational::new(1 - 2 * c as i128, 4);
    (0..4)
        .map(|b| {
            let x = WeylExponent::new(2, Rational::from_integer(sign * (b / 2) as i128) + off)?;
            let z = WeylExponent::new(2, Rational::from_integer(sign * (b % 2) as i128) + off)?;
            act_on_first(&weyl_exact(x, z, Branch::Canonical)?, 2)
        })
        .collect()
}

/// `|tr(A† B)|² / d²`, the overlap of `(A ⊗ 1)|ψ⁺⟩` and `(B ⊗ 1)|ψ⁺⟩`.
fn operator_overlap(a: &ComplexMatrix, b: &ComplexMatrix, d: usize) -> f64 {
    let mut acc = C64::zero();
    for i in 0..d {
        for j in 0..d {
            acc += a[(i, j)].conj() * b[(i, j)];
        }
    }
    acc.norm_sqr() / (d * d) as f64
}

/// Outcome probabilities `|⟨basis_c(b)|ψ_{e₀e₁}⟩|²` for every choice, outcome
/// and encoding index pair, so that scoring a table is pure lookups.
#[derive(Clone, Debug)]
pub struct ProtocolKernel {
    d: usize,
    probs: Vec<f64>,
}

impl ProtocolKernel {
    pub fn new(d: usize) -> Result<Self> {
        Self::with_branch(d, Branch::Canonical)
    }

    pub fn with_branch(d: usize, branch: Branch) -> Result<Self> {
        check_dim(d)?;
        if d > MAX_D {
            return Err(QracError::OutOfRange(format!("d = {d} exceeds {MAX_D}")));
        }
        let n = d * d;
        let encoded: Vec<ComplexMatrix> = (0..n * n)
            .map(|e| encoding_operator(d, e / n, e % n, branch))
            .collect::<Result<_>>()?;
        let bases: Vec<ComplexMatrix> = (0..2 * n)
            .map(|cb| basis_operator(d, cb / n, cb % n, branch))
            .collect::<Result<_>>()?;
        let probs = bases
            .par_iter()
            .flat_map_iter(|m| encoded.iter().map(move |e| operator_overlap(m, e, d)))
            .collect();
        Ok(Self { d, probs })
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn outcome_probability(&self, c: usize, b: usize, e0: usize, e1: usize) -> f64 {
        let n = self.d * self.d;
        self.probs[((c * n + b) * n + e0) * n + e1]
    }

    pub fn outcome_distribution(&self, c: usize, e0: usize, e1: usize) -> Vec<f64> {
        (0..self.d * self.d).map(|b| self.outcome_probability(c, b, e0, e1)).collect()
    }

    /// Success probability per choice and string, `[c][a·d + b]`.
    pub fn per_string(&self, table: &EncodingTable) -> Result<[Vec<f64>; 2]> {
        let d = self.d;
        if table.d() != d {
            return Err(QracError::Shape(format!("table is for d = {}, kernel for d = {d}", table.d())));
        }
        let inv = table.inverse()?;
        let n = d * d;
        let per = |c: usize| -> Vec<f64> {
            (0..n)
                .into_par_iter()
                .map(|s| {
                    let (s0, s1) = (s / d, s % d);
                    let total: f64 = (0..n)
                        .map(|t| {
                            let (t0, t1) = (t / d, t % d);
                            let (e0, e1) = if c == 0 {
                                (inv[s0 * d + t0], inv[s1 * d + t1])
                            } else {
                                (inv[t0 * d + s0], inv[t1 * d + s1])
                            };
                            self.outcome_probability(c, s, e0, e1)
                        })
                        .sum();
                    total / n as f64
                })
                .collect()
        };
        Ok([per(0), per(1)])
    }

    pub fn score(&self, table: &EncodingTable) -> Result<TableScore> {
        let per = self.per_string(table)?;
        let per_choice = [mean(&per[0]), mean(&per[1])];
        let p_min = per.iter().flatten().copied().fold(f64::INFINITY, f64::min);
        Ok(TableScore { per_choice, p_avg: 0.5 * (per_choice[0] + per_choice[1]), p_min })
    }
}

fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TableScore {
    pub per_choice: [f64; 2],
    pub p_avg: f64,
    pub p_min: f64,
}

pub fn run_protocol(task: &QracTask) -> Result<ProtocolReport> {
    let d = task.d;
    check_dim(d)?;
    match task.variant {
        Variant::TwoStrings => {
            let report = task.table.validate();
            if !report.is_valid() {
                return Err(QracError::Encoding(format!("invalid table: {report}")));
            }
            let kernel = ProtocolKernel::with_branch(d, task.branch)?;
            let per = kernel.per_string(&task.table)?;
            let per_string = (0..2)
                .map(|c| {
                    let m = per[c].iter().enumerate().map(|(s, &p)| (string_key(&[s / d, s % d]), p)).collect();
                    (choice_key(c), m)
                })
                .collect();
            Ok(ProtocolReport::from_per_string(task.variant.label(d), d, task.variant, per_string))
        }
        Variant::FourDitsPairs | Variant::FourDitsSingle => {
            four_bit_report(&task.table, task.variant, Credit::PairOutcome, task.branch)
        }
        Variant::BooleanF(tt) => f_qracse_report(&task.table, tt, Credit::PairOutcome, task.branch),
    }
}

/// The trivial baseline (send one string perfectly, guess the rest), exact.
pub fn trivial_strategy(d: usize, variant: Variant) -> Result<ProtocolReport> {
    check_dim(d)?;
    let one = Rational::one();
    let half = Rational::new(1, 2);
    let mut exact: BTreeMap<String, BTreeMap<String, Rational>> = BTreeMap::new();
    match variant {
        Variant::TwoStrings => {
            let guess = Rational::new(1, (d * d) as i128);
            for c in 0..2 {
                let p = if c == 0 { one } else { guess };
                exact.insert(choice_key(c), (0..d * d).map(|s| (string_key(&[s / d, s % d]), p)).collect());
            }
        }
        _ if d != 2 => return Err(QracError::InvalidArgument(format!("{} needs d = 2", variant.label(d)))),
        Variant::FourDitsPairs => {
            for (i, j) in BIT_PAIRS {
                let p = [i, j].iter().map(|&k| if k < 2 { one } else { half }).product::<Rational>();
                exact.insert(pair_key(i, j), (0..4).map(|s| (string_key(&[s / 2, s % 2]), p)).collect());
            }
        }
        Variant::FourDitsSingle | Variant::BooleanF(_) => {
            let prefix = if matches!(variant, Variant::BooleanF(_)) { "g" } else { "a" };
            for j in 0..4 {
                let p = if j < 2 { one } else { half };
                exact.insert(format!("{prefix}{j}"), (0..2).map(|v| (v.to_string(), p)).collect());
            }
        }
    }
    let choices = exact.len() as i128;
    let mut total = Rational::zero();
    let mut min: Option<Rational> = None;
    for m in exact.values() {
        let sum: Rational = m.values().copied().sum();
        total += sum / Rational::from_integer(m.len() as i128);
        for &p in m.values() {
            min = Some(min.map_or(p, |x: Rational| x.min(p)));
        }
    }
    let p_avg = total / Rational::from_integer(choices);
    let p_min = min.expect("non-empty");
    let per_string = exact
        .into_iter()
        .map(|(c, m)| (c, m.into_iter().map(|(s, p)| (s, rational_f64(p))).collect()))
        .collect();
    let mut report = ProtocolReport::from_per_string(format!("trivial {}", variant.label(d)), d, variant, per_string);
    report.p_avg = rational_f64(p_avg);
    report.p_min = rational_f64(p_min);
    report.exact = Some(ExactSummary { p_avg: p_avg.to_string(), p_min: p_min.to_string() });
    Ok(report)
}

/// Simulated trivial strategy: `a⁽⁰⁾` is dense-coded as `X^{a₀}Z^{a₁}` on the
/// shared pair and Bob measures the Bell basis whatever `c` is.
pub fn dense_coding_baseline(d: usize) -> Result<ProtocolReport> {
    check_dim(d)?;
    if d > MAX_D {
        return Err(QracError::OutOfRange(format!("d = {d} exceeds {MAX_D}")));
    }
    let n = d * d;
    let bell = bell_basis(d)?;
    let mut per_string = BTreeMap::new();
    for c in 0..2 {
        let m = (0..n)
            .map(|s| {
                let total: f64 = (0..n)
                    .map(|t| {
                        let a0 = if c == 0 { s } else { t };
                        let state = crate::pauli::bell_basis_element(BellLabel::from_index(d, a0).unwrap());
                        bell[s].overlap(&state)
                    })
                    .sum();
                (string_key(&[s / d, s % d]), total / n as f64)
            })
            .collect();
        per_string.insert(choice_key(c), m);
    }
    Ok(ProtocolReport::from_per_string(format!("dense coding {}", Variant::TwoStrings.label(d)), d, Variant::TwoStrings, per_string))
}

/// Bit pairs in report order.
pub const BIT_PAIRS: [(usize, usize); 6] = [(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)];

fn pair_key(i: usize, j: usize) -> String {
    format!("a{i}a{j}")
}

/// Qubit measurement family `X^{sx·bx + ox} Z^{sz·bz + oz}` reading bit
/// `x_bit` from the X digit and `z_bit` from the Z digit.
#[derive(Clone, Copy, Debug)]
struct Family {
    x_bit: usize,
    z_bit: usize,
    x: (i128, Rational),
    z: (i128, Rational),
}

fn quarter(n: i128) -> Rational {
    Rational::new(n, 4)
}

fn family_for_pair(i: usize, j: usize) -> Option<Family> {
    match (i, j) {
        (0, 1) => Some(Family { x_bit: 0, z_bit: 1, x: (1, quarter(1)), z: (1, quarter(1)) }),
        (2, 3) => Some(Family { x_bit: 2, z_bit: 3, x: (-1, quarter(-1)), z: (-1, quarter(-1)) }),
        (0, 3) => Some(Family { x_bit: 0, z_bit: 3, x: (1, quarter(1)), z: (1, quarter(-1)) }),
        (1, 2) => Some(Family { x_bit: 2, z_bit: 1, x: (1, quarter(-1)), z: (1, quarter(1)) }),
        _ => None,
    }
}

/// `probs[input][outcome]` for one family, inputs as 4-bit integers `a0 a1 a2 a3`
/// (a0 most significant), outcomes as `bx·2 + bz`.
fn family_probabilities(table: &EncodingTable, fam: Family, branch: Branch) -> Result<Vec<[f64; 4]>> {
    let basis: Vec<ComplexMatrix> = (0..4)
        .map(|o| {
            let (bx, bz) = ((o / 2) as i128, (o % 2) as i128);
            let x = WeylExponent::new(2, Rational::from_integer(fam.x.0 * bx) + fam.x.1)?;
            let z = WeylExponent::new(2, Rational::from_integer(fam.z.0 * bz) + fam.z.1)?;
            weyl_exact(x, z, branch)
        })
        .collect::<Result<_>>()?;
    (0..16)
        .map(|input| {
            let a = bits_of(input);
            let (e0, e1) = encoding_indices(table, [a[0], a[1]], [a[2], a[3]])?;
            let enc = encoding_operator(2, e0, e1, branch)?;
            let mut out = [0.0; 4];
            for (o, m) in basis.iter().enumerate() {
                out[o] = operator_overlap(m, &enc, 2);
            }
            Ok(out)
        })
        .collect()
}

fn bits_of(input: usize) -> [usize; 4] {
    [(input >> 3) & 1, (input >> 2) & 1, (input >> 1) & 1, input & 1]
}

fn check_four_bit_table(table: &EncodingTable) -> Result<()> {
    if table.d() != 2 {
        return Err(QracError::InvalidArgument("four-bit variants need d = 2".into()));
    }
    let report = table.validate();
    if !report.is_valid() {
        return Err(QracError::Encoding(format!("invalid table: {report}")));
    }
    Ok(())
}

/// Probability of decoding bit `j` of `bits` correctly with its single-bit family.
fn single_bit_success(probs: &[Vec<[f64; 4]>; 2], j: usize, input: usize, credit: Credit) -> f64 {
    let fam = if j < 2 { family_for_pair(0, 1) } else { family_for_pair(2, 3) }.unwrap();
    let p = &probs[j / 2][input];
    let a = bits_of(input);
    let want = a[fam.x_bit] * 2 + a[fam.z_bit];
    match credit {
        Credit::PairOutcome => p[want],
        Credit::Marginal => (0..4)
            .filter(|&o| if j == fam.x_bit { o / 2 == a[j] } else { o % 2 == a[j] })
            .map(|o| p[o])
            .sum(),
    }
}

fn single_families(table: &EncodingTable, branch: Branch) -> Result<[Vec<[f64; 4]>; 2]> {
    Ok([
        family_probabilities(table, family_for_pair(0, 1).unwrap(), branch)?,
        family_probabilities(table, family_for_pair(2, 3).unwrap(), branch)?,
    ])
}

fn four_bit_report(table: &EncodingTable, variant: Variant, credit: Credit, branch: Branch) -> Result<ProtocolReport> {
    check_four_bit_table(table)?;
    let mut per_string = BTreeMap::new();
    match variant {
        Variant::FourDitsPairs => {
            let f01 = family_probabilities(table, family_for_pair(0, 1).unwrap(), branch)?;
            for (i, j) in BIT_PAIRS {
                let fam = family_for_pair(i, j);
                let probs = fam.map(|f| family_probabilities(table, f, branch)).transpose()?;
                let mut sums = [0.0; 4];
                for input in 0..16 {
                    let a = bits_of(input);
                    let p = match (fam, &probs) {
                        // both bits are read, so either credit rule needs the full outcome
                        (Some(fam), Some(probs)) => probs[input][a[fam.x_bit] * 2 + a[fam.z_bit]],
                        _ => {
                            // rows/columns: read the bit of {a0,a1} from the 01 family, guess the other
                            let want = a[0] * 2 + a[1];
                            let read = f01[input];
                            let hit = match credit {
                                Credit::PairOutcome => read[want],
                                Credit::Marginal => (0..4)
                                    .filter(|&o| if i == 0 { o / 2 == a[0] } else { o % 2 == a[1] })
                                    .map(|o| read[o])
                                    .sum(),
                            };
                            0.5 * hit
                        }
                    };
                    sums[a[i] * 2 + a[j]] += p;
                }
                let m = (0..4).map(|s| (string_key(&[s / 2, s % 2]), sums[s] / 4.0)).collect();
                per_string.insert(pair_key(i, j), m);
            }
        }
        Variant::FourDitsSingle => {
            let probs = single_families(table, branch)?;
            for j in 0..4 {
                let mut sums = [0.0; 2];
                for input in 0..16 {
                    sums[bits_of(input)[j]] += single_bit_success(&probs, j, input, credit);
                }
                per_string.insert(format!("a{j}"), (0..2).map(|v| (v.to_string(), sums[v] / 8.0)).collect());
            }
        }
        _ => return Err(QracError::InvalidArgument("not a four-bit variant".into())),
    }
    let mut report = ProtocolReport::from_per_string(variant.label(2), 2, variant, per_string);
    report.credit = Some(credit);
    Ok(report)
}

/// The 4₂→2₂ and 4₂→1₂ reports with the standard qubit table.
pub fn run_four_bit_variants(credit: Credit) -> Result<(ProtocolReport, ProtocolReport)> {
    let table = builtin_table(2)?;
    Ok((
        four_bit_report(&table, Variant::FourDitsPairs, credit, Branch::Canonical)?,
        four_bit_report(&table, Variant::FourDitsSingle, credit, Branch::Canonical)?,
    ))
}

fn f_qracse_report(table: &EncodingTable, tt: TruthTable, credit: Credit, branch: Branch) -> Result<ProtocolReport> {
    check_four_bit_table(table)?;
    let probs = single_families(table, branch)?;
    let mut per_string = BTreeMap::new();
    for j in 0..4 {
        let mut sums = [0.0; 2];
        let mut counts = [0usize; 2];
        for input in 0..16 {
            let a = bits_of(input);
            let g = tt.induced_bits([a[0] as u8, a[1] as u8, a[2] as u8, a[3] as u8]);
            let g_input = g.iter().fold(0usize, |acc, &b| acc * 2 + b as usize);
            let v = g[j] as usize;
            sums[v] += single_bit_success(&probs, j, g_input, credit);
            counts[v] += 1;
        }
        let m = (0..2).filter(|&v| counts[v] > 0).map(|v| (v.to_string(), sums[v] / counts[v] as f64)).collect();
        per_string.insert(format!("g{j}"), m);
    }
    let variant = Variant::BooleanF(tt);
    let mut report = ProtocolReport::from_per_string(variant.label(2), 2, variant, per_string);
    // per-choice averages weight values by how often they occur
    for j in 0..4 {
        let key = format!("g{j}");
        let mut total = 0.0;
        for input in 0..16 {
            let a = bits_of(input);
            let g = tt.induced_bits([a[0] as u8, a[1] as u8, a[2] as u8, a[3] as u8]);
            let g_input = g.iter().fold(0usize, |acc, &b| acc * 2 + b as usize);
            total += single_bit_success(&probs, j, g_input, credit);
        }
        report.per_choice.insert(key, total / 16.0);
    }
    report.p_avg = report.per_choice.values().sum::<f64>() / 4.0;
    report.credit = Some(credit);
    Ok(report)
}

/// f-QRAC-SE: Alice encodes the four bits induced by `f` and Bob decodes one.
pub fn f_qracse(truth_table: &[u8]) -> Result<ProtocolReport> {
    let tt = TruthTable::new(truth_table)?;
    f_qracse_report(&builtin_table(2)?, tt, Credit::PairOutcome, Branch::Canonical)
}

pub fn f_qracse_with_credit(tt: TruthTable, credit: Credit) -> Result<ProtocolReport> {
    f_qracse_report(&builtin_table(2)?, tt, credit, Branch::Canonical)
}
