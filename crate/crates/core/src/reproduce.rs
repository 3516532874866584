//! Reproduction run: recomputes every headline number, compares it with the
//! published value and records the outcome of each comparison.

use std::collections::BTreeMap;
use std::io::Write;

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::bounds::{
    asym_closed_form_n2, asym_optimize, fully_entangled_fraction, kay_constraint_residual, symmetric_bound,
    symmetric_bound_via_cloning, werner_fidelity, AsymSpec, CloningParams, DEFAULT_RESTARTS,
};
use crate::error::Result;
use crate::pauli::{bell_basis, frac_power_x, frac_power_z};
use crate::qcore::{chunk_rng, partial_trace, random_ket, DensityMatrix, Rational};
use crate::qracse::{
    measurement_basis, run_four_bit_variants, run_protocol, trivial_strategy, Credit, ProtocolKernel, QracTask,
    Variant,
};
use crate::teleport::{
    composite_nsqrac_via_qracse, constrained_povm, constrained_teleport_fidelity, nsqrac_favored_strategy,
    nsqrac_split_strategy,
};

pub const DISCREPANCY: &str = "paper-discrepancy";

/// Random samples per RNG stream.
pub const CHUNK: usize = 256;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub expected: Value,
    pub actual: Value,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tolerance: Option<f64>,
    pub hard: bool,
    pub passed: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub annotation: Option<String>,
}

impl Check {
    pub fn close(name: impl Into<String>, expected: f64, actual: f64, tol: f64) -> Self {
        Self {
            name: name.into(),
            expected: json!(expected),
            actual: json!(actual),
            tolerance: Some(tol),
            hard: true,
            passed: (actual - expected).abs() <= tol,
            annotation: None,
        }
    }

    pub fn exact(name: impl Into<String>, expected: impl Into<String>, actual: impl Into<String>) -> Self {
        let (e, a) = (expected.into(), actual.into());
        Self { name: name.into(), passed: e == a, expected: json!(e), actual: json!(a), tolerance: None, hard: true, annotation: None }
    }

    pub fn holds(name: impl Into<String>, condition: &str, actual: f64, passed: bool) -> Self {
        Self { name: name.into(), expected: json!(condition), actual: json!(actual), tolerance: None, hard: true, passed, annotation: None }
    }

    /// Never fails the run; a mismatch is flagged as a discrepancy in the published numbers.
    pub fn soft(mut self) -> Self {
        self.hard = false;
        if !self.passed {
            self.annotation = Some(DISCREPANCY.into());
        }
        self
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CriterionReport {
    pub criterion: usize,
    pub title: String,
    pub passed: bool,
    pub checks: Vec<Check>,
    pub data: Value,
}

impl CriterionReport {
    fn new(criterion: usize, title: &str, checks: Vec<Check>, data: Value) -> Self {
        let passed = checks.iter().all(|c| c.passed || !c.hard);
        Self { criterion, title: title.into(), passed, checks, data }
    }

    pub fn flagged(&self) -> usize {
        self.checks.iter().filter(|c| c.annotation.is_some()).count()
    }

    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut wr = csv::Writer::from_writer(w);
        wr.write_record(["check", "expected", "actual", "tolerance", "hard", "passed", "annotation"])?;
        for c in &self.checks {
            wr.write_record([
                c.name.clone(),
                value_text(&c.expected),
                value_text(&c.actual),
                c.tolerance.map(|t| t.to_string()).unwrap_or_default(),
                c.hard.to_string(),
                c.passed.to_string(),
                c.annotation.clone().unwrap_or_default(),
            ])?;
        }
        wr.flush()?;
        Ok(())
    }
}

fn value_text(v: &Value) -> String {
    match v {
        Value::String(s) => s.clone(),
        other => other.to_string(),
    }
}

fn qubit_value() -> f64 {
    (3.0 + 2.0 * 2f64.sqrt()) / 8.0
}

fn ratio(n: usize, d: usize) -> String {
    Rational::new(n as i128, d as i128).to_string()
}

pub fn criterion_1() -> Result<CriterionReport> {
    let mut checks = Vec::new();
    let mut rows = Vec::new();
    for d in 2..=3 {
        for k in 1..=d * d {
            let r = constrained_teleport_fidelity(d, k)?;
            let f = r.entanglement_fidelity_f.unwrap_or(f64::NAN);
            checks.push(Check::close(format!("F(d={d}, k={k})"), k as f64 / (d * d) as f64, f, 1e-10));
            checks.push(Check::exact(format!("exact F(d={d}, k={k})"), ratio(k, d * d), r.exact.clone().unwrap_or_default()));
            rows.push(json!({ "d": d, "k": k, "exact": r.exact, "simulated": f }));
        }
    }
    Ok(CriterionReport::new(1, "constrained teleportation F = k/d^2", checks, json!({ "rows": rows })))
}

pub fn criterion_2() -> Result<CriterionReport> {
    let r = run_protocol(&QracTask::standard(2, Variant::TwoStrings)?)?;
    let q = qubit_value();
    let checks = vec![
        Check::close("P_avg = (3+2*sqrt2)/8", q, r.p_avg, 1e-9),
        Check::close("P_min = (3+2*sqrt2)/8", q, r.p_min, 1e-9),
        Check::close("P_avg vs printed 0.728", 0.728, r.p_avg, 1e-3),
    ];
    Ok(CriterionReport::new(2, "QRAC-SE d=2", checks, serde_json::to_value(&r)?))
}

pub fn criterion_3() -> Result<CriterionReport> {
    let r = run_protocol(&QracTask::standard(4, Variant::TwoStrings)?)?;
    let checks = vec![
        Check::close("P(c=0)", 0.629, r.per_choice["c=0"], 2e-3),
        Check::close("P(c=1)", 0.261, r.per_choice["c=1"], 2e-3),
        Check::close("P_avg", 0.445, r.p_avg, 2e-3),
        Check::close("P_min", 0.261, r.p_min, 2e-3),
    ];
    Ok(CriterionReport::new(3, "QRAC-SE d=4", checks, serde_json::to_value(&r)?))
}

/// The per-choice values printed in the d=3 text are inconsistent with the
/// table; they are flagged, and the table values are checked.
pub fn criterion_4() -> Result<CriterionReport> {
    let r = run_protocol(&QracTask::standard(3, Variant::TwoStrings)?)?;
    let checks = vec![
        Check::close("P(c=0) vs text 0.582", 0.582, r.per_choice["c=0"], 2e-3).soft(),
        Check::close("P(c=1) vs text 0.386", 0.386, r.per_choice["c=1"], 2e-3).soft(),
        Check::close("P_avg vs table 0.539", 0.539, r.p_avg, 2e-3),
        Check::close("P_min vs table 0.424", 0.424, r.p_min, 2e-3),
    ];
    Ok(CriterionReport::new(4, "QRAC-SE d=3", checks, serde_json::to_value(&r)?))
}

pub fn criterion_5() -> Result<CriterionReport> {
    let (pairs, single) = run_four_bit_variants(Credit::PairOutcome)?;
    let q = qubit_value();
    let ground = (4.0 * q + q) / 6.0;
    let trivial = trivial_strategy(2, Variant::FourDitsPairs)?;
    let exact = trivial.exact.clone().unwrap_or(crate::qracse::ExactSummary { p_avg: String::new(), p_min: String::new() });
    let checks = vec![
        Check::close("pairs P_min", 0.364, pairs.p_min, 2e-3),
        Check::close("pairs P_avg vs ground truth", ground, pairs.p_avg, 5e-3),
        Check::close("pairs P_avg vs text 0.607", 0.607, pairs.p_avg, 2e-3).soft(),
        Check::close("pairs P_avg vs table 0.604", 0.604, pairs.p_avg, 2e-3).soft(),
        Check::close("single P_avg", 0.728, single.p_avg, 2e-3),
        Check::close("single P_min", 0.728, single.p_min, 2e-3),
        Check::exact("trivial pairs P_avg", "13/24", exact.p_avg),
        Check::exact("trivial pairs P_min", "1/4", exact.p_min),
    ];
    let (pairs_m, single_m) = run_four_bit_variants(Credit::Marginal)?;
    let data = json!({ "pairs": pairs, "single": single, "trivial_pairs": trivial,
        "marginal_credit": { "pairs": pairs_m, "single": single_m } });
    Ok(CriterionReport::new(5, "four-bit variants", checks, data))
}

pub fn criterion_6() -> Result<CriterionReport> {
    let mut checks = Vec::new();
    let mut rows = Vec::new();
    for d in 2..=4 {
        for k in [0, 1, d * d / 2, d * d] {
            let s = nsqrac_split_strategy(d, k)?;
            checks.push(Check::exact(format!("split d={d} k'={k}"), "1/2", s.exact.clone().unwrap_or_default()));
            checks.push(Check::close(format!("split d={d} k'={k} simulated"), 0.5, s.success_probability, 1e-10));
        }
        let f = nsqrac_favored_strategy(d)?;
        let want = Rational::new(1, 2) * (Rational::from_integer(1) + Rational::new(1, (d * d) as i128));
        checks.push(Check::exact(format!("favored d={d}"), want.to_string(), f.exact.clone().unwrap_or_default()));
        checks.push(Check::close(format!("favored d={d} witness"), f.success_probability, f.witness.unwrap_or(f64::NAN), 1e-10));
        rows.push(serde_json::to_value(&f)?);
    }
    Ok(CriterionReport::new(6, "NS-QRAC lower-bound strategies", checks, json!({ "favored": rows })))
}

pub fn criterion_7() -> Result<CriterionReport> {
    let r = composite_nsqrac_via_qracse(2)?;
    let base = run_protocol(&QracTask::standard(2, Variant::TwoStrings)?)?;
    let f = r.entanglement_fidelity_f.unwrap_or(f64::NAN);
    let checks = vec![
        Check::close("F vs QRAC-SE d=2", base.p_avg, f, 1e-6),
        Check::holds("F > 5/8", "> 0.625", f, f > 0.625),
        Check::close("state-level simulation", f, r.witness.unwrap_or(f64::NAN), 1e-9),
    ];
    Ok(CriterionReport::new(7, "composite protocol", checks, serde_json::to_value(&r)?))
}

pub fn criterion_8(seed: u64) -> Result<CriterionReport> {
    let mut checks = vec![
        Check::exact("symmetric(2,2)", "3/4", symmetric_bound(2, 2)?.to_string()),
        Check::exact("werner(1,2,2)", "5/6", werner_fidelity(CloningParams::new(1, 2, 2)?).to_string()),
        Check::close("closed form p=1/2 d=2", 0.75, asym_closed_form_n2(0.5, 2)?, 1e-15),
    ];
    for d in 2..=5 {
        for n in 1..=5 {
            let want = Rational::new((n + d - 1) as i128, (d * n) as i128);
            checks.push(Check::exact(format!("symmetric({d},{n})"), want.to_string(), symmetric_bound(d, n)?.to_string()));
            checks.push(Check::exact(format!("cloning chain({d},{n})"), want.to_string(), symmetric_bound_via_cloning(d, n)?.to_string()));
        }
    }
    let mut grid = Vec::new();
    for d in 2..=3 {
        for i in 0..=10 {
            let p = i as f64 / 10.0;
            let closed = asym_closed_form_n2(p, d)?;
            let opt = asym_optimize(&AsymSpec::new(d, vec![p, 1.0 - p])?, DEFAULT_RESTARTS, seed)?;
            checks.push(Check::close(format!("optimizer d={d} p={p:.1}"), closed, opt.value, 1e-6));
            grid.push(json!({ "d": d, "p": p, "closed_form": closed, "optimizer": opt.value, "point": opt.point }));
        }
    }
    Ok(CriterionReport::new(8, "monogamy bounds", checks, json!({ "asym_grid": grid })))
}

/// Kay residuals on the two fully entangled fractions of random three-qubit states.
pub fn monogamy_residuals(samples: usize, seed: u64) -> Result<Vec<f64>> {
    let mut out = Vec::with_capacity(samples);
    let mut chunk = 0u64;
    while out.len() < samples {
        let mut rng = chunk_rng(seed, chunk);
        for _ in 0..CHUNK.min(samples - out.len()) {
            // order A'1, A'2, B
            let rho = DensityMatrix::from_ket(&random_ket(8, &mut rng));
            let f1 = fully_entangled_fraction(&partial_trace(&rho, &[2, 2, 2], &[0, 2])?)?.value;
            let f2 = fully_entangled_fraction(&partial_trace(&rho, &[2, 2, 2], &[1, 2])?)?.value;
            out.push(kay_constraint_residual(&[f1.min(1.0), f2.min(1.0)], 2)?);
        }
        chunk += 1;
    }
    Ok(out)
}

pub fn criterion_9(seed: u64) -> Result<CriterionReport> {
    let residuals = monogamy_residuals(500, seed)?;
    let worst = residuals.iter().copied().fold(f64::INFINITY, f64::min);
    let checks = vec![Check::holds("min residual over 500 states", ">= -1e-9", worst, worst >= -1e-9)];
    Ok(CriterionReport::new(9, "empirical monogamy", checks, json!({ "samples": 500, "min_residual": worst })))
}

pub fn criterion_10(seed: u64) -> Result<CriterionReport> {
    let mut checks = Vec::new();
    let mut rng = chunk_rng(seed, 0);
    for d in 2..=5 {
        let mut worst_povm = 0.0f64;
        for k in 1..=d * d {
            // Povm construction itself validates completeness and positivity
            let povm = constrained_povm(d, k)?;
            let sum = povm.elements().iter().fold(crate::qcore::ComplexMatrix::zeros(d * d, d * d), |a, e| &a + e);
            worst_povm = worst_povm.max(sum.max_abs_diff(&crate::qcore::ComplexMatrix::identity(d * d)));
        }
        checks.push(Check::holds(format!("POVM completeness d={d}"), "<= 1e-10", worst_povm, worst_povm <= 1e-10));

        let mut worst_basis = 0.0f64;
        for c in 0..2 {
            worst_basis = worst_basis.max(gram_defect(&measurement_basis(d, c)?));
        }
        checks.push(Check::holds(format!("measurement basis orthonormality d={d}"), "<= 1e-10", worst_basis, worst_basis <= 1e-10));

        let kernel = ProtocolKernel::new(d)?;
        let mut worst_norm = 0.0f64;
        for c in 0..2 {
            for e0 in 0..d * d {
                for e1 in 0..d * d {
                    let total: f64 = kernel.outcome_distribution(c, e0, e1).iter().sum();
                    worst_norm = worst_norm.max((total - 1.0).abs());
                }
            }
        }
        checks.push(Check::holds(format!("outcome normalization d={d}"), "<= 1e-10", worst_norm, worst_norm <= 1e-10));

        let mut worst_unitary = 0.0f64;
        for _ in 0..16 {
            use rand::Rng;
            let t: f64 = rng.gen_range(-(d as f64)..(d as f64));
            for m in [frac_power_x(d, t)?, frac_power_z(d, t)?] {
                let id = crate::qcore::ComplexMatrix::identity(d);
                worst_unitary = worst_unitary.max((&m * &m.adjoint()).max_abs_diff(&id));
            }
        }
        checks.push(Check::holds(format!("fractional power unitarity d={d}"), "<= 1e-10", worst_unitary, worst_unitary <= 1e-10));

        let bell = gram_defect(&bell_basis(d)?);
        checks.push(Check::holds(format!("Bell basis orthonormality d={d}"), "<= 1e-10", bell, bell <= 1e-10));
    }
    Ok(CriterionReport::new(10, "property suites", checks, Value::Null))
}

fn gram_defect(kets: &[crate::qcore::Ket]) -> f64 {
    let mut worst = 0.0f64;
    for (i, u) in kets.iter().enumerate() {
        for (j, v) in kets.iter().enumerate() {
            let want = if i == j { 1.0 } else { 0.0 };
            worst = worst.max((u.inner(v) - crate::qcore::c64(want, 0.0)).norm());
        }
    }
    worst
}

/// Criteria 1 to 10.
pub fn numeric_criteria(seed: u64) -> Result<Vec<CriterionReport>> {
    Ok(vec![
        criterion_1()?,
        criterion_2()?,
        criterion_3()?,
        criterion_4()?,
        criterion_5()?,
        criterion_6()?,
        criterion_7()?,
        criterion_8(seed)?,
        criterion_9(seed)?,
        criterion_10(seed)?,
    ])
}

pub fn render_json(report: &CriterionReport) -> Result<String> {
    Ok(serde_json::to_string_pretty(report)? + "\n")
}

/// Recomputes criteria 1 to 10 and compares the serialized output byte for byte.
pub fn criterion_11(seed: u64, first: &[CriterionReport]) -> Result<CriterionReport> {
    let second = numeric_criteria(seed)?;
    let mut checks = Vec::new();
    for (a, b) in first.iter().zip(&second) {
        let same = render_json(a)? == render_json(b)?;
        checks.push(Check::holds(format!("criterion {} JSON identical", a.criterion), "identical", same as u8 as f64, same));
    }
    Ok(CriterionReport::new(11, "determinism", checks, json!({ "seed": seed })))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Table4Row {
    pub d: usize,
    pub p_min: f64,
    pub trivial_p_min: f64,
    pub p_avg: f64,
    pub trivial_p_avg: f64,
}

pub fn table4_row(d: usize) -> Result<Table4Row> {
    let r = run_protocol(&QracTask::standard(d, Variant::TwoStrings)?)?;
    let t = trivial_strategy(d, Variant::TwoStrings)?;
    Ok(Table4Row { d, p_min: r.p_min, trivial_p_min: t.p_min, p_avg: r.p_avg, trivial_p_avg: t.p_avg })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub seed: u64,
    pub passed: bool,
    pub criteria: BTreeMap<usize, CriterionSummary>,
    pub table4: Vec<Table4Row>,
    pub table6: Value,
    pub composite_fidelity: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CriterionSummary {
    pub title: String,
    pub passed: bool,
    pub hard_checks: usize,
    pub hard_failures: usize,
    pub flagged: usize,
}

pub fn summarize(seed: u64, reports: &[CriterionReport]) -> Result<Summary> {
    let criteria = reports
        .iter()
        .map(|r| {
            let hard: Vec<&Check> = r.checks.iter().filter(|c| c.hard).collect();
            (
                r.criterion,
                CriterionSummary {
                    title: r.title.clone(),
                    passed: r.passed,
                    hard_checks: hard.len(),
                    hard_failures: hard.iter().filter(|c| !c.passed).count(),
                    flagged: r.flagged(),
                },
            )
        })
        .collect();
    let (pairs, single) = run_four_bit_variants(Credit::PairOutcome)?;
    let row6 = |r: &crate::qracse::ProtocolReport, t: &crate::qracse::ProtocolReport| {
        json!({ "task": r.label, "p_min": r.p_min, "trivial_p_min": t.p_min, "p_avg": r.p_avg, "trivial_p_avg": t.p_avg })
    };
    let table6 = json!([
        row6(&pairs, &trivial_strategy(2, Variant::FourDitsPairs)?),
        row6(&single, &trivial_strategy(2, Variant::FourDitsSingle)?),
    ]);
    let composite = composite_nsqrac_via_qracse(2)?.entanglement_fidelity_f.unwrap_or(f64::NAN);
    Ok(Summary {
        seed,
        passed: reports.iter().all(|r| r.passed),
        criteria,
        table4: (2..=4).map(table4_row).collect::<Result<_>>()?,
        table6,
        composite_fidelity: composite,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn soft_checks_never_fail_a_criterion() {
        let c = Check::close("x", 1.0, 2.0, 0.1).soft();
        assert_eq!(c.annotation.as_deref(), Some(DISCREPANCY));
        let r = CriterionReport::new(0, "t", vec![c], Value::Null);
        assert!(r.passed);
        assert_eq!(r.flagged(), 1);
    }

    #[test]
    fn hard_failure_fails_a_criterion() {
        let r = CriterionReport::new(0, "t", vec![Check::exact("x", "1/2", "1/3")], Value::Null);
        assert!(!r.passed);
    }

    #[test]
    fn residual_sampling_is_seeded() {
        assert_eq!(monogamy_residuals(10, 3).unwrap(), monogamy_residuals(10, 3).unwrap());
        assert_ne!(monogamy_residuals(10, 3).unwrap(), monogamy_residuals(10, 4).unwrap());
    }

    #[test]
    fn csv_header() {
        let r = CriterionReport::new(0, "t", vec![Check::exact("x", "1", "1")], Value::Null);
        let mut buf = Vec::new();
        r.write_csv(&mut buf).unwrap();
        let s = String::from_utf8(buf).unwrap();
        assert!(s.starts_with("check,expected,actual,tolerance,hard,passed,annotation\n"));
    }
}
