mod oracle;

use proptest::prelude::*;

use num_rational::Ratio;
use qrac_core::bounds::{asym_closed_form_n2, werner_fidelity, CloningParams};
use qrac_core::codes::{builtin_table, generate_single_distance, search_tables, EncodingTable, Objective};
use qrac_core::pauli::{frac_power_x, frac_power_z, weyl, Branch, weyl_with_branch};
use qrac_core::qcore::{
    entanglement_from_transmission, transmission_from_entanglement, ComplexMatrix,
};
use qrac_core::qracse::{measurement_basis, ProtocolKernel, QracTask, Variant, run_protocol};
use qrac_core::teleport::{constrained_povm, constrained_teleport_fidelity, nsqrac_favored_strategy, nsqrac_split_strategy};

fn config(cases: u32) -> ProptestConfig {
    ProptestConfig { cases, ..ProptestConfig::default() }
}

proptest! {
    #![proptest_config(config(64))]

    #[test]
    fn fractional_powers_are_unitary(d in 2usize..=6, t in -20.0f64..20.0) {
        prop_assert!(frac_power_x(d, t).unwrap().is_unitary(1e-10));
        prop_assert!(frac_power_z(d, t).unwrap().is_unitary(1e-10));
    }

    #[test]
    fn weyl_matches_reference(d in 2usize..=4, a in -3.0f64..3.0, b in -3.0f64..3.0) {
        let lib = weyl_with_branch(d, a, b, Branch::Canonical).unwrap();
        let reference = oracle::weyl(d, a, b);
        let lib_rows = lib.to_row_major();
        for j in 0..d {
            for l in 0..d {
                prop_assert!((lib_rows[j * d + l] - reference[j][l]).norm() < 1e-10);
            }
        }
    }

    #[test]
    fn integer_powers_agree_across_branches(d in 2usize..=5, a in -6i32..6, b in -6i32..6) {
        let c = weyl_with_branch(d, a as f64, b as f64, Branch::Canonical).unwrap();
        let m = weyl_with_branch(d, a as f64, b as f64, Branch::Centered).unwrap();
        prop_assert!(c.approx_eq(&m, 1e-10));
    }

    #[test]
    fn weyl_powers_compose(d in 2usize..=5, s in -2.0f64..2.0, t in -2.0f64..2.0) {
        let lhs = frac_power_x(d, s).unwrap();
        let prod = ComplexMatrix::from_nalgebra(lhs.as_nalgebra() * frac_power_x(d, t).unwrap().as_nalgebra());
        prop_assert!(prod.approx_eq(&frac_power_x(d, s + t).unwrap(), 1e-10));
    }

    #[test]
    fn outcome_distributions_normalize(d in 2usize..=4, c in 0usize..2, e0 in 0usize..16, e1 in 0usize..16) {
        let n = d * d;
        let kernel = ProtocolKernel::new(d).unwrap();
        let probs = kernel.outcome_distribution(c, e0 % n, e1 % n);
        prop_assert!(probs.iter().all(|&p| (-1e-12..=1.0 + 1e-12).contains(&p)));
        prop_assert!((probs.iter().sum::<f64>() - 1.0).abs() < 1e-10);
    }

    #[test]
    fn conversions_round_trip(d in 2i128..=8, num in 0i128..=64) {
        let f = Ratio::new(num.min(d * d), d * d);
        let t = transmission_from_entanglement(f, d as usize).unwrap();
        prop_assert_eq!(t, (f * d + 1) / (d + 1));
        prop_assert_eq!(entanglement_from_transmission(t, d as usize).unwrap(), f);
    }

    #[test]
    fn closed_form_is_symmetric_with_minimum_at_half(p in 0.0f64..=1.0, d in 2usize..=6) {
        let v = asym_closed_form_n2(p, d).unwrap();
        prop_assert!((v - asym_closed_form_n2(1.0 - p, d).unwrap()).abs() < 1e-12);
        prop_assert!(v >= asym_closed_form_n2(0.5, d).unwrap() - 1e-12);
        prop_assert!(v <= 1.0 + 1e-12);
    }

    #[test]
    fn werner_nonincreasing_in_copies(d in 2usize..=5, n1 in 1usize..=4, extra in 0usize..=4) {
        let n2 = n1 + extra;
        let a = werner_fidelity(CloningParams::new(n1, n2, d).unwrap());
        let b = werner_fidelity(CloningParams::new(n1, n2 + 1, d).unwrap());
        prop_assert!(b <= a);
        prop_assert!(a <= Ratio::from_integer(1));
    }

    #[test]
    fn table_serde_round_trip(d in 2usize..=6) {
        let t = generate_single_distance(d).unwrap();
        let json = serde_json::to_string(&t).unwrap();
        let back: EncodingTable = serde_json::from_str(&json).unwrap();
        prop_assert_eq!(back, t);
    }

    #[test]
    fn generated_tables_are_valid(d in 2usize..=8) {
        let t = generate_single_distance(d).unwrap();
        prop_assert!(t.validate().is_valid());
        prop_assert_eq!(t.pairs().len(), d * d);
    }
}

proptest! {
    #![proptest_config(config(8))]

    #[test]
    fn constrained_fidelity_is_monotone(d in 2usize..=3) {
        let mut prev = 0.0;
        for k in 1..=d * d {
            let f = constrained_teleport_fidelity(d, k).unwrap().entanglement_fidelity_f.unwrap();
            prop_assert!(f >= prev - 1e-12);
            prev = f;
        }
    }

    #[test]
    fn povms_are_valid(d in 2usize..=4, k_seed in 1usize..=16) {
        let n = d * d;
        let k = 1 + (k_seed - 1) % n;
        let povm = constrained_povm(d, k).unwrap();
        let sum = povm.elements().iter().fold(ComplexMatrix::zeros(n, n), |a, e| &a + e);
        prop_assert!(sum.approx_eq(&ComplexMatrix::identity(n), 1e-10));
        for e in povm.elements() {
            prop_assert!(e.is_hermitian(1e-10));
            prop_assert!(e.hermitian_eigenvalues()[0] >= -1e-10);
        }
    }

    #[test]
    fn favored_beats_split(d in 2usize..=4, k in 0usize..=4) {
        let split = nsqrac_split_strategy(d, k).unwrap().success_probability;
        let favored = nsqrac_favored_strategy(d).unwrap().success_probability;
        prop_assert!(favored >= split);
    }

    #[test]
    fn success_probabilities_are_ordered(d in 2usize..=4) {
        let rep = run_protocol(&QracTask::standard(d, Variant::TwoStrings).unwrap()).unwrap();
        for &p in rep.per_choice.values() {
            prop_assert!(rep.p_min <= p + 1e-12 && p <= 1.0 + 1e-12);
        }
        prop_assert!(rep.p_min <= rep.p_avg + 1e-12);
    }

    #[test]
    fn measurement_bases_are_orthonormal(d in 2usize..=5, c in 0usize..2) {
        let basis = measurement_basis(d, c).unwrap();
        for (i, u) in basis.iter().enumerate() {
            for (j, v) in basis.iter().enumerate() {
                let want = if i == j { 1.0 } else { 0.0 };
                prop_assert!((u.inner(v) - num_complex::Complex64::new(want, 0.0)).norm() < 1e-10);
            }
        }
    }
}

#[test]
fn qubit_protocol_is_symmetric() {
    let rep = run_protocol(&QracTask::standard(2, Variant::TwoStrings).unwrap()).unwrap();
    for p in rep.per_string.values().flat_map(|m| m.values()) {
        assert!((p - oracle::QUBIT).abs() < 1e-10);
    }
    assert!((rep.per_choice["c=0"] - rep.per_choice["c=1"]).abs() < 1e-12);
}

#[test]
fn library_matches_reference_protocol() {
    for d in 2..=4 {
        let rep = run_protocol(&QracTask::standard(d, Variant::TwoStrings).unwrap()).unwrap();
        let reference = oracle::qracse(d, &oracle::table(d));
        assert!((rep.p_avg - reference.p_avg).abs() < 1e-12, "d={d}");
        assert!((rep.p_min - reference.p_min).abs() < 1e-12, "d={d}");
        assert_eq!(builtin_table(d).unwrap().pairs(), oracle::table(d).as_slice());
    }
}

#[test]
fn weyl_default_is_canonical() {
    let a = weyl(3, 0.4, -1.3).unwrap();
    let b = weyl_with_branch(3, 0.4, -1.3, Branch::Canonical).unwrap();
    assert!(a.approx_eq(&b, 1e-14));
}

#[test]
fn search_never_worse_than_builtin() {
    for d in 3..=4 {
        let kernel = ProtocolKernel::new(d).unwrap();
        let base = kernel.score(&builtin_table(d).unwrap()).unwrap();
        let found = search_tables(d, Objective::PMin, 200, 7).unwrap();
        assert!(found.table.validate().is_valid());
        assert!(found.score >= base.p_min - 1e-12, "d={d}: {} < {}", found.score, base.p_min);
    }
}
