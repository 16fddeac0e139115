use opclass::classes::{DEFAULT_K_LIST, DEFAULT_P_LIST};
use opclass::decomposition::{normal_pure_split, root_decompose, BlockLabel};
use opclass::generators::{ginibre, jordan_nilpotent, k_quasi_member, random_normal, KQuasiSpec};
use opclass::io::{parse_json, parse_matrix_market, to_json, to_matrix_market};
use opclass::linalg::psd_power;
use opclass::{Classifier, ComplexMatrix, OperatorClass, Status, TolerancePolicy};
use proptest::prelude::*;

fn config() -> ProptestConfig {
    ProptestConfig {
        cases: 24,
        ..ProptestConfig::default()
    }
}

proptest! {
    #![proptest_config(config())]

    #[test]
    fn files_round_trip_exactly(dim in 1usize..7, seed in any::<u64>(), scale in -8i32..8) {
        let t = ginibre(dim, seed).scale_real(10f64.powi(scale));
        prop_assert_eq!(parse_json(&to_json(&t)).unwrap(), t.clone());
        prop_assert_eq!(parse_matrix_market(&to_matrix_market(&t)).unwrap(), t);
    }

    #[test]
    fn square_root_of_gram_squares_back(dim in 1usize..7, seed in any::<u64>()) {
        let tol = TolerancePolicy::default();
        let g = ginibre(dim, seed).gram();
        let r = psd_power(&g, 0.5, &tol).unwrap();
        prop_assert!(r.is_hermitian(1e-12));
        prop_assert!(r.power(2).distance(&g) <= 1e-10 * g.frobenius_norm().max(1.0));
    }

    #[test]
    fn normal_pure_split_reassembles(dn in 0usize..4, dp in 2usize..4, seed in any::<u64>()) {
        let tol = TolerancePolicy::default();
        let pure = jordan_nilpotent(dp, dp, seed).unwrap();
        let t = if dn == 0 { pure } else { random_normal(dn, seed ^ 1, None).unwrap().direct_sum(&pure) };
        let d = normal_pure_split(&t, &tol);
        prop_assert!(d.residuals.reassembly < 1e-10);
        prop_assert!(d.residuals.normality < 1e-10);
        prop_assert!(d.unitarity_residual() < 1e-10);
        prop_assert_eq!(d.dim_of(BlockLabel::NormalPart), dn);
        prop_assert_eq!(d.dim_of(BlockLabel::PurePart), dp);
    }

    #[test]
    fn root_decompose_on_constructed_members(dn in 0usize..4, dnil in 1usize..4, k in 1u32..3, seed in any::<u64>()) {
        let n = k + 1;
        let spec = KQuasiSpec::new(dn, dnil, k);
        let t = k_quasi_member(&spec, seed).unwrap();
        let d = root_decompose(&t, n, k, &Classifier::default()).unwrap();
        prop_assert!(d.residuals.reassembly < 1e-8);
        prop_assert!(d.residuals.normality < 1e-8);
        prop_assert!(d.residuals.nilpotency < 1e-8);
        prop_assert_eq!(d.dim_of(BlockLabel::NormalPart), dn);
    }

    #[test]
    fn verdicts_respect_the_inclusion_chains(dim in 2usize..5, seed in any::<u64>()) {
        let clf = Classifier::with_seed(seed);
        let cl = clf.classify_all(&ginibre(dim, seed), &DEFAULT_K_LIST, &DEFAULT_P_LIST);
        prop_assert!(cl.chain_violations.is_empty(), "{:?}", cl.chain_violations);
    }

    #[test]
    fn verdicts_are_scale_invariant(dim in 2usize..5, seed in any::<u64>(), scale in -3i32..4) {
        let clf = Classifier::with_seed(seed);
        let t = ginibre(dim, seed);
        let s = t.scale_real(10f64.powi(scale));
        for class in [OperatorClass::Normal, OperatorClass::Paranormal, OperatorClass::KQuasiParanormal(1), OperatorClass::Normaloid] {
            let a = clf.verdict(&class, &t).unwrap().status;
            let b = clf.verdict(&class, &s).unwrap().status;
            prop_assert!(a == b || a == Status::Inconclusive || b == Status::Inconclusive, "{class}: {a:?} vs {b:?}");
        }
    }

    #[test]
    fn unitary_conjugation_preserves_membership(dim in 2usize..5, seed in any::<u64>()) {
        let clf = Classifier::with_seed(seed);
        let t = jordan_nilpotent(dim, dim, seed).unwrap();
        let u = opclass::generators::random_unitary(dim, seed ^ 7);
        let s = t.conjugate_by(&u);
        let k = dim as u32 - 1;
        prop_assert_eq!(clf.is_k_quasi_paranormal(&s, k).unwrap().status, Status::Member);
        if k >= 1 {
            prop_assert_eq!(clf.is_k_quasi_paranormal(&s, k - 1).unwrap().status, Status::NonMember);
        }
        prop_assert!(clf.is_normal(&ComplexMatrix::identity(dim).conjugate_by(&u)).is_member());
    }
}
