mod common;

use common::*;
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(CASES))]

    #[test]
    fn pwpoly_ring_laws(t in arb_triple()) {
        ring_laws(t)?;
    }

    #[test]
    fn smoothness_matches_the_numeric_oracle(c in arb_oracle_case()) {
        oracle_agreement(c)?;
    }

    #[test]
    fn more_generators_never_enlarge_the_dual(c in arb_generators()) {
        dual_monotone(c)?;
    }

    #[test]
    fn form_rank_is_bounded_by_the_dual(c in arb_space_and_weights()) {
        rank_ceiling(c)?;
    }

    #[test]
    fn forms_on_the_abs_last_space_kill_the_last_axis(c in arb_abs_last_weights()) {
        eigenvector_constraint(c)?;
    }

    #[test]
    fn reports_are_deterministic(text in arb_document()) {
        report_determinism(text)?;
    }
}

#[test]
fn numeric_oracle_sees_kinks_of_each_order() {
    use diffeolab::pwpoly::OrthantPoly;
    let x = OrthantPoly::var(2, 0);
    let a = OrthantPoly::abs_var(2, 0);
    let y = OrthantPoly::var(2, 1);
    let probes = vec![vec![0.7, -1.3]];
    assert!(numerically_kinked(&a, &probes));
    assert!(numerically_kinked(&x.mul(&a), &probes));
    assert!(numerically_kinked(&x.mul(&x).mul(&a).mul(&y), &probes));
    assert!(!numerically_kinked(&x.mul(&x).mul(&y).add(&y), &probes));
    assert!(!numerically_kinked(&a.mul(&a), &probes));
}
