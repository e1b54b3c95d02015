mod common;

use common::*;
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig { cases: 10_000, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn field_axioms_hold(a in cyclo(), b in cyclo(), c in cyclo()) {
        field_axioms(&a, &b, &c)?;
    }

    #[test]
    fn galois_action_composes(a in cyclo(), b in cyclo(), u in unit(), v in unit()) {
        galois_composition(&a, &b, u, v)?;
    }
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 1_000, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn decompositions_re_expand(f in constant_weight()) {
        re_expands(&f)?;
    }
}

#[test]
fn twist_exponent_vanishes_for_odd_m() {
    twist_exponents(45).unwrap();
}

#[test]
fn square_classes_descend_to_q_zeta_m() {
    square_classes_descend(60).unwrap();
}

#[test]
fn gauss_sums_have_magnitude_sqrt_q() {
    gauss_sum_magnitudes(&GAUSS_CASES).unwrap();
}
