//! Strategies and checks shared by the property suite and the acceptance run.
#![allow(dead_code)]

use fermat_core::arith::{lcm, rat, units, Rational};
use fermat_core::arithmetic_verify::{base_gauss_sums, GaussSumContext};
use fermat_core::characters::{char_of_equation, decompose_distribution, epsilon, AmFunction, FermatCharacter};
use fermat_core::cyclotomic::CycloElement;
use fermat_core::gamma_exact::CHECK_BITS;
use fermat_core::monodromy_field::square_class;
use fermat_core::mumford_tate::{mt_equations, MTEquation};
use proptest::prelude::*;
use proptest::test_runner::TestCaseError;
use std::collections::HashMap;
use std::sync::LazyLock;

const CONDUCTORS: [u64; 10] = [1, 3, 4, 5, 7, 8, 12, 15, 20, 60];

pub fn cyclo() -> impl Strategy<Value = CycloElement> {
    prop::sample::select(CONDUCTORS.to_vec()).prop_flat_map(|n| {
        prop::collection::vec((-20i64..=20, 1i64..=6), 1..=n as usize + 1).prop_map(move |terms| {
            let t: Vec<(i64, Rational)> = terms.iter().enumerate().map(|(k, &(a, b))| (k as i64, rat(a, b))).collect();
            CycloElement::from_terms(n, &t)
        })
    })
}

/// Units mod 840, a multiple of every sampled conductor.
pub fn unit() -> impl Strategy<Value = i64> {
    prop::sample::select(units(840)).prop_map(|u| u as i64)
}

pub fn field_axioms(a: &CycloElement, b: &CycloElement, c: &CycloElement) -> Result<(), TestCaseError> {
    prop_assert_eq!(a.add(b), b.add(a));
    prop_assert_eq!(a.mul(b), b.mul(a));
    prop_assert_eq!(a.mul(b).mul(c), a.mul(&b.mul(c)));
    prop_assert_eq!(a.mul(&b.add(c)), a.mul(b).add(&a.mul(c)));
    prop_assert_eq!(a.sub(a), CycloElement::zero());
    if !a.is_zero() {
        prop_assert_eq!(a.mul(&a.inv().unwrap()), CycloElement::one());
    }
    Ok(())
}

pub fn galois_composition(a: &CycloElement, b: &CycloElement, u: i64, v: i64) -> Result<(), TestCaseError> {
    let n = lcm(a.conductor(), b.conductor());
    let (a, b) = (a.lift(n), b.lift(n));
    let s = |x: &CycloElement, k: i64| x.galois(k).unwrap();
    prop_assert_eq!(s(&s(&a, v), u), s(&a, u * v % 840));
    prop_assert_eq!(s(&a.mul(&b), u), s(&a, u).mul(&s(&b, u)));
    prop_assert_eq!(s(&a.add(&b), u), s(&a, u).add(&s(&b, u)));
    prop_assert_eq!(s(&a, -1), a.conj());
    Ok(())
}

static KERNELS: LazyLock<HashMap<u64, Vec<MTEquation>>> =
    LazyLock::new(|| (5..=30).map(|m| (m, mt_equations(m).unwrap())).collect());

/// Integer combinations of kernel characters, symplectic characters and epsilons.
pub fn constant_weight() -> impl Strategy<Value = AmFunction> {
    (5u64..=30).prop_flat_map(|m| {
        let k = KERNELS[&m].len();
        (
            Just(m),
            prop::collection::vec(-3i64..=3, k),
            prop::collection::vec((1..=(m - 1) / 2, 1..=(m - 1) / 2, -3i64..=3), 0..4),
            prop::collection::vec((1..m, -2i64..=2), 0..3),
        )
            .prop_map(|(m, ck, sym, eps)| {
                let mut f = AmFunction::zero(m);
                for (e, c) in KERNELS[&m].iter().zip(ck) {
                    f = f.add(&char_of_equation(e).to_am_function().scale(c));
                }
                for (j, l, c) in sym {
                    if j != l {
                        let e = MTEquation::symplectic(m, j, l).unwrap();
                        f = f.add(&char_of_equation(&e).to_am_function().scale(c));
                    }
                }
                for (k, c) in eps {
                    f = f.add(&epsilon(1, k as i64, m).unwrap().scale(c));
                }
                f
            })
    })
}

pub fn re_expands(f: &AmFunction) -> Result<(), TestCaseError> {
    let d = decompose_distribution(f).map_err(|e| TestCaseError::fail(e.to_string()))?;
    prop_assert_eq!(d.expand(), f.scale(2));
    Ok(())
}

pub fn twist_exponents(max: u64) -> Result<(), String> {
    for m in (3..=max).step_by(2) {
        for f in mt_equations(m).map_err(|e| e.to_string())? {
            if f.e_of_f().rem_euclid(m as i64) != 0 {
                return Err(format!("m = {m}: e({f}) != 0"));
            }
        }
    }
    Ok(())
}

pub fn square_classes_descend(max: u64) -> Result<(), String> {
    for m in 3..=max {
        for f in mt_equations(m).map_err(|e| e.to_string())? {
            let g = square_class(&f, CHECK_BITS).map_err(|e| format!("m = {m}, {f}: {e}"))?;
            if m % g.conductor() != 0 {
                return Err(format!("m = {m}, {f}: conductor {}", g.conductor()));
            }
        }
    }
    Ok(())
}

pub fn gauss_sum_magnitudes(cases: &[(u64, u64)]) -> Result<(), String> {
    for &(m, p) in cases {
        let ctx = GaussSumContext::new(m, p).map_err(|e| e.to_string())?;
        let q = CycloElement::from_int(ctx.q as i64);
        for a in 1..m as i64 {
            let g = ctx.gauss_sum(a);
            if g.mul(&g.conj()) != q {
                return Err(format!("m = {m}, p = {p}: |g({a})|^2 != q"));
            }
        }
        // G_j = q^{-w} g(j)^2 g(-2j) has |G_j|^2 = q^{3 - 2w}
        for (j, g) in base_gauss_sums(&ctx) {
            let w = FermatCharacter::gamma(j as i64, m).unwrap().weight(1);
            let e = 3 - 2 * i32::try_from(w.to_integer()).unwrap();
            let want = CycloElement::from_rational(&Rational::from_integer((ctx.q as i64).into()).pow(e));
            if g.mul(&g.conj()) != want {
                return Err(format!("m = {m}, p = {p}: |G_{j}|^2 != q^{e}"));
            }
        }
    }
    Ok(())
}

pub const GAUSS_CASES: [(u64, u64); 3] = [(5, 11), (7, 29), (15, 31)];
