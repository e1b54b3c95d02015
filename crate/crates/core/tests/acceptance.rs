//! One line per acceptance criterion. Set `FERMAT_ACCEPTANCE_STRICT=1` to turn
//! any FAIL into a nonzero exit status.

mod common;

use fermat_core::arith::{is_prime_power, omega, rat};
use fermat_core::arithmetic_verify::{
    base_gauss_sums, frobenius_value, gamma_product, gross_koblitz_check, GaussSumContext, GrossKoblitzOutcome,
};
use fermat_core::cyclotomic::{is_square_in_subfield, sqrt_of_positive_integer, CycloElement, SquareStatus};
use fermat_core::gamma_exact::{exact_sin_pi, numeric_eval, reduce_square, relatively_close, GammaMonomial};
use fermat_core::monodromy_field::{generator_monomial, report, square_class};
use fermat_core::mumford_tate::{build_E_matrix, mt_equations, MTEquation};
use fermat_core::sato_tate::{equation_lattice, identity_component, m15_reference_matrices, w2_classes, SatoTate};
use proptest::test_runner::{Config, TestRunner};
use std::time::{Duration, Instant};

struct Outcome {
    pass: bool,
    detail: String,
}

fn ok(detail: impl Into<String>) -> Outcome {
    Outcome { pass: true, detail: detail.into() }
}

fn fail(detail: impl Into<String>) -> Outcome {
    Outcome { pass: false, detail: detail.into() }
}

fn run(n: u32, title: &str, limit: Duration, f: impl FnOnce() -> Outcome) -> bool {
    let t = Instant::now();
    let mut o = f();
    let el = t.elapsed();
    if el > limit {
        o = fail(format!("{} (took {:.1?}, limit {:.0?})", o.detail, el, limit));
    }
    println!("criterion {n:>2} [{}] {title}: {} ({:.2?})", if o.pass { "PASS" } else { "FAIL" }, o.detail, el);
    o.pass
}

fn parse_all(m: u64, eqs: &[&str]) -> Vec<MTEquation> {
    eqs.iter().map(|s| MTEquation::parse(m, s).unwrap()).collect()
}

fn mt_check(m: u64, rank: usize, eqs: &[&str]) -> Outcome {
    let k = mt_equations(m).unwrap();
    let e = build_E_matrix(m);
    let outside: Vec<String> = parse_all(m, eqs).iter().filter(|f| !e.contains(f)).map(|f| f.to_string()).collect();
    if k.len() == rank && outside.is_empty() {
        ok(format!("rank {}, all {} listed equations in the kernel", k.len(), eqs.len()))
    } else {
        fail(format!("rank {} (want {rank}), outside the kernel: {outside:?}", k.len()))
    }
}

fn c1() -> Outcome {
    mt_check(
        15,
        9,
        &[
            "x_1*x_14/x_7/x_8",
            "x_2*x_13/x_7/x_8",
            "x_3*x_12/x_7/x_8",
            "x_4*x_11/x_7/x_8",
            "x_5*x_10/x_7/x_8",
            "x_6*x_9/x_7/x_8",
            "x_9*x_12/x_8/x_13",
            "x_11*x_12/x_9/x_14",
            "x_10*x_12/x_8/x_14",
        ],
    )
}

fn c2() -> Outcome {
    mt_check(10, 5, &["x_1/x_4", "x_2/x_3", "x_1*x_9/x_4/x_6", "x_2*x_8/x_4/x_6", "x_3*x_7/x_4/x_6"])
}

fn c3() -> Outcome {
    let mut bad = Vec::new();
    let mut ones = Vec::new();
    for m in (3..=105u64).step_by(2) {
        let r = report(m).unwrap().rank;
        let want = match (is_prime_power(m), omega(m)) {
            (true, _) => 0,
            (false, 2) => 1,
            _ => 3,
        };
        if r != want {
            bad.push(format!("m = {m}: r = {r}, want {want}"));
        }
        if r == 1 {
            ones.push(m);
        }
    }
    if bad.is_empty() {
        let (lo, hi) = (ones.first().copied().unwrap_or(0), ones.last().copied().unwrap_or(0));
        ok(format!("51 odd m; r = 1 at {} values ({lo} .. {hi}), r(105) = 3", ones.len()))
    } else {
        fail(bad.join("; "))
    }
}

fn c4() -> Outcome {
    let mut got = Vec::new();
    for (m, rank, degree) in [(20u64, 1usize, 16u128), (24, 1, 16), (60, 3, 128)] {
        let r = report(m).unwrap();
        got.push(format!("m = {m}: r = {}, [M:Q] = {}", r.rank, r.degree_over_q));
        if r.rank != rank || r.degree_over_q != degree {
            return fail(got.join("; "));
        }
    }
    ok(got.join("; "))
}

fn c5() -> Outcome {
    let f = MTEquation::parse(15, "x_10*x_12/x_8/x_14").unwrap();
    let g = square_class(&f, 400).unwrap();
    let s = |k: i64| exact_sin_pi(&rat(k, 15));
    let num = s(1).pow(3).unwrap().mul(&s(6));
    let den = s(2).mul(&s(3).pow(4).unwrap()).mul(&s(5).pow(3).unwrap());
    let closed = num.div(&den).unwrap().mul(&sqrt_of_positive_integer(5)).scale(&rat(3, 16));
    let near = relatively_close(&g.embed(400), &closed.embed(400), 200);
    let exact = g == closed;
    let z = numeric_eval(&generator_monomial(&f), 400);
    let numeric = relatively_close(&g.embed(400), &z.mul(&z), 200);
    let cert = matches!(is_square_in_subfield(&g, 15, 400).unwrap(), SquareStatus::CertifiedNonSquare(_));
    let d = format!("closed form exact {exact}, within 2^-200 {near}, matches Gamma numerics {numeric}, certified non-square {cert}");
    if exact && near && numeric && cert {
        ok(d)
    } else {
        fail(d)
    }
}

fn c6() -> Outcome {
    let mut bad = Vec::new();
    for m in [3u64, 5, 7, 9, 11, 13, 15, 4, 6, 8, 10] {
        let g = (m - 1) / 2;
        let sign = if g % 2 == 0 { 1 } else { -1 };
        let want = if m % 2 == 1 { rat(sign, (m * m * m) as i64) } else { rat(16 * sign, (m * m * m * m) as i64) };
        let r = reduce_square(&GammaMonomial::gamma_det(m)).unwrap();
        if r.value.as_rational() != Some(want) {
            bad.push(m);
        }
    }
    if bad.is_empty() {
        ok("11 moduli, all exact")
    } else {
        fail(format!("mismatch at m = {bad:?}"))
    }
}

fn c7() -> Outcome {
    let ctx = GaussSumContext::new(15, 31).unwrap();
    let g = base_gauss_sums(&ctx);
    let f = MTEquation::parse(15, "x_10*x_12/x_8/x_14").unwrap();
    let v = frobenius_value(&ctx, &f).unwrap();
    let mut symp = 0;
    for j in 1..=7 {
        for k in j + 1..=7 {
            let s = MTEquation::symplectic(15, j, k).unwrap();
            if frobenius_value(&ctx, &s).unwrap() != CycloElement::one() {
                return fail(format!("symplectic x_{j}x_{}/x_{k}x_{} is not 1", 15 - j, 15 - k));
            }
            symp += 1;
        }
    }
    let prod = g.iter().fold(CycloElement::one(), |acc, (_, x)| acc.mul(x));
    let d = format!("value {v}, {symp} symplectic equations give 1, prod G_j = {prod}");
    if v == CycloElement::from_int(-1) && prod.is_one() {
        ok(d)
    } else {
        fail(d)
    }
}

fn c8() -> Outcome {
    let mut lines = Vec::new();
    for (m, idx, p, n) in [(3u64, vec![1u64, 2], 7u64, 4u32), (5, vec![1, 4], 11, 3), (15, vec![10, 12, 7, 1], 31, 3)] {
        let t = Instant::now();
        let a = gamma_product(m, &idx).unwrap();
        let r = gross_koblitz_check(m, &a, p, n).unwrap();
        let el = t.elapsed();
        lines.push(format!("(m={m}, p={p}, N={n}) {:?} in {el:.1?}", r.outcome));
        if r.outcome != GrossKoblitzOutcome::Verified || el > Duration::from_secs(60) {
            return fail(lines.join("; "));
        }
    }
    ok(lines.join("; "))
}

fn c9() -> Outcome {
    let st = SatoTate::new(15).unwrap();
    let mut parts = Vec::new();
    let mut pass = true;
    let (order, exp) = (st.model.order(), st.model.exponent());
    pass &= order == 16 && exp == 8;
    parts.push(format!("order {order}, exponent {exp}"));

    let row = |ex: &[(usize, i64)]| {
        let mut r = vec![0i64; 14];
        for &(j, e) in ex {
            r[j - 1] += e;
        }
        r
    };
    let mut listed: Vec<Vec<i64>> = (1..=7).map(|j| row(&[(j, 1), (15 - j, 1)])).collect();
    listed.push(row(&[(5, 1), (3, -1), (4, -1), (13, -1)]));
    listed.push(row(&[(6, 1), (3, -1), (4, -1), (14, -1)]));
    listed.push(row(&[(7, 1), (3, -2), (4, -1), (13, -1), (14, -1)]));
    let same = identity_component(15).unwrap().lattice == equation_lattice(&listed);
    pass &= same;
    parts.push(format!("identity-component lattice equals the ten equations: {same}"));

    let basis = w2_classes(15);
    st.precompute(&basis).unwrap();
    let els = st.model.elements().to_vec();
    let mats: Vec<_> = els.iter().map(|t| st.rho_on(t, &basis).unwrap()).collect();
    let mut hom = 0;
    for (i, a) in els.iter().enumerate() {
        for (j, b) in els.iter().enumerate() {
            let ab = st.model.index(&st.model.compose(a, b).unwrap()).unwrap();
            hom += st.multiply(&mats[i], &mats[j]).unwrap().same_action(&mats[ab]) as usize;
        }
    }
    let kernel: Vec<String> = els.iter().zip(&mats).filter(|(_, r)| r.is_identity()).map(|(t, _)| t.to_string()).collect();
    let faithful = kernel == [st.model.identity().to_string()];
    pass &= hom == els.len() * els.len() && faithful;
    parts.push(format!("rho homomorphism on {hom}/{} pairs, identity only at {kernel:?}", els.len() * els.len()));

    for rm in m15_reference_matrices() {
        let (lit, cor) = (rm.matrix().unwrap(), rm.corrected().unwrap());
        let hits = |h: &Vec<Vec<CycloElement>>| -> Vec<String> {
            els.iter().filter(|t| st.component_membership(h, t).unwrap()).map(|t| t.to_string()).collect()
        };
        let (a, b) = (hits(&lit), hits(&cor));
        pass &= a.len() == 1;
        parts.push(format!(
            "{} as listed: member of {} components{}; with columns {:?} inverted: {b:?}",
            rm.name,
            a.len(),
            if a.is_empty() { String::new() } else { format!(" {a:?}") },
            rm.reciprocal_fix
        ));
    }
    Outcome { pass, detail: parts.join("; ") }
}

fn c10() -> Outcome {
    let cfg = |cases| Config { cases, failure_persistence: None, ..Config::default() };
    let mut parts = Vec::new();
    let mut r = TestRunner::new(cfg(10_000));
    if let Err(e) = r.run(&(common::cyclo(), common::cyclo(), common::cyclo()), |(a, b, c)| common::field_axioms(&a, &b, &c)) {
        return fail(format!("field axioms: {e}"));
    }
    let mut r = TestRunner::new(cfg(10_000));
    let s = (common::cyclo(), common::cyclo(), common::unit(), common::unit());
    if let Err(e) = r.run(&s, |(a, b, u, v)| common::galois_composition(&a, &b, u, v)) {
        return fail(format!("Galois composition: {e}"));
    }
    parts.push("field axioms and Galois composition on 10^4 cases".to_string());
    let mut r = TestRunner::new(cfg(1_000));
    if let Err(e) = r.run(&common::constant_weight(), |f| common::re_expands(&f)) {
        return fail(format!("decompositions: {e}"));
    }
    parts.push("10^3 decompositions re-expand".to_string());
    for (name, res) in [
        ("e(f) = 0 mod m, odd m <= 45", common::twist_exponents(45)),
        ("square classes in Q(zeta_m), m <= 60", common::square_classes_descend(60)),
        ("|g|^2 = q", common::gauss_sum_magnitudes(&common::GAUSS_CASES)),
    ] {
        if let Err(e) = res {
            return fail(format!("{name}: {e}"));
        }
        parts.push(name.to_string());
    }
    ok(parts.join("; "))
}

fn main() {
    let s = Duration::from_secs;
    let results = [
        run(1, "MT equations m = 15", s(1), c1),
        run(2, "MT equations m = 10", s(1), c2),
        run(3, "monodromy rank table, odd m <= 105", s(600), c3),
        run(4, "even-m monodromy ranks", s(300), c4),
        run(5, "m = 15 quadratic generator", s(10), c5),
        run(6, "determinant character", s(5), c6),
        run(7, "Frobenius test m = 15, p = 31", s(30), c7),
        run(8, "Gross-Koblitz", s(180), c8),
        run(9, "Sato-Tate m = 15", s(300), c9),
        run(10, "property suites", s(1800), c10),
    ];
    let failed: Vec<usize> = results.iter().enumerate().filter(|(_, p)| !**p).map(|(i, _)| i + 1).collect();
    println!("acceptance: {}/{} criteria pass; failing: {:?}", results.len() - failed.len(), results.len(), failed);
    if !failed.is_empty() && std::env::var("FERMAT_ACCEPTANCE_STRICT").is_ok_and(|v| v == "1") {
        std::process::exit(1);
    }
}
