use crate::{Cli, Command, DecomposeArgs, Format, GrossKoblitzArgs, MArgs, SatoTateArgs, TableArgs};
use fermat_core::arith::{fmt_rat, is_prime_power, omega};
use fermat_core::arithmetic_verify::{frobenius_report, gamma_product, gross_koblitz_check, GaussSumContext};
use fermat_core::characters::{char_of_equation, decompose_distribution, AmFunction};
use fermat_core::error::Error;
use fermat_core::monodromy_field::{report_with, Budget};
use fermat_core::mumford_tate::{build_E_matrix, decompose, mt_equations, MTEquation};
use fermat_core::sato_tate::{
    beta_of_equation, identity_component, m15_reference_matrices, polarization, tate_class_orbits, w2_classes,
    GaloisElement, SatoTate,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Value};
use std::fmt::Write;

pub struct Report {
    pub json: Value,
    pub text: String,
}

impl Report {
    fn new(data: impl Serialize, text: String) -> Self {
        Report { json: serde_json::to_value(data).expect("reports serialize"), text }
    }

    /// Keys come out sorted: `serde_json::Map` is a `BTreeMap`.
    pub fn render(&self, f: Format) -> String {
        match f {
            Format::Json => serde_json::to_string_pretty(&self.json).expect("json") + "\n",
            Format::Text => self.text.clone(),
        }
    }
}

pub fn run(cli: &Cli) -> Result<Report, Error> {
    let g = &cli.global;
    let budget = Budget { primes: g.budget_primes as usize, bits: g.bits, conductor: g.budget_conductor };
    match &cli.command {
        Command::Decompose(a) => run_decompose(a),
        Command::MtEquations(a) => run_mt(a),
        Command::MonodromyField(a) => {
            let r = report_with(a.m, budget)?;
            let mut t = format!("m = {}: rank {}, [M:Q] = {}\n", r.m, r.rank, r.degree_over_q);
            for gen in &r.generators {
                let s = match gen.squareness.is_square() {
                    Some(true) => "square in Q(zeta_m)",
                    Some(false) => "non-square",
                    None => "undecided",
                };
                writeln!(t, "  {}: {s}", gen.equation).unwrap();
            }
            Ok(Report::new(&r, t))
        }
        Command::Table(a) => run_table(a, budget),
        Command::VerifyFrobenius(a) => {
            let ctx = GaussSumContext::new(a.m, a.p)?;
            let f = MTEquation::parse(a.m, &a.equation)?;
            let r = frobenius_report(&ctx, &f)?;
            let v = r.value.as_rational().map(|x| fmt_rat(&x)).unwrap_or_else(|| r.value.to_string());
            let t = format!("m = {}, p = {}, q = {}: {} -> {v}\n", r.m, r.p, r.q, r.equation);
            Ok(Report::new(&r, t))
        }
        Command::GrossKoblitz(a) => run_gross_koblitz(a),
        Command::SatoTate(a) => run_sato_tate(a),
        Command::Polarization(a) => {
            let p = polarization(a.m)?;
            let mut t = String::new();
            for (i, j, v) in &p.entries {
                writeln!(t, "<omega_{i}, omega_{j}> = {v}").unwrap();
            }
            Ok(Report::new(&p, t))
        }
    }
}

fn run_decompose(a: &DecomposeArgs) -> Result<Report, Error> {
    let f = if let Some(v) = &a.function {
        if v.len() as u64 != a.m {
            return Err(Error::ShapeMismatch(format!("expected {} values, got {}", a.m, v.len())));
        }
        AmFunction::from_values(a.m, v.clone())
    } else if a.random {
        random_constant_weight(a.m, a.seed)?
    } else {
        let r = decompose(a.m)?;
        let mut t = format!("J_{} (genus {}):\n", r.m, r.genus);
        for c in &r.factors {
            writeln!(t, "  {}", serde_json::to_string(c).expect("json")).unwrap();
        }
        writeln!(t, "End field: {}", r.endo_field).unwrap();
        return Ok(Report::new(&r, t));
    };
    let d = decompose_distribution(&f)?;
    let terms: Vec<String> = d.terms.iter().map(|(ix, c)| format!("{c} eps({}, {}/{})", ix.d, ix.k, a.m)).collect();
    let t = format!("2f = {}\n", if terms.is_empty() { "0".into() } else { terms.join(" + ") });
    let body = json!({
        "m": a.m,
        "function": f.values(),
        "terms": d.terms.iter().map(|(ix, c)| json!({"d": ix.d, "k": ix.k, "coefficient": c})).collect::<Vec<_>>(),
    });
    Ok(Report::new(body, t))
}

/// A random integer combination of symplectic and kernel-equation characters.
fn random_constant_weight(m: u64, seed: u64) -> Result<AmFunction, Error> {
    if m < 5 {
        return Err(Error::BadModulus(m));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut gens: Vec<MTEquation> = if m % 2 == 1 { mt_equations(m)? } else { Vec::new() };
    let half = (m - 1) / 2;
    for _ in 0..3 {
        let j = rng.gen_range(1..=half);
        let k = rng.gen_range(1..=half);
        if j != k {
            gens.push(MTEquation::symplectic(m, j, k)?);
        }
    }
    let mut f = AmFunction::zero(m);
    for e in gens {
        let c: i64 = rng.gen_range(-3..=3);
        f = f.add(&char_of_equation(&e).to_am_function().scale(c));
    }
    Ok(f)
}

fn run_mt(a: &MArgs) -> Result<Report, Error> {
    let eqs = mt_equations(a.m)?;
    let strs: Vec<String> = eqs.iter().map(|f| f.to_string()).collect();
    let mut t = format!("m = {}: {} equations\n", a.m, eqs.len());
    for s in &strs {
        writeln!(t, "  {s}").unwrap();
    }
    let mut body = json!({ "m": a.m, "rank": eqs.len(), "equations": strs });
    if let Some(s) = &a.equation {
        let f = MTEquation::parse(a.m, s)?;
        let inside = build_E_matrix(a.m).contains(&f);
        writeln!(t, "{f} {} the kernel", if inside { "lies in" } else { "is not in" }).unwrap();
        body["contains"] = json!({ "equation": f.to_string(), "in_kernel": inside });
    }
    Ok(Report::new(body, t))
}

fn run_table(a: &TableArgs, budget: Budget) -> Result<Report, Error> {
    let ms: Vec<u64> = (a.min.max(3)..=a.max).filter(|m| !a.odd || m % 2 == 1).collect();
    let rows = ms
        .par_iter()
        .map(|&m| {
            let r = report_with(m, budget)?;
            eprintln!("m = {m}: rank {}", r.rank);
            Ok(json!({
                "m": m,
                "rank": r.rank,
                "degree_over_Q": r.degree_over_q as u64,
                "omega": omega(m),
                "prime_power": is_prime_power(m),
            }))
        })
        .collect::<Result<Vec<Value>, Error>>()?;
    let mut t = String::from("   m  omega  r  [M:Q]\n");
    for r in &rows {
        let n = |k: &str| r[k].as_u64().unwrap_or(0);
        writeln!(t, "{:>4}  {:>5}  {}  {}", n("m"), n("omega"), n("rank"), n("degree_over_Q")).unwrap();
    }
    Ok(Report::new(json!({ "odd_only": a.odd, "rows": rows }), t))
}

fn run_gross_koblitz(a: &GrossKoblitzArgs) -> Result<Report, Error> {
    let indices = match (&a.gamma, &a.equation) {
        (Some(g), _) => g.clone(),
        (None, Some(s)) => beta_of_equation(&MTEquation::parse(a.m, s)?),
        (None, None) => unreachable!("clap requires one of --gamma, --equation"),
    };
    let alpha = gamma_product(a.m, &indices)?;
    let r = gross_koblitz_check(a.m, &alpha, a.p, a.padic_precision)?;
    let t = format!(
        "alpha = {}, p = {}, N = {}, Frobenius power {}: {}\n",
        r.alpha,
        r.p,
        r.precision,
        r.frobenius_power,
        serde_json::to_value(&r.outcome).expect("json")["verdict"].as_str().unwrap_or("?")
    );
    Ok(Report::new(&r, t))
}

fn run_sato_tate(a: &SatoTateArgs) -> Result<Report, Error> {
    let st = SatoTate::new(a.m)?;
    let orbits = tate_class_orbits(a.m)?;
    let ic = identity_component(a.m)?;
    let mut t = format!(
        "m = {}: component group of order {}, exponent {}, {}\n",
        a.m,
        st.model.order(),
        st.model.exponent(),
        if st.model.is_abelian() { "abelian" } else { "non-abelian" }
    );
    writeln!(t, "identity component: {} equations, lattice rank {}", ic.equations.len(), ic.lattice.len()).unwrap();
    for o in &orbits.orbits {
        writeln!(t, "orbit of {:?}: {} classes", o.representative, o.members.len()).unwrap();
    }
    let mut body = json!({
        "m": a.m,
        "group": &st.model,
        "tate_classes": &orbits,
        "identity_component": &ic,
    });
    if let Some(s) = &a.element {
        let el: GaloisElement = s.parse()?;
        let rho = st.rho_on(&el, &w2_classes(a.m))?;
        writeln!(t, "rho({el}) on {} classes: identity = {}", rho.basis.len(), rho.is_identity()).unwrap();
        body["rho"] = serde_json::to_value(&rho).expect("json");
    }
    if a.reference {
        if a.m != 15 {
            return Err(Error::BadModulus(a.m));
        }
        let mut out = Vec::new();
        for rm in m15_reference_matrices() {
            let (lit, cor) = (rm.matrix()?, rm.corrected()?);
            let mut hits = (Vec::new(), Vec::new());
            for el in st.model.elements() {
                if st.component_membership(&lit, el)? {
                    hits.0.push(el.to_string());
                }
                if st.component_membership(&cor, el)? {
                    hits.1.push(el.to_string());
                }
            }
            writeln!(t, "{}: literal in {:?}, with reciprocal columns {:?} in {:?}", rm.name, hits.0, rm.reciprocal_fix, hits.1)
                .unwrap();
            out.push(json!({
                "name": rm.name,
                "literal_components": hits.0,
                "reciprocal_columns": rm.reciprocal_fix,
                "corrected_components": hits.1,
            }));
        }
        body["reference"] = Value::Array(out);
    }
    Ok(Report::new(body, t))
}
