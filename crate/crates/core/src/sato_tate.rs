//! Sato-Tate data of `J_m` for odd `m`: Tate-class orbits on `W_{<=2}`,
//! period values `P(gamma, omega_beta)`, the Galois action on Tate classes,
//! the component group, and membership of generalized permutation matrices
//! in a given component.
//!
//! A Tate class of degree `q` is indexed by `beta = (i_1, ..., i_2q)`, the
//! character `gamma_{i_1} * ... * gamma_{i_2q}`. The equation
//! `x_a x_b / x_c x_d` corresponds to `beta = (a, b, m - c, m - d)`.

use crate::arith::{gcd, inv_mod, lcm, rat, units, Rational};
use crate::characters::FermatCharacter;
use crate::cyclotomic::{sqrt_in_conductor, sqrt_of_positive_integer, CycloElement};
use crate::error::{Error, Result};
use crate::numeric::ComplexApprox;
use crate::gamma_exact::{numeric_eval, reduce_square, ExactAlgebraic, GammaMonomial, CHECK_BITS};
use crate::linalg::row_hnf;
use crate::monodromy_field;
use crate::mumford_tate::{mt_equations, variable_indices, MTEquation};
use num_bigint::BigInt;
use num_traits::{One, Zero};
use rayon::prelude::*;
use serde::Serialize;
use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::sync::Mutex;

/// Sorted multiset of `gamma` indices.
pub type Beta = Vec<u64>;

fn require_odd(m: u64) -> Result<()> {
    if m < 3 {
        return Err(Error::BadModulus(m));
    }
    if m % 2 == 0 {
        return Err(Error::EvenModulus(m));
    }
    Ok(())
}

fn sorted(mut b: Beta) -> Beta {
    b.sort_unstable();
    b
}

/// `u * beta`, sorted.
pub fn scale_beta(beta: &[u64], u: u64, m: u64) -> Beta {
    sorted(beta.iter().map(|&i| i * (u % m) % m).collect())
}

/// `-beta`.
pub fn neg_beta(beta: &[u64], m: u64) -> Beta {
    sorted(beta.iter().map(|&i| m - i).collect())
}

/// `mu_beta = prod_r (m - 2 i_r) / m`.
pub fn mu(beta: &[u64], m: u64) -> Rational {
    beta.iter().fold(Rational::one(), |acc, &i| acc * rat(m as i64 - 2 * i as i64, m as i64))
}

pub fn beta_character(beta: &[u64], m: u64) -> Result<FermatCharacter> {
    let mut entries = Vec::with_capacity(3 * beta.len());
    for &i in beta {
        let c = FermatCharacter::gamma(i as i64, m)?;
        entries.extend(c.entries().iter().map(|&a| a as i64));
    }
    FermatCharacter::new(m, &entries)
}

/// The `beta` of an equation: positive exponents give `j`, negative ones `m - j`.
pub fn beta_of_equation(f: &MTEquation) -> Beta {
    let m = f.m();
    let mut pos = Vec::new();
    let mut neg = Vec::new();
    for (&j, &e) in f.exponents() {
        let (list, idx) = if e > 0 { (&mut pos, j) } else { (&mut neg, m - j) };
        for _ in 0..e.unsigned_abs() {
            list.push(idx);
        }
    }
    pos.extend(neg);
    pos
}

// ---------------------------------------------------------------- orbits

#[derive(Clone, Debug, Serialize)]
pub struct OrbitMember {
    pub beta: Beta,
    pub mu: String,
}

#[derive(Clone, Debug, Serialize)]
pub struct TateOrbit {
    pub equation: String,
    /// In equation order: positive indices, then `m - j` for the negative ones.
    pub representative: Beta,
    pub members: Vec<OrbitMember>,
}

#[derive(Clone, Debug, Serialize)]
pub struct TateClassOrbits {
    pub m: u64,
    /// Largest positive-exponent sum over the kernel basis.
    pub q: i64,
    /// Orbits of `i -> u i` on the endomorphism classes `omega_i (x) omega_i^v`.
    pub w1: Vec<Vec<u64>>,
    pub orbits: Vec<TateOrbit>,
}

/// Whether `f` is `x_i x_{m-i} / x_j x_{m-j}`.
fn is_symplectic(f: &MTEquation) -> bool {
    let m = f.m();
    f.exponents().iter().all(|(&j, &e)| f.exponent(m - j) == e)
}

pub fn orbit_of(beta: &[u64], m: u64) -> Vec<Beta> {
    let set: BTreeSet<Beta> = units(m).into_iter().map(|u| scale_beta(beta, u, m)).collect();
    set.into_iter().collect()
}

pub fn tate_class_orbits(m: u64) -> Result<TateClassOrbits> {
    require_odd(m)?;
    let eqs = mt_equations(m)?;
    let q = eqs.iter().map(|f| f.q()).max().unwrap_or(0);
    if q > 2 {
        eprintln!("warning: m = {m} needs Tate classes of degree {q}; orbit sizes grow accordingly");
    }
    let mut seen = BTreeSet::new();
    let mut orbits = Vec::new();
    for f in eqs.iter().filter(|f| !is_symplectic(f)) {
        let rep = beta_of_equation(f);
        let members = orbit_of(&rep, m);
        if !seen.insert(members[0].clone()) {
            continue;
        }
        orbits.push(TateOrbit {
            equation: f.to_string(),
            representative: rep,
            members: members
                .into_iter()
                .map(|b| OrbitMember { mu: crate::arith::fmt_rat(&mu(&b, m)), beta: b })
                .collect(),
        });
    }
    let mut w1: Vec<Vec<u64>> = Vec::new();
    let mut done = BTreeSet::new();
    for i in 1..m {
        if done.contains(&i) {
            continue;
        }
        let o: BTreeSet<u64> = units(m).into_iter().map(|u| u * i % m).collect();
        done.extend(o.iter().copied());
        w1.push(o.into_iter().collect());
    }
    Ok(TateClassOrbits { m, q, w1, orbits })
}

/// Every degree-2 Tate class `beta = (i_1 <= i_2 <= i_3 <= i_4)`.
pub fn w2_classes(m: u64) -> Vec<Beta> {
    let mut out = Vec::new();
    for a in 1..m {
        for b in a..m {
            for c in b..m {
                for d in c..m {
                    if (a + b + c + d) % m != 0 {
                        continue;
                    }
                    let beta = vec![a, b, c, d];
                    if beta_character(&beta, m).is_ok_and(|ch| ch.membership().in_b) {
                        out.push(beta);
                    }
                }
            }
        }
    }
    out
}

// ---------------------------------------------------------------- the field Q(eps)

/// `c * w_S` with `c` in `K = Q(zeta_m)` and `w_S = prod_{i in S} w_i`,
/// `w_i^2 = g_i`. `S` is a bit mask over the witnesses.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Monomial {
    pub coefficient: CycloElement,
    pub support: u32,
}

impl Monomial {
    pub fn scalar(c: CycloElement) -> Self {
        Monomial { coefficient: c, support: 0 }
    }

    pub fn is_one(&self) -> bool {
        self.support == 0 && self.coefficient.is_one()
    }

    fn indices(&self) -> Vec<usize> {
        (0..32).filter(|i| self.support >> i & 1 == 1).collect()
    }
}

impl Serialize for Monomial {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        use serde::ser::SerializeStruct;
        let mut st = s.serialize_struct("Monomial", 2)?;
        st.serialize_field("coefficient", &self.coefficient)?;
        st.serialize_field("witnesses", &self.indices())?;
        st.end()
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Witness {
    pub equation: MTEquation,
    /// `g = Gamma(f)^2` in `K`; the witness is `w = Gamma(f)` under the fixed embedding.
    pub square: CycloElement,
    #[serde(skip)]
    pub numeric: ComplexApprox,
}

/// An element of `Gal(Q(eps)/Q)`: `zeta_m -> zeta_m^u` and
/// `w_i -> sign_i c_{u,i} w_{S(u,i)}` where `sigma_u(g_i) = c_{u,i}^2 g_{S(u,i)}`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct GaloisElement {
    pub u: u64,
    pub signs: Vec<i8>,
}

impl fmt::Display for GaloisElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s: String = self.signs.iter().map(|&x| if x > 0 { '+' } else { '-' }).collect();
        if s.is_empty() {
            write!(f, "u={}", self.u)
        } else {
            write!(f, "u={},{s}", self.u)
        }
    }
}

impl std::str::FromStr for GaloisElement {
    type Err = Error;
    /// `8` or `8,+-`.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim().trim_start_matches("u=");
        let (u, signs) = s.split_once(',').unwrap_or((s, ""));
        let u = u.trim().parse().map_err(|_| Error::Parse(format!("bad class {s:?}")))?;
        let signs = signs
            .trim()
            .chars()
            .map(|c| match c {
                '+' => Ok(1),
                '-' => Ok(-1),
                _ => Err(Error::Parse(format!("bad sign {c:?} in {s:?}"))),
            })
            .collect::<Result<_>>()?;
        Ok(GaloisElement { u, signs })
    }
}

/// `Q(eps) = K(w_1, ..., w_r)` with `Gal(Q(eps)/Q)` as an explicit group.
#[derive(Clone, Debug)]
pub struct EpsilonFieldModel {
    pub m: u64,
    pub witnesses: Vec<Witness>,
    /// `(u, i) -> (c_{u,i}, S(u,i))`.
    conjugates: BTreeMap<(u64, usize), Monomial>,
    elements: Vec<GaloisElement>,
    table: HashMap<(usize, usize), usize>,
}

fn rank_mask(r: usize) -> std::ops::Range<u32> {
    0..(1u32 << r)
}

fn square_product(ws: &[Witness], mask: u32, m: u64) -> CycloElement {
    (0..ws.len())
        .filter(|i| mask >> i & 1 == 1)
        .fold(CycloElement::one().lift(m), |acc, i| acc.mul(&ws[i].square))
}

/// `x = c^2 g_S` with `c` in `K`, if any.
fn split_square(ws: &[Witness], x: &CycloElement, m: u64) -> Result<Option<Monomial>> {
    for mask in rank_mask(ws.len()) {
        let y = x.div(&square_product(ws, mask, m))?.lift(m);
        if let Some(c) = sqrt_in_conductor(&y, CHECK_BITS) {
            return Ok(Some(Monomial { coefficient: c.change_conductor(m).unwrap_or(c).minimal(), support: mask }));
        }
    }
    Ok(None)
}

pub fn epsilon_field_model(m: u64) -> Result<EpsilonFieldModel> {
    require_odd(m)?;
    let report = monodromy_field::report(m)?;
    let mut witnesses: Vec<Witness> = Vec::new();
    for g in &report.generators {
        if g.squareness.is_square() != Some(false) {
            continue;
        }
        let sq = g.square_class.lift(m);
        if split_square(&witnesses, &sq, m)?.is_some() {
            continue;
        }
        let numeric = numeric_eval(&monodromy_field::generator_monomial(&g.equation), CHECK_BITS);
        witnesses.push(Witness { equation: g.equation.clone(), square: sq, numeric });
    }
    if witnesses.len() != report.rank {
        return Err(Error::WitnessNotFound(m));
    }
    let mut conjugates = BTreeMap::new();
    for u in units(m) {
        for (i, w) in witnesses.iter().enumerate() {
            let image = w.square.galois(u as i64)?;
            let c = split_square(&witnesses, &image, m)?.ok_or(Error::DescentFailure(m))?;
            conjugates.insert((u, i), c);
        }
    }
    let r = witnesses.len();
    let mut elements = Vec::new();
    for u in units(m) {
        for mask in rank_mask(r) {
            let signs = (0..r).map(|i| if mask >> i & 1 == 1 { -1 } else { 1 }).collect();
            elements.push(GaloisElement { u, signs });
        }
    }
    elements.sort();
    let mut model = EpsilonFieldModel { m, witnesses, conjugates, elements, table: HashMap::new() };
    model.fill_table()?;
    Ok(model)
}

impl EpsilonFieldModel {
    pub fn rank(&self) -> usize {
        self.witnesses.len()
    }

    pub fn elements(&self) -> &[GaloisElement] {
        &self.elements
    }

    pub fn order(&self) -> usize {
        self.elements.len()
    }

    pub fn identity(&self) -> GaloisElement {
        GaloisElement { u: 1, signs: vec![1; self.rank()] }
    }

    pub fn index(&self, t: &GaloisElement) -> Result<usize> {
        self.elements.binary_search(t).map_err(|_| Error::Parse(format!("{t} is not an element for m = {}", self.m)))
    }

    /// `w_S`-product of monomials: `(a w_S)(b w_T) = a b g_{S cap T} w_{S xor T}`.
    pub fn mul(&self, a: &Monomial, b: &Monomial) -> Monomial {
        let g = square_product(&self.witnesses, a.support & b.support, self.m);
        Monomial {
            coefficient: a.coefficient.mul(&b.coefficient).mul(&g).lift(self.m).minimal(),
            support: a.support ^ b.support,
        }
    }

    pub fn inv(&self, a: &Monomial) -> Result<Monomial> {
        let g = square_product(&self.witnesses, a.support, self.m);
        Ok(Monomial { coefficient: a.coefficient.mul(&g).inv()?.lift(self.m).minimal(), support: a.support })
    }

    /// Image of `w_i` under `t`.
    fn image_of_witness(&self, t: &GaloisElement, i: usize) -> Monomial {
        let c = &self.conjugates[&(t.u, i)];
        if t.signs[i] > 0 {
            c.clone()
        } else {
            Monomial { coefficient: c.coefficient.neg(), support: c.support }
        }
    }

    pub fn apply(&self, t: &GaloisElement, a: &Monomial) -> Result<Monomial> {
        let mut out = Monomial::scalar(a.coefficient.galois(t.u as i64)?.lift(self.m));
        for i in a.indices() {
            out = self.mul(&out, &self.image_of_witness(t, i));
        }
        Ok(out)
    }

    /// `s o t`.
    fn compose_direct(&self, s: &GaloisElement, t: &GaloisElement) -> Result<GaloisElement> {
        let u = s.u * t.u % self.m;
        let mut signs = Vec::with_capacity(self.rank());
        for i in 0..self.rank() {
            let img = self.apply(s, &self.image_of_witness(t, i))?;
            let base = &self.conjugates[&(u, i)];
            if img.support != base.support {
                return Err(Error::DescentFailure(self.m));
            }
            if img.coefficient == base.coefficient {
                signs.push(1);
            } else if img.coefficient == base.coefficient.neg() {
                signs.push(-1);
            } else {
                return Err(Error::DescentFailure(self.m));
            }
        }
        Ok(GaloisElement { u, signs })
    }

    fn fill_table(&mut self) -> Result<()> {
        let n = self.order();
        let pairs: Vec<(usize, usize)> = (0..n).flat_map(|a| (0..n).map(move |b| (a, b))).collect();
        let products = pairs
            .par_iter()
            .map(|&(a, b)| {
                let c = self.compose_direct(&self.elements[a], &self.elements[b])?;
                Ok(((a, b), self.index(&c)?))
            })
            .collect::<Result<Vec<_>>>()?;
        self.table = products.into_iter().collect();
        Ok(())
    }

    pub fn compose(&self, s: &GaloisElement, t: &GaloisElement) -> Result<GaloisElement> {
        Ok(self.elements[self.table[&(self.index(s)?, self.index(t)?)]].clone())
    }

    pub fn element_order(&self, t: &GaloisElement) -> usize {
        let id = self.index(&self.identity()).expect("identity");
        let a = self.index(t).expect("element of the group");
        let (mut x, mut k) = (a, 1);
        while x != id {
            x = self.table[&(a, x)];
            k += 1;
        }
        k
    }

    pub fn exponent(&self) -> u64 {
        self.elements.iter().fold(1, |acc, t| lcm(acc, self.element_order(t) as u64))
    }

    pub fn is_abelian(&self) -> bool {
        self.table.iter().all(|(&(a, b), &c)| self.table[&(b, a)] == c)
    }

    /// Invariant factors `d_1 | d_2 | ...` when the group is abelian.
    pub fn abelian_invariants(&self) -> Option<Vec<u64>> {
        if !self.is_abelian() {
            return None;
        }
        let orders: Vec<u64> = self.elements.iter().map(|t| self.element_order(t) as u64).collect();
        let count = |d: u64| orders.iter().filter(|&&o| d % o == 0).count() as u64;
        let mut per_prime: Vec<Vec<u64>> = Vec::new();
        for (p, _) in crate::arith::factor(self.order() as u64) {
            // ranks[k] = number of cyclic p-factors of order > p^k
            let mut ranks = Vec::new();
            let (mut prev, mut pk) = (1u64, p);
            loop {
                let c = count(pk);
                if c == prev {
                    break;
                }
                ranks.push((c / prev).ilog(p) as usize);
                prev = c;
                pk *= p;
            }
            let mut f = Vec::new();
            for k in 0..ranks.len() {
                let exact = ranks[k] - ranks.get(k + 1).copied().unwrap_or(0);
                f.extend(std::iter::repeat(p.pow(k as u32 + 1)).take(exact));
            }
            f.sort_unstable_by(|a, b| b.cmp(a));
            per_prime.push(f);
        }
        let width = per_prime.iter().map(Vec::len).max().unwrap_or(0);
        let mut inv = vec![1u64; width];
        for f in per_prime {
            for (slot, x) in inv.iter_mut().zip(f) {
                *slot *= x;
            }
        }
        inv.reverse();
        Some(inv)
    }

    /// A generating set, chosen greedily by largest order.
    pub fn generators(&self) -> Vec<GaloisElement> {
        let id = self.index(&self.identity()).expect("identity");
        let mut span: BTreeSet<usize> = BTreeSet::from([id]);
        let mut gens: Vec<usize> = Vec::new();
        while span.len() < self.order() {
            let g = (0..self.order())
                .filter(|x| !span.contains(x))
                .max_by_key(|&x| (self.element_order(&self.elements[x]), std::cmp::Reverse(x)))
                .expect("group not yet spanned");
            gens.push(g);
            let mut frontier: Vec<usize> = span.iter().copied().collect();
            while let Some(x) = frontier.pop() {
                for &h in &gens {
                    let y = self.table[&(x, h)];
                    if span.insert(y) {
                        frontier.push(y);
                    }
                }
            }
        }
        gens.into_iter().map(|g| self.elements[g].clone()).collect()
    }

    /// Complex value of `c w_S` under the fixed embedding `w_i -> Gamma(f_i)`.
    pub fn embed(&self, a: &Monomial) -> ComplexApprox {
        a.indices().into_iter().fold(a.coefficient.embed(CHECK_BITS), |acc, i| acc.mul(&self.witnesses[i].numeric))
    }
}

impl Serialize for EpsilonFieldModel {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        use serde::ser::SerializeStruct;
        let mut st = s.serialize_struct("EpsilonFieldModel", 8)?;
        st.serialize_field("m", &self.m)?;
        st.serialize_field("rank", &self.rank())?;
        st.serialize_field("witnesses", &self.witnesses)?;
        st.serialize_field("order", &self.order())?;
        st.serialize_field("exponent", &self.exponent())?;
        st.serialize_field("abelian", &self.is_abelian())?;
        st.serialize_field("abelian_invariants", &self.abelian_invariants())?;
        let gens: Vec<String> = self.generators().iter().map(|g| g.to_string()).collect();
        st.serialize_field("generators", &gens)?;
        st.end()
    }
}

// ---------------------------------------------------------------- periods

/// `P(gamma, omega_beta) = c w_S` with `P^2` exact and the sign of the complex value.
#[derive(Clone, Debug, Serialize)]
pub struct PValue {
    pub beta: Beta,
    pub mu: String,
    pub square: ExactAlgebraic,
    pub value: Monomial,
}

/// `P^2` by exact Gamma reduction, split as `c^2 g_S`, with the sign of `c`
/// fixed by the numeric value.
pub fn p_value(model: &EpsilonFieldModel, beta: &[u64]) -> Result<PValue> {
    let m = model.m;
    let gm = GammaMonomial::p_value(&beta_character(beta, m)?)?;
    let square = reduce_square(&gm)?;
    let root = split_square(&model.witnesses, &square.value.lift(m), m)?.ok_or(Error::WitnessNotFound(m))?;
    let z = numeric_eval(&gm, CHECK_BITS);
    let value = if close(&model.embed(&root), &z) {
        root
    } else {
        let flipped = Monomial { coefficient: root.coefficient.neg(), support: root.support };
        if !close(&model.embed(&flipped), &z) {
            return Err(Error::NumericMismatch(format!("P of {beta:?}")));
        }
        flipped
    };
    Ok(PValue { beta: beta.to_vec(), mu: crate::arith::fmt_rat(&mu(beta, m)), square, value })
}

fn close(a: &ComplexApprox, b: &ComplexApprox) -> bool {
    crate::gamma_exact::relatively_close(a, b, CHECK_BITS / 2)
}

// ---------------------------------------------------------------- Galois action

/// Period values, computed on demand and shared across threads.
pub struct SatoTate {
    pub model: EpsilonFieldModel,
    periods: Mutex<HashMap<Beta, PValue>>,
}

#[derive(Clone, Debug, Serialize)]
pub struct MatrixEntry {
    pub row: Beta,
    pub column: Beta,
    pub value: Monomial,
}

#[derive(Clone, Debug, Serialize)]
pub struct GaloisActionMatrix {
    pub m: u64,
    pub element: GaloisElement,
    pub basis: Vec<Beta>,
    /// Nonzero entries only, by column.
    pub entries: Vec<MatrixEntry>,
}

impl GaloisActionMatrix {
    pub fn is_identity(&self) -> bool {
        self.entries.iter().all(|e| e.row == e.column && e.value.is_one())
    }

    /// Columns map to columns of the same shape `beta -> u^{-1} beta`.
    pub fn has_orbit_shape(&self) -> bool {
        let uinv = inv_mod(self.element.u, self.m).expect("unit");
        self.entries.iter().all(|e| e.row == scale_beta(&e.column, uinv, self.m))
    }

    fn by_column(&self) -> BTreeMap<&Beta, (&Beta, &Monomial)> {
        self.entries.iter().map(|e| (&e.column, (&e.row, &e.value))).collect()
    }

    pub fn same_action(&self, o: &Self) -> bool {
        self.by_column() == o.by_column()
    }
}

impl SatoTate {
    pub fn new(m: u64) -> Result<Self> {
        Ok(Self::from_model(epsilon_field_model(m)?))
    }

    pub fn from_model(model: EpsilonFieldModel) -> Self {
        SatoTate { model, periods: Mutex::new(HashMap::new()) }
    }

    pub fn m(&self) -> u64 {
        self.model.m
    }

    pub fn period(&self, beta: &[u64]) -> Result<PValue> {
        let key = sorted(beta.to_vec());
        if let Some(p) = self.periods.lock().unwrap().get(&key) {
            return Ok(p.clone());
        }
        let p = p_value(&self.model, &key)?;
        self.periods.lock().unwrap().insert(key, p.clone());
        Ok(p)
    }

    /// Fills the period cache for the orbits of `betas` and their negatives.
    pub fn precompute(&self, betas: &[Beta]) -> Result<()> {
        let m = self.m();
        let mut all: BTreeSet<Beta> = BTreeSet::new();
        for b in betas {
            for x in orbit_of(b, m) {
                all.insert(neg_beta(&x, m));
                all.insert(x);
            }
        }
        all.into_par_iter().map(|b| self.period(&b).map(|_| ())).collect::<Result<Vec<()>>>()?;
        Ok(())
    }

    /// Column `beta` of `rho(t)`: row `u^{-1} beta` and value
    /// `(mu_{u^-1 beta} / mu_beta) t(P_{-u^-1 beta}) / P_{-beta}`.
    pub fn rho_entry(&self, t: &GaloisElement, beta: &[u64]) -> Result<(Beta, Monomial)> {
        let m = self.m();
        self.model.index(t)?;
        let uinv = inv_mod(t.u, m).expect("unit");
        let beta = sorted(beta.to_vec());
        let row = scale_beta(&beta, uinv, m);
        let num = self.model.apply(t, &self.period(&neg_beta(&row, m))?.value)?;
        let den = self.model.inv(&self.period(&neg_beta(&beta, m))?.value)?;
        let ratio = CycloElement::from_rational(&(mu(&row, m) / mu(&beta, m))).lift(m);
        let v = self.model.mul(&self.model.mul(&num, &den), &Monomial::scalar(ratio));
        Ok((row, v))
    }

    pub fn rho_matrix(&self, t: &GaloisElement, orbit: &TateOrbit) -> Result<GaloisActionMatrix> {
        let basis: Vec<Beta> = orbit.members.iter().map(|o| o.beta.clone()).collect();
        self.rho_on(t, &basis)
    }

    pub fn rho_on(&self, t: &GaloisElement, basis: &[Beta]) -> Result<GaloisActionMatrix> {
        let entries = basis
            .iter()
            .map(|b| {
                let (row, value) = self.rho_entry(t, b)?;
                Ok(MatrixEntry { row, column: b.clone(), value })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(GaloisActionMatrix { m: self.m(), element: t.clone(), basis: basis.to_vec(), entries })
    }

    /// `a * b` for matrices on the same basis.
    pub fn multiply(&self, a: &GaloisActionMatrix, b: &GaloisActionMatrix) -> Result<GaloisActionMatrix> {
        let cols = a.by_column();
        let entries = b
            .entries
            .iter()
            .map(|e| {
                let (row, v) = cols.get(&e.row).ok_or_else(|| Error::ShapeMismatch("basis not closed".into()))?;
                Ok(MatrixEntry { row: (*row).clone(), column: e.column.clone(), value: self.model.mul(v, &e.value) })
            })
            .collect::<Result<Vec<_>>>()?;
        let element = self.model.compose(&a.element, &b.element)?;
        Ok(GaloisActionMatrix { m: self.m(), element, basis: b.basis.clone(), entries })
    }

    /// Whether the cyclotomic number `x` equals `c w_S`.
    fn equals(&self, x: &CycloElement, y: &Monomial) -> Result<bool> {
        let m = self.m();
        if y.support == 0 {
            return Ok(*x == y.coefficient);
        }
        // w_S lies in Q(zeta_n) exactly when g_S is a square there
        let n = lcm(x.conductor(), m);
        let n = if n % 4 == 2 { n / 2 } else { n };
        let g = square_product(&self.model.witnesses, y.support, m).lift(n);
        let Some(root) = sqrt_in_conductor(&g, CHECK_BITS) else { return Ok(false) };
        let ws = Monomial { coefficient: CycloElement::one(), support: y.support };
        let root = if close(&root.embed(CHECK_BITS), &self.model.embed(&ws)) { root } else { root.neg() };
        Ok(*x == y.coefficient.mul(&root))
    }

    /// Whether `h`, a generalized permutation matrix on `omega_1, ..., omega_{m-1}`,
    /// acts on `W_1` and `W_2` as `rho(t)`.
    ///
    /// `h` sends `omega_j` to `h[i][j] omega_i`. A shape `i -> v i` with
    /// `v != u^{-1}` is not in the component of `t`; any other shape is an error.
    pub fn component_membership(&self, h: &[Vec<CycloElement>], t: &GaloisElement) -> Result<bool> {
        let m = self.m();
        self.model.index(t)?;
        let n = (m - 1) as usize;
        if h.len() != n || h.iter().any(|r| r.len() != n) {
            return Err(Error::ShapeMismatch(format!("expected a {n} x {n} matrix")));
        }
        let mut image = vec![0u64; n];
        let mut coeff = vec![CycloElement::zero(); n];
        for j in 0..n {
            let nz: Vec<usize> = (0..n).filter(|&i| !h[i][j].is_zero()).collect();
            if nz.len() != 1 {
                return Err(Error::ShapeMismatch(format!("column {} has {} nonzero entries", j + 1, nz.len())));
            }
            image[j] = nz[0] as u64 + 1;
            coeff[j] = h[nz[0]][j].clone();
        }
        let v = image[0];
        if (1..m).any(|i| image[i as usize - 1] != v * i % m) {
            return Err(Error::ShapeMismatch("not of the form i -> v i".into()));
        }
        if v * t.u % m != 1 {
            return Ok(false);
        }
        // W_1: omega_i (x) omega_i^v goes to omega_{vi} (x) omega_{vi}^v with
        // coefficient 1 for any such h, which is rho on W_1.
        let betas = w2_classes(m);
        self.precompute(&betas)?;
        let results = betas
            .par_iter()
            .map(|b| {
                let (_, r) = self.rho_entry(t, b)?;
                let c = b.iter().fold(CycloElement::one(), |acc, &i| acc.mul(&coeff[i as usize - 1]));
                self.equals(&c, &r)
            })
            .collect::<Result<Vec<bool>>>()?;
        Ok(results.into_iter().all(|x| x))
    }
}

pub fn rho_matrix(st: &SatoTate, t: &GaloisElement, orbit: &TateOrbit) -> Result<GaloisActionMatrix> {
    st.rho_matrix(t, orbit)
}

pub fn component_membership(st: &SatoTate, h: &[Vec<CycloElement>], t: &GaloisElement) -> Result<bool> {
    st.component_membership(h, t)
}

// ---------------------------------------------------------------- identity component, polarization

#[derive(Clone, Debug, Serialize)]
pub struct IdentityComponent {
    pub m: u64,
    /// Generators as text: the Mumford-Tate kernel, then `x_j x_{m-j} = 1`.
    pub equations: Vec<String>,
    /// Row Hermite form of the lattice they generate, columns `x_1, ..., x_{m-1}`.
    pub lattice: Vec<Vec<i64>>,
}

/// Exponent vector of `f` on `x_1, ..., x_{m-1}`.
pub fn exponent_row(f: &MTEquation) -> Vec<i64> {
    (1..f.m()).map(|j| f.exponent(j)).collect()
}

/// Row Hermite form of the exponent lattice spanned by `rows` (columns `1..m-1`).
pub fn equation_lattice(rows: &[Vec<i64>]) -> Vec<Vec<i64>> {
    let rows: Vec<Vec<BigInt>> = rows.iter().map(|r| r.iter().map(|&x| BigInt::from(x)).collect()).collect();
    row_hnf(&rows)
        .into_iter()
        .filter(|r| r.iter().any(|x| !x.is_zero()))
        .map(|r| r.iter().map(|x| crate::arith::small(x).expect("small lattice entry")).collect())
        .collect()
}

pub fn identity_component(m: u64) -> Result<IdentityComponent> {
    require_odd(m)?;
    let mt = mt_equations(m)?;
    let mut rows: Vec<Vec<i64>> = mt.iter().map(exponent_row).collect();
    let mut equations: Vec<String> = mt.iter().map(|f| f.to_string()).collect();
    for j in 1..=m / 2 {
        let mut r = vec![0i64; (m - 1) as usize];
        r[(j - 1) as usize] = 1;
        r[(m - j - 1) as usize] = 1;
        rows.push(r);
        equations.push(format!("x_{j}*x_{} = 1", m - j));
    }
    let lattice = equation_lattice(&rows);
    Ok(IdentityComponent { m, equations, lattice })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Polarization {
    pub m: u64,
    pub basis: Vec<u64>,
    /// `(i, m - i, -(1/4) m / (m - 2i))`.
    pub entries: Vec<(u64, u64, String)>,
}

impl Polarization {
    pub fn entry(&self, i: u64, j: u64) -> Rational {
        if i + j != self.m || 2 * i == self.m {
            return Rational::zero();
        }
        rat(-(self.m as i64), 4 * (self.m as i64 - 2 * i as i64))
    }

    pub fn is_antisymmetric(&self) -> bool {
        self.basis.iter().all(|&i| self.basis.iter().all(|&j| self.entry(i, j) == -self.entry(j, i)))
    }
}

pub fn polarization(m: u64) -> Result<Polarization> {
    if m < 3 {
        return Err(Error::BadModulus(m));
    }
    let basis = variable_indices(m);
    let mut p = Polarization { m, basis: basis.clone(), entries: Vec::new() };
    p.entries = basis.iter().map(|&i| (i, m - i, crate::arith::fmt_rat(&p.entry(i, m - i)))).collect();
    Ok(p)
}

/// Both halves of the identity-component data.
pub fn identity_component_and_polarization(m: u64) -> Result<(IdentityComponent, Polarization)> {
    Ok((identity_component(m)?, polarization(m)?))
}

// ---------------------------------------------------------------- reference representatives, m = 15

/// The matrix sending `omega_j` to `c_j omega_{v j}` (indices mod `m`).
pub fn generalized_permutation(m: u64, v: u64, coeffs: &[CycloElement]) -> Result<Vec<Vec<CycloElement>>> {
    require_odd(m)?;
    let n = (m - 1) as usize;
    if coeffs.len() != n {
        return Err(Error::ShapeMismatch(format!("expected {n} coefficients, got {}", coeffs.len())));
    }
    if gcd(v, m) != 1 {
        return Err(Error::NotCoprime(v as i64, m));
    }
    let mut h = vec![vec![CycloElement::zero(); n]; n];
    for j in 1..m {
        h[(v * j % m - 1) as usize][(j - 1) as usize] = coeffs[(j - 1) as usize].clone();
    }
    Ok(h)
}

/// Replace `c_j` by `1 / c_j` for each listed (1-based) column.
pub fn reciprocal_columns(coeffs: &[CycloElement], columns: &[u64]) -> Result<Vec<CycloElement>> {
    coeffs
        .iter()
        .enumerate()
        .map(|(j, c)| if columns.contains(&(j as u64 + 1)) { c.inv() } else { Ok(c.clone()) })
        .collect()
}

/// A published pair of order-8 component representatives for `m = 15`,
/// stored as shape multiplier `v` plus the column coefficients `c_1..c_14`
/// in `Q(zeta_60)`.
#[derive(Clone, Debug)]
pub struct ReferenceMatrix {
    pub name: &'static str,
    pub v: u64,
    pub coefficients: Vec<CycloElement>,
    /// Columns whose reciprocal makes the matrix a member of some component.
    pub reciprocal_fix: Vec<u64>,
}

impl ReferenceMatrix {
    pub fn matrix(&self) -> Result<Vec<Vec<CycloElement>>> {
        generalized_permutation(15, self.v, &self.coefficients)
    }

    pub fn corrected(&self) -> Result<Vec<Vec<CycloElement>>> {
        generalized_permutation(15, self.v, &reciprocal_columns(&self.coefficients, &self.reciprocal_fix)?)
    }
}

pub fn m15_reference_matrices() -> [ReferenceMatrix; 2] {
    let s3 = sqrt_of_positive_integer(3).lift(60);
    let s15 = sqrt_of_positive_integer(15).lift(60);
    let i = CycloElement::i().lift(60);
    let r = |a: i64, b: i64| CycloElement::from_rational(&rat(a, b)).lift(60);
    let q = |a: i64, b: i64| s3.scale(&rat(a, b));
    let m1 = vec![
        q(13, 9),
        q(-3, 1),
        q(13, 1),
        r(1, 1),
        i.div(&s15).expect("sqrt 15 is nonzero").scale(&rat(-13, 3)),
        r(1, 1),
        r(1, 1),
        r(-13, 1),
        r(-3, 1),
        i.mul(&s15).scale(&rat(-3, 13)),
        r(-1, 7),
        q(1, 13),
        q(-11, 63),
        q(3, 11),
    ];
    let m2 = vec![
        r(1, 1),
        q(11, 21),
        q(-11, 39),
        q(-13, 3),
        i.clone(),
        r(3, 1),
        r(13, 1),
        r(1, 1),
        r(1, 1),
        i.neg(),
        q(-7, 13),
        q(39, 11),
        s3.neg(),
        r(-11, 13),
    ];
    [
        ReferenceMatrix { name: "M1", v: 2, coefficients: m1, reciprocal_fix: vec![1, 2, 3, 5, 10, 12, 13, 14] },
        ReferenceMatrix { name: "M2", v: 13, coefficients: m2, reciprocal_fix: vec![2, 3, 4, 11, 12, 13] },
    ]
}

#[cfg(test)]
mod tests {
    use super::*;

    fn el(s: &str) -> GaloisElement {
        s.parse().unwrap()
    }

    #[test]
    fn orbits() {
        let o = tate_class_orbits(15).unwrap();
        assert!(o.orbits.iter().flat_map(|t| &t.members).any(|b| b.beta == vec![2, 7, 9, 12]));
        assert!(o.orbits.iter().flat_map(|t| &t.members).all(|b| beta_character(&b.beta, 15).unwrap().membership().in_b));
        assert_eq!(w2_classes(15).len(), 40);
        let r = beta_of_equation(&MTEquation::parse(5, "x_1*x_4/x_2/x_3").unwrap());
        assert_eq!(r, vec![1, 4, 3, 2]);
        assert_eq!(4 % orbit_of(&r, 5).len(), 0);
    }

    #[test]
    fn mu_values() {
        assert_eq!(mu(&[1, 4], 5), rat(-9, 25));
        for b in w2_classes(15) {
            assert_eq!(mu(&neg_beta(&b, 15), 15), mu(&b, 15));
        }
    }

    #[test]
    fn group_orders() {
        let g = epsilon_field_model(15).unwrap();
        assert_eq!((g.order(), g.exponent(), g.is_abelian()), (16, 8, false));
        assert_eq!(g.abelian_invariants(), None);
        let g = epsilon_field_model(9).unwrap();
        assert_eq!(g.order(), 6);
        assert!(g.is_abelian());
        assert_eq!(epsilon_field_model(3).unwrap().order(), 2);
        assert!(matches!(epsilon_field_model(8), Err(Error::EvenModulus(8))));
    }

    #[test]
    fn galois_element_text() {
        let t = el("8,+-");
        assert_eq!(t.to_string(), "u=8,+-");
        assert_eq!(el("7"), GaloisElement { u: 7, signs: vec![] });
    }

    #[test]
    fn periods_match_numerics() {
        let st = SatoTate::new(15).unwrap();
        for b in w2_classes(15).iter().take(8) {
            let p = st.period(b).unwrap();
            let z = numeric_eval(&GammaMonomial::p_value(&beta_character(b, 15).unwrap()).unwrap(), CHECK_BITS);
            assert!(close(&st.model.embed(&p.value), &z), "{b:?}");
        }
    }

    #[test]
    fn rho_is_a_faithful_homomorphism() {
        let st = SatoTate::new(15).unwrap();
        let basis = w2_classes(15);
        st.precompute(&basis).unwrap();
        let els = st.model.elements().to_vec();
        let mats: Vec<_> = els.iter().map(|t| st.rho_on(t, &basis).unwrap()).collect();
        for (i, a) in els.iter().enumerate() {
            assert_eq!(mats[i].is_identity(), *a == st.model.identity());
            assert!(mats[i].has_orbit_shape());
            for (j, b) in els.iter().enumerate().step_by(3) {
                let ab = st.model.index(&st.model.compose(a, b).unwrap()).unwrap();
                assert!(st.multiply(&mats[i], &mats[j]).unwrap().same_action(&mats[ab]));
            }
        }
    }

    #[test]
    fn sign_only_elements_act_diagonally() {
        let st = SatoTate::new(15).unwrap();
        let basis = w2_classes(15);
        let r = st.rho_on(&el("1,-"), &basis).unwrap();
        assert!(r.entries.iter().all(|e| e.row == e.column && e.value.support == 0));
        let vals: Vec<_> = r.entries.iter().map(|e| e.value.coefficient.clone()).collect();
        assert!(vals.iter().all(|c| *c == CycloElement::one() || *c == CycloElement::one().neg()));
        assert!(vals.iter().any(|c| *c != CycloElement::one()));
    }

    #[test]
    fn polarization_values() {
        let p = polarization(5).unwrap();
        let want = [rat(-5, 12), rat(-5, 4), rat(5, 4), rat(5, 12)];
        for (i, w) in (1..5).zip(want) {
            assert_eq!(p.entry(i, 5 - i), w);
        }
        assert_eq!(p.entry(1, 1), Rational::zero());
        for m in (3..=30).step_by(2) {
            assert!(polarization(m).unwrap().is_antisymmetric(), "{m}");
        }
    }

    #[test]
    fn identity_component_m15() {
        let row = |ex: &[(usize, i64)]| {
            let mut r = vec![0i64; 14];
            for &(j, e) in ex {
                r[j - 1] += e;
            }
            r
        };
        let mut rows: Vec<Vec<i64>> = (1..=7).map(|j| row(&[(j, 1), (15 - j, 1)])).collect();
        rows.push(row(&[(5, 1), (3, -1), (4, -1), (13, -1)]));
        rows.push(row(&[(6, 1), (3, -1), (4, -1), (14, -1)]));
        rows.push(row(&[(7, 1), (3, -2), (4, -1), (13, -1), (14, -1)]));
        let ic = identity_component(15).unwrap();
        assert_eq!(ic.lattice, equation_lattice(&rows));
        assert_eq!(ic.lattice.len(), 10);
    }

    #[test]
    fn membership() {
        let st = SatoTate::new(15).unwrap();
        let one = vec![CycloElement::one(); 14];
        let h = generalized_permutation(15, 1, &one).unwrap();
        assert!(st.component_membership(&h, &st.model.identity()).unwrap());
        assert!(!st.component_membership(&h, &el("2,+")).unwrap());
        assert!(!st.component_membership(&h, &el("1,-")).unwrap());
        let mut bad = h.clone();
        bad[0][1] = CycloElement::one();
        assert!(matches!(st.component_membership(&bad, &st.model.identity()), Err(Error::ShapeMismatch(_))));
        for rm in m15_reference_matrices() {
            let hits: Vec<_> = st
                .model
                .elements()
                .iter()
                .filter(|t| st.component_membership(&rm.corrected().unwrap(), t).unwrap())
                .collect();
            assert_eq!(hits.len(), 1, "{}", rm.name);
        }
    }
}
