//! Gauss sums over residue fields of `Q(zeta_m)`, Frobenius scalars on
//! Tate classes, Morita's p-adic Gamma function and the Gross-Koblitz
//! comparison for characters `gamma_{i_1} * ... * gamma_{i_q}`.
//!
//! One choice of a primitive `m`-th root `w` in `F_q` fixes the prime above
//! `p`; Gauss sums, residue symbols and p-adic embeddings all use it.

use crate::arith::{gcd, inv_mod, is_prime, lcm, modulo, mul_mod, mult_order, rat_mod, Rational};
use crate::characters::FermatCharacter;
use crate::cyclotomic::CycloElement;
use crate::error::{Error, Result};
use crate::ffield::{Elem, FiniteField};
use crate::gamma_exact::{gamma_indices, reduce_square, GammaMonomial};
use crate::mumford_tate::{build_E_matrix, MTEquation};
use crate::padic::PadicNumber;
use num_bigint::{BigInt, BigUint};
use num_traits::{One, ToPrimitive};
use rayon::prelude::*;
use serde::Serialize;

/// Largest residue field the discrete-log table is built for.
pub const MAX_FIELD_ORDER: u64 = 4_000_000;

/// Which Frobenius the scalars refer to.
///
/// `Geometric` uses `eps_a(x) = t(x^{(1-q)/m})^a` as written; `Arithmetic`
/// replaces `a` by `-a`, which inverts every Frobenius scalar.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Orientation {
    Geometric,
    Arithmetic,
}

/// Residue field `F_q` at the prime of `Q(zeta_m)` above `p` selected by `w`.
#[derive(Clone, Debug)]
pub struct GaussSumContext {
    pub m: u64,
    pub p: u64,
    pub f: u64,
    pub q: u64,
    pub field: FiniteField,
    pub generator: Elem,
    /// `dlog[index(x)] = L` with `x = generator^L`; index 0 (zero) unused.
    dlog: Vec<u32>,
    /// `trace[L] = Tr(generator^L)`.
    trace: Vec<u32>,
    /// `w = generator^{k (q-1)/m}`.
    pub w_exponent: u64,
    pub w: Elem,
    pub orientation: Orientation,
}

fn index_of(x: &Elem, p: u64) -> usize {
    x.iter().rev().fold(0u64, |acc, &c| acc * p + c) as usize
}

impl GaussSumContext {
    /// Context with `w` of smallest discrete logarithm, `generator^{(q-1)/m}`.
    pub fn new(m: u64, p: u64) -> Result<Self> {
        Self::with_root(m, p, 1)
    }

    /// Context with `w = generator^{k (q-1)/m}`, `k` a unit mod `m`.
    pub fn with_root(m: u64, p: u64, k: u64) -> Result<Self> {
        if m < 2 {
            return Err(Error::BadModulus(m));
        }
        if !is_prime(p) || m % p == 0 {
            return Err(Error::NotCoprime(p as i64, m));
        }
        if gcd(k % m, m) != 1 {
            return Err(Error::NotCoprime(k as i64, m));
        }
        let f = mult_order(p % m, m);
        let q = (p as u128).checked_pow(f as u32).filter(|&q| q <= MAX_FIELD_ORDER as u128);
        let Some(q) = q else {
            return Err(Error::BudgetExceeded(format!("residue field of order {p}^{f} for m = {m}")));
        };
        let q = q as u64;
        let field = FiniteField::new(p, f as usize);
        let generator = field.primitive_element();
        let basis_traces: Vec<u64> = (0..f as usize)
            .map(|i| {
                let mut t = vec![0u64; i + 1];
                t[i] = 1;
                field.trace(&t)
            })
            .collect();
        let mut dlog = vec![u32::MAX; q as usize];
        let mut trace = vec![0u32; (q - 1) as usize];
        let mut x = field.one();
        for l in 0..q - 1 {
            dlog[index_of(&x, p)] = l as u32;
            let t = x.iter().zip(&basis_traces).fold(0u64, |s, (&c, &b)| (s + mul_mod(c, b, p)) % p);
            trace[l as usize] = t as u32;
            x = field.mul(&x, &generator);
        }
        debug_assert!(x == field.one());
        let w_exponent = (k % m) * ((q - 1) / m);
        let w = field.pow_u(&generator, w_exponent);
        Ok(GaussSumContext {
            m,
            p,
            f,
            q,
            field,
            generator,
            dlog,
            trace,
            w_exponent,
            w,
            orientation: Orientation::Geometric,
        })
    }

    pub fn oriented(mut self, o: Orientation) -> Self {
        self.orientation = o;
        self
    }

    /// Discrete logarithm to the base `generator`; `None` for zero.
    pub fn dlog(&self, x: &Elem) -> Option<u64> {
        if x.is_empty() {
            return None;
        }
        Some(self.dlog[index_of(x, self.p)] as u64)
    }

    /// `t(x)` for an `m`-th root of unity `x`: the exponent `j` with `x = w^j`.
    pub fn t(&self, x: &Elem) -> Option<u64> {
        let l = self.dlog(x)?;
        let step = (self.q - 1) / self.m;
        if l % step != 0 {
            return None;
        }
        let k = self.w_exponent / step;
        Some(mul_mod(l / step, inv_mod(k, self.m)?, self.m))
    }

    /// `g(p, a, psi) = -sum_x eps_a(x) zeta_p^{Tr x}` in `Q(zeta_{mp})`.
    pub fn gauss_sum(&self, a: i64) -> CycloElement {
        let (m, p) = (self.m, self.p);
        let n = m * p;
        let k = self.w_exponent / ((self.q - 1) / m);
        let kinv = inv_mod(k, m).expect("k is a unit") as i64;
        let a = match self.orientation {
            Orientation::Geometric => a,
            Orientation::Arithmetic => -a,
        };
        // eps_a(generator^L) = t(w0^{-L})^a = zeta_m^{-a L k^{-1}}
        let step = modulo(-a * kinv, m);
        let mut acc = vec![BigInt::from(0); n as usize];
        for (l, &tr) in self.trace.iter().enumerate() {
            let e = (mul_mod(step, l as u64 % m, m) * p + tr as u64 * m) % n;
            acc[e as usize] -= 1;
        }
        CycloElement::from_exponent_vector(n, acc, BigInt::one())
    }

    /// `eps_a(-1)`, a root of unity in `Q(zeta_m)`.
    pub fn eps_at_minus_one(&self, a: i64) -> CycloElement {
        let minus_one = self.field.neg(&self.field.one());
        let l = self.dlog(&minus_one).unwrap();
        let k = self.w_exponent / ((self.q - 1) / self.m);
        let kinv = inv_mod(k, self.m).unwrap() as i64;
        let a = if self.orientation == Orientation::Arithmetic { -a } else { a };
        CycloElement::root_of_unity(-a * kinv * (l % self.m) as i64, self.m)
    }

    /// Reduction of `g in Q(zeta_m)` at the prime fixed by `w`.
    pub fn reduce(&self, g: &CycloElement) -> Option<Elem> {
        let n = g.conductor();
        if self.m % n != 0 {
            return None;
        }
        let z = self.field.pow_u(&self.w, self.m / n);
        reduce_with_root(&self.field, &z, g)
    }
}

/// `g` with `zeta_n` sent to `z`, in `field`.
pub fn reduce_with_root(field: &FiniteField, z: &Elem, g: &CycloElement) -> Option<Elem> {
    let p = field.p;
    let d = rat_mod(&Rational::from_integer(g.denominator().clone()), p)?;
    let dinv = inv_mod(d, p)?;
    let mut acc = field.zero();
    let mut pw = field.one();
    for c in g.numerators() {
        let cm = rat_mod(&Rational::from_integer(c.clone()), p)?;
        acc = field.add(&acc, &field.scale(&pw, cm));
        pw = field.mul(&pw, z);
    }
    Some(field.scale(&acc, dinv))
}

/// `G_j = q^{-<gamma_j>} g(j)^2 g(-2j)` for every variable index `j`, in index order.
pub fn base_gauss_sums(ctx: &GaussSumContext) -> Vec<(u64, CycloElement)> {
    let m = ctx.m;
    let idx = crate::mumford_tate::variable_indices(m);
    let needed: std::collections::BTreeSet<u64> =
        idx.iter().flat_map(|&j| [j, modulo(-2 * j as i64, m)]).collect();
    let sums: std::collections::BTreeMap<u64, CycloElement> =
        needed.into_par_iter().map(|a| (a, ctx.gauss_sum(a as i64))).collect();
    idx.into_par_iter()
        .map(|j| {
            let g = FermatCharacter::gamma(j as i64, m).expect("variable index");
            let w = g.weight(1).to_integer().to_u32().expect("integral weight");
            let qw = Rational::from_integer(BigInt::from(ctx.q).pow(w));
            let gj = sums[&j].square().mul(&sums[&modulo(-2 * j as i64, m)]).scale(&qw.recip());
            (j, gj)
        })
        .collect()
}

/// The scalar by which Frobenius at the prime of `ctx` acts on the Tate class `v_f`.
pub fn frobenius_value(ctx: &GaussSumContext, f: &MTEquation) -> Result<CycloElement> {
    frobenius_value_with(ctx, &base_gauss_sums(ctx), f)
}

/// As [`frobenius_value`], reusing precomputed `G_j`.
pub fn frobenius_value_with(ctx: &GaussSumContext, g: &[(u64, CycloElement)], f: &MTEquation) -> Result<CycloElement> {
    if f.m() != ctx.m {
        return Err(Error::NotAnEquation(format!("{f} is not an equation for m = {}", ctx.m)));
    }
    if !build_E_matrix(ctx.m).contains(f) {
        return Err(Error::NotAnEquation(format!("{f} is not in the kernel")));
    }
    let mut v = CycloElement::one();
    for (j, e) in f.normalized_exponents() {
        let gj = &g.iter().find(|(i, _)| *i == j).expect("G_j for every variable").1;
        v = v.mul(&gj.pow(e)?);
    }
    v.change_conductor(ctx.m).map(|x| x.minimal()).map_err(|_| Error::DescentFailure(ctx.m))
}

/// Limits on the `O(p^N)` defining product of `Gamma_p`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct PadicBudget {
    pub max_p: u64,
    pub max_precision: u32,
    /// Cap on `p^N`, the length of the product.
    pub max_terms: u64,
}

impl Default for PadicBudget {
    fn default() -> Self {
        PadicBudget { max_p: 100, max_precision: 6, max_terms: 100_000_000 }
    }
}

fn padic_modulus(p: u64, n: u32, budget: PadicBudget) -> Result<u64> {
    if p == 2 {
        return Err(Error::EvenPrime);
    }
    if !is_prime(p) {
        return Err(Error::BadModulus(p));
    }
    let pn = p.checked_pow(n).filter(|&pn| pn <= budget.max_terms);
    match pn {
        Some(pn) if p <= budget.max_p && n <= budget.max_precision && n >= 1 => Ok(pn),
        _ => Err(Error::BudgetExceeded(format!("Gamma_p with p = {p}, N = {n}"))),
    }
}

pub fn morita_gamma(p: u64, n: u32, x: &Rational) -> Result<PadicNumber> {
    morita_gamma_with(p, n, x, PadicBudget::default())
}

/// `Gamma_p(x) mod p^N` via `Gamma_p(k) = (-1)^k prod_{0<i<k, p !| i} i`, `k = x mod p^N` in `(0, p^N]`.
pub fn morita_gamma_with(p: u64, n: u32, x: &Rational, budget: PadicBudget) -> Result<PadicNumber> {
    let pn = padic_modulus(p, n, budget)?;
    let k = rat_mod(x, pn).ok_or_else(|| Error::NotCoprime(x.denom().to_i64().unwrap_or(0), p))?;
    let k = if k == 0 { pn } else { k };
    let mut acc = 1u64;
    for i in 1..k {
        if i % p != 0 {
            acc = mul_mod(acc, i, pn);
        }
    }
    if k % 2 == 1 {
        acc = (pn - acc) % pn;
    }
    Ok(PadicNumber::from_residue(p, n, &BigInt::from(acc)))
}

/// `gamma_{i_1} * ... * gamma_{i_q}`.
pub fn gamma_product(m: u64, indices: &[u64]) -> Result<FermatCharacter> {
    let mut it = indices.iter();
    let first = it.next().ok_or(Error::ZeroInput)?;
    let mut a = FermatCharacter::gamma(*first as i64, m)?;
    for &i in it {
        a = a.concat(&FermatCharacter::gamma(i as i64, m)?);
    }
    Ok(a)
}

/// `hat Gamma_p(u alpha) = prod_j Gamma_p([u i_j]/m)^2 / Gamma_p([2 u i_j]/m)` modulo `p^N`.
pub fn gamma_hat_p(u: i64, alpha: &FermatCharacter, p: u64, n: u32, budget: PadicBudget) -> Result<PadicNumber> {
    let m = alpha.modulus();
    let mut acc = PadicNumber::from_residue(p, n, &BigInt::one());
    for i in gamma_indices(alpha)? {
        let a = upper_rep(u * i as i64, m);
        let b = upper_rep(2 * u * i as i64, m);
        let ga = morita_gamma_with(p, n, &Rational::new(BigInt::from(a), BigInt::from(m)), budget)?;
        let gb = morita_gamma_with(p, n, &Rational::new(BigInt::from(b), BigInt::from(m)), budget)?;
        acc = acc.mul(&ga).mul(&ga).mul(&gb.inv().expect("Gamma_p takes unit values"));
    }
    Ok(acc)
}

/// Representative of `a mod m` in `[1, m]`.
fn upper_rep(a: i64, m: u64) -> u64 {
    match modulo(a, m) {
        0 => m,
        r => r,
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "verdict")]
pub enum GrossKoblitzOutcome {
    Verified,
    /// `v_p(p-adic side - archimedean side)` when the two disagree.
    Failed { residual_valuation: i64 },
}

#[derive(Clone, Debug, Serialize)]
pub struct GrossKoblitzReport {
    pub m: u64,
    pub p: u64,
    pub precision: u32,
    pub alpha: FermatCharacter,
    /// Conductor housing `hat Gamma(-alpha)^2`.
    pub conductor: u64,
    /// Order of `p` modulo `lcm(conductor, m)`: the Frobenius power compared.
    pub frobenius_power: u64,
    /// Residue symbol of `hat Gamma(-alpha)^2` at the chosen prime.
    pub archimedean_sign: i32,
    /// `(-1)^{f <alpha>} prod_k hat Gamma_p(p^{k+1} alpha)`.
    pub padic_side: PadicNumber,
    pub outcome: GrossKoblitzOutcome,
}

pub fn gross_koblitz_check(m: u64, alpha: &FermatCharacter, p: u64, n: u32) -> Result<GrossKoblitzReport> {
    gross_koblitz_check_with(m, alpha, p, n, 1, PadicBudget::default())
}

/// Compares both sides of the Gross-Koblitz formula for `Frob_p^f`, `f = ord(p)`
/// in `(Z / lcm(L, m))^x` with `L` the conductor of `s = hat Gamma(-alpha)^2`.
///
/// Iterating the formula along `alpha, p alpha, ..., p^{f-1} alpha` returns to
/// `alpha`, and `Frob^f` acts on `sqrt(s)` by the quadratic residue symbol of `s`
/// in the residue field of `Q(zeta_L)`. The p-adic side is
/// `(-1)^{f <alpha>} prod_{k<f} hat Gamma_p(p^{k+1} alpha)`. For `p = 1 mod m`
/// and `L | m` this is the single comparison `Gamma_p(alpha) (-1)^<alpha>` against
/// `(s / P)`. `w_root` selects `w` as in [`GaussSumContext::with_root`].
pub fn gross_koblitz_check_with(
    m: u64,
    alpha: &FermatCharacter,
    p: u64,
    n: u32,
    w_root: u64,
    budget: PadicBudget,
) -> Result<GrossKoblitzReport> {
    if m % 2 == 0 {
        return Err(Error::EvenModulus(m));
    }
    if alpha.modulus() != m {
        return Err(Error::BadModulus(alpha.modulus()));
    }
    padic_modulus(p, n, budget)?;
    if m % p == 0 {
        return Err(Error::ConductorClash(p, m));
    }
    let weight = alpha.weight(1);
    let units = crate::arith::units(m);
    if units.iter().any(|&u| alpha.weight(u as i64) != weight) {
        return Err(Error::NotConstantWeight);
    }
    let s = reduce_square(&GammaMonomial::gamma_hat(-1, alpha)?)?.value.minimal();
    let l = s.conductor();
    if l % p == 0 {
        return Err(Error::ConductorClash(p, l));
    }
    let big_l = lcm(l, m);
    let f = mult_order(p % big_l, big_l);

    // archimedean side: s^{(Q-1)/2} in the residue field of Q(zeta_L)
    let symbol = if big_l == m {
        let ctx = GaussSumContext::with_root(m, p, w_root)?;
        let r = ctx.reduce(&s).ok_or(Error::ConductorClash(p, l))?;
        residue_symbol(&ctx.field, &r)
    } else {
        let field = FiniteField::new(p, f as usize);
        let qm1 = &field.order - 1u32;
        let z = field.pow(&field.primitive_element(), &(&qm1 / BigUint::from(big_l)));
        let z = field.pow_u(&z, w_root);
        let r = reduce_with_root(&field, &field.pow_u(&z, big_l / l), &s).ok_or(Error::ConductorClash(p, l))?;
        residue_symbol(&field, &r)
    };

    // p-adic side
    let mut side = PadicNumber::from_residue(p, n, &BigInt::one());
    let mut u = p as i64 % m as i64;
    for _ in 0..f {
        side = side.mul(&gamma_hat_p(u, alpha, p, n, budget)?);
        u = u * p as i64 % m as i64;
    }
    let sign_exp = BigInt::from(f) * weight.to_integer();
    if (sign_exp % 2u32) == BigInt::one() {
        side = side.neg();
    }

    let outcome = match symbol {
        Some(sign) => {
            let target = PadicNumber::from_residue(p, n, &BigInt::from(sign));
            let diff = side.residue().unwrap() - target.residue().unwrap();
            let d = PadicNumber::from_residue(p, n, &diff);
            if d.is_zero() {
                GrossKoblitzOutcome::Verified
            } else {
                GrossKoblitzOutcome::Failed { residual_valuation: d.valuation }
            }
        }
        None => GrossKoblitzOutcome::Failed { residual_valuation: 0 },
    };
    Ok(GrossKoblitzReport {
        m,
        p,
        precision: n,
        alpha: alpha.clone(),
        conductor: l,
        frobenius_power: f,
        archimedean_sign: symbol.unwrap_or(0),
        padic_side: side,
        outcome,
    })
}

/// `x^{(Q-1)/2}` as `+1` / `-1`; `None` for zero or a non-sign result.
fn residue_symbol(field: &FiniteField, x: &Elem) -> Option<i32> {
    if x.is_empty() {
        return None;
    }
    let e = (&field.order - 1u32) >> 1;
    let v = field.pow(x, &e);
    if v == field.one() {
        Some(1)
    } else if v == field.neg(&field.one()) {
        Some(-1)
    } else {
        None
    }
}

/// The `G_j` as a JSON-friendly list.
#[derive(Clone, Debug, Serialize)]
pub struct FrobeniusReport {
    pub m: u64,
    pub p: u64,
    pub q: u64,
    pub w_discrete_log: u64,
    pub orientation: Orientation,
    pub equation: String,
    pub value: CycloElement,
}

pub fn frobenius_report(ctx: &GaussSumContext, f: &MTEquation) -> Result<FrobeniusReport> {
    Ok(FrobeniusReport {
        m: ctx.m,
        p: ctx.p,
        q: ctx.q,
        w_discrete_log: ctx.w_exponent,
        orientation: ctx.orientation,
        equation: f.to_string(),
        value: frobenius_value(ctx, f)?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::rat;

    #[test]
    fn context() {
        let c = GaussSumContext::new(15, 31).unwrap();
        assert_eq!((c.f, c.q), (1, 31));
        assert_eq!(c.field.pow_u(&c.w, 15), c.field.one());
        assert_eq!(c.t(&c.w), Some(1));
        assert_eq!(c.t(&c.field.pow_u(&c.w, 7)), Some(7));
        let c = GaussSumContext::new(5, 2).unwrap();
        assert_eq!((c.f, c.q), (4, 16));
        assert!(GaussSumContext::new(15, 5).is_err());
    }

    #[test]
    fn gauss_sum_identities() {
        let c = GaussSumContext::new(5, 11).unwrap();
        for a in 1..5 {
            let g = c.gauss_sum(a);
            let prod = g.mul(&c.gauss_sum(-a));
            assert_eq!(prod, c.eps_at_minus_one(a).scale(&rat(11, 1)));
            assert_eq!(g.mul(&g.conj()), CycloElement::from_int(11));
        }
        let gs = base_gauss_sums(&c);
        for (j, g) in &gs {
            let other = &gs.iter().find(|(i, _)| *i == 5 - j).unwrap().1;
            assert!(g.mul(other).is_one());
        }
    }

    #[test]
    fn frobenius_m15() {
        let c = GaussSumContext::new(15, 31).unwrap();
        let f = MTEquation::parse(15, "x_10*x_12/x_8/x_14").unwrap();
        assert_eq!(frobenius_value(&c, &f).unwrap(), CycloElement::from_int(-1));
        let c = c.oriented(Orientation::Arithmetic);
        assert_eq!(frobenius_value(&c, &f).unwrap(), CycloElement::from_int(-1));
        let s = MTEquation::symplectic(15, 1, 2).unwrap();
        assert!(frobenius_value(&c, &s).unwrap().is_one());
    }

    #[test]
    fn morita() {
        for p in [3, 5, 7, 11] {
            assert_eq!(morita_gamma(p, 3, &rat(1, 1)).unwrap().residue().unwrap(), BigInt::from(p * p * p - 1));
            assert_eq!(morita_gamma(p, 3, &rat(2, 1)).unwrap().residue().unwrap(), BigInt::one());
        }
        assert_eq!(morita_gamma(2, 3, &rat(1, 1)), Err(Error::EvenPrime));
        assert!(matches!(morita_gamma(101, 2, &rat(1, 3)), Err(Error::BudgetExceeded(_))));
        assert!(matches!(morita_gamma(97, 6, &rat(1, 3)), Err(Error::BudgetExceeded(_))));
    }

    #[test]
    fn gross_koblitz_examples() {
        let a = gamma_product(5, &[1, 4]).unwrap();
        let r = gross_koblitz_check(5, &a, 11, 3).unwrap();
        assert_eq!(r.outcome, GrossKoblitzOutcome::Verified, "{r:?}");
        let a = gamma_product(15, &[10, 12, 7, 1]).unwrap();
        let r = gross_koblitz_check(15, &a, 31, 3).unwrap();
        assert_eq!(r.outcome, GrossKoblitzOutcome::Verified, "{r:?}");
        assert_eq!(r.archimedean_sign, -1);
        let a = gamma_product(3, &[1, 2]).unwrap();
        let r = gross_koblitz_check(3, &a, 7, 4).unwrap();
        assert_eq!(r.outcome, GrossKoblitzOutcome::Verified, "{r:?}");
    }

    #[test]
    fn gross_koblitz_non_split_primes() {
        for (m, idx, p) in [(5u64, vec![1u64, 4], 19u64), (5, vec![1, 4], 3), (15, vec![10, 12, 7, 1], 7), (3, vec![1, 2], 5)] {
            let a = gamma_product(m, &idx).unwrap();
            let r = gross_koblitz_check(m, &a, p, 3).unwrap();
            assert!(r.frobenius_power > 1);
            assert_eq!(r.outcome, GrossKoblitzOutcome::Verified, "m = {m}, p = {p}");
        }
    }

    #[test]
    fn consistency_with_frobenius() {
        let c = GaussSumContext::new(15, 61).unwrap();
        let f = MTEquation::parse(15, "x_10*x_12/x_8/x_14").unwrap();
        let v = frobenius_value(&c, &f).unwrap();
        let a = gamma_product(15, &[10, 12, 7, 1]).unwrap();
        let r = gross_koblitz_check(15, &a, 61, 2).unwrap();
        assert_eq!(v, CycloElement::from_int(r.archimedean_sign as i64));
    }
}
