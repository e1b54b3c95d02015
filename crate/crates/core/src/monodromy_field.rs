//! The connected monodromy field `Q(eps_{J_m})` as a multiquadratic
//! extension of `K = Q(zeta_m)`, generated by square roots of the square
//! classes `Gamma(f)^2` (twisted by `mu^{2e(f)}` for even `m`).

use crate::arith::{euler_phi, gcd, is_prime, is_prime_power, legendre, pow_mod, prime_divisors, rat};
use crate::cyclotomic::{is_square_in_subfield, reduce_at, sqrt_in_conductor, CycloElement, SquareStatus};
use crate::error::{Error, Result};
use crate::gamma_exact::{reduce_square_with, GammaMonomial, CHECK_BITS};
use crate::linalg::{f2_relations, F2Vec};
use crate::mumford_tate::{mt_equations, MTEquation};
use rayon::prelude::*;
use serde::Serialize;

#[derive(Clone, Debug)]
pub struct MonodromyGenerator {
    pub equation: MTEquation,
    pub square_class: CycloElement,
    pub squareness: SquareStatus,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Budget {
    /// Split primes scanned per squareness decision and for the rank.
    pub primes: usize,
    /// Bits of the numeric cross-check in every Gamma reduction.
    pub bits: u32,
    /// Largest conductor a square class may need.
    pub conductor: u64,
}

impl Default for Budget {
    fn default() -> Self {
        Budget { primes: 400, bits: CHECK_BITS, conductor: 1 << 16 }
    }
}

/// A relation `prod_{i in support} g_i = witness^2` in `K`.
#[derive(Clone, Debug, Serialize)]
pub struct RelationWitness {
    pub support: Vec<usize>,
    pub witness: CycloElement,
}

#[derive(Clone, Debug)]
pub struct MonodromyFieldReport {
    pub m: u64,
    pub generators: Vec<MonodromyGenerator>,
    pub rank: usize,
    pub degree_over_q: u128,
    pub witnesses: Vec<RelationWitness>,
}

/// The Gamma monomial whose square is the square class of `f`.
///
/// For even `m` this is `Gamma(f) mu^{e(f)}` with `mu = 4^{1/m} zeta_{2m}`,
/// so that `mu^{2e} = 2^{4e/m} zeta_m^e`.
pub fn generator_monomial(f: &MTEquation) -> GammaMonomial {
    let g = GammaMonomial::of_equation(f);
    let m = f.m() as i64;
    if m % 2 == 1 {
        return g;
    }
    let e = f.e_of_f();
    // mu^e = 2^{2e/m} i^{2e/m}
    g.mul(&GammaMonomial::radical(2, rat(2 * e, m))).mul(&GammaMonomial::i_power(rat(2 * e, m)))
}

/// Square class of one equation, descended to `Q(zeta_m)`.
pub fn square_class(f: &MTEquation, bits: u32) -> Result<CycloElement> {
    let v = reduce_square_with(&generator_monomial(f), bits)?.value;
    v.change_conductor(f.m()).map_err(|_| Error::DescentFailure(f.m()))
}

pub fn generators(m: u64) -> Result<Vec<MonodromyGenerator>> {
    generators_with(m, Budget::default())
}

pub fn generators_with(m: u64, budget: Budget) -> Result<Vec<MonodromyGenerator>> {
    generators_for(&mt_equations(m)?, budget)
}

/// Generators for an explicit list of equations (all with the same `m`).
pub fn generators_for(eqs: &[MTEquation], budget: Budget) -> Result<Vec<MonodromyGenerator>> {
    eqs.par_iter()
        .map(|f| {
            let square_class = square_class(f, budget.bits)?;
            if square_class.conductor() > budget.conductor {
                return Err(Error::BudgetExceeded(format!(
                    "square class of {f} needs conductor {}",
                    square_class.conductor()
                )));
            }
            let squareness = is_square_in_subfield(&square_class, f.m(), budget.primes)?;
            Ok(MonodromyGenerator { equation: f.clone(), square_class, squareness })
        })
        .collect()
}

fn primitive_root_of_order(m: u64, q: u64) -> u64 {
    let ps = prime_divisors(m);
    (2..q)
        .map(|a| pow_mod(a, (q - 1) / m, q))
        .find(|&w| ps.iter().all(|&p| pow_mod(w, m / p, q) != 1))
        .expect("q = 1 mod m")
}

/// Residue symbols of every class at every place above one split prime `q`
/// (`true` = non-residue); `None` when some class is not a unit there.
fn residue_columns(classes: &[CycloElement], m: u64, q: u64) -> Option<Vec<F2Vec>> {
    let w = primitive_root_of_order(m, q);
    let mut cols = Vec::new();
    for k in (1..m).filter(|&k| gcd(k, m) == 1) {
        let r = pow_mod(w, k, q);
        let mut col = F2Vec::zero(classes.len());
        for (i, g) in classes.iter().enumerate() {
            let v = reduce_at(g, m, q, r)?;
            if v == 0 {
                return None;
            }
            col.set(i, legendre(v, q) == -1);
        }
        cols.push(col);
    }
    Some(cols)
}

/// Running F2 echelon basis of the column span.
struct ColumnSpan {
    basis: Vec<F2Vec>,
}

impl ColumnSpan {
    fn add(&mut self, mut v: F2Vec) -> bool {
        for b in &self.basis {
            let lead = b.first_one().unwrap();
            if v.get(lead) {
                v.xor_assign(b);
            }
        }
        if v.is_zero() {
            return false;
        }
        let lead = v.first_one().unwrap();
        for b in self.basis.iter_mut() {
            if b.get(lead) {
                b.xor_assign(&v);
            }
        }
        self.basis.push(v);
        true
    }
}

/// F2-rank of the classes in `K^x / (K^x)^2`.
///
/// Split primes `q = 1 mod m` are scanned until the residue rank has not
/// grown for `2r + 8` consecutive primes. Every relation the residues
/// suggest is then confirmed by an exact square root of the product; an
/// unconfirmed relation sends the scan on until the residues separate it.
pub fn two_rank(classes: &[CycloElement], m: u64, budget_primes: usize) -> Result<(usize, Vec<RelationWitness>)> {
    let n = classes.len();
    if n == 0 {
        return Ok((0, Vec::new()));
    }
    let mut span = ColumnSpan { basis: Vec::new() };
    let mut columns: Vec<F2Vec> = Vec::new();
    let mut q = 1;
    let mut scanned = 0usize;
    let mut quiet = 0usize;
    let mut need_growth = false;
    loop {
        let target = 2 * span.basis.len() + 8;
        if span.basis.len() == n || (!need_growth && quiet >= target) {
            // candidate relations
            let rows: Vec<F2Vec> = (0..n)
                .map(|i| {
                    let mut r = F2Vec::zero(columns.len());
                    for (c, col) in columns.iter().enumerate() {
                        r.set(c, col.get(i));
                    }
                    r
                })
                .collect();
            let (rank, rels) = f2_relations(&rows);
            debug_assert_eq!(rank, span.basis.len());
            let checked: Vec<Option<RelationWitness>> = rels
                .par_iter()
                .map(|support| {
                    let prod = support.iter().fold(CycloElement::one(), |acc, &i| acc.mul(&classes[i])).lift(m);
                    sqrt_in_conductor(&prod, 128).map(|y| {
                        let y = y.change_conductor(m).unwrap_or(y);
                        RelationWitness { support: support.clone(), witness: y }
                    })
                })
                .collect();
            if checked.iter().all(|c| c.is_some()) {
                return Ok((rank, checked.into_iter().map(Option::unwrap).collect()));
            }
            need_growth = true;
        }
        if scanned >= budget_primes {
            return Err(Error::BudgetExhausted(format!(
                "rank for m = {m} not settled after {budget_primes} split primes"
            )));
        }
        q += m;
        while !is_prime(q) {
            q += m;
        }
        scanned += 1;
        let Some(cols) = residue_columns(classes, m, q) else { continue };
        let mut grew = false;
        for c in cols {
            if span.add(c.clone()) {
                grew = true;
            }
            columns.push(c);
        }
        if grew {
            quiet = 0;
            need_growth = false;
        } else {
            quiet += 1;
        }
    }
}

pub fn report(m: u64) -> Result<MonodromyFieldReport> {
    report_with(m, Budget::default())
}

pub fn report_with(m: u64, budget: Budget) -> Result<MonodromyFieldReport> {
    let gens = generators_with(m, budget)?;
    if let Some(g) = gens.iter().find(|g| g.squareness == SquareStatus::Undecided) {
        return Err(Error::BudgetExhausted(format!("squareness of {} undecided", g.equation)));
    }
    let classes: Vec<CycloElement> = gens.iter().map(|g| g.square_class.clone()).collect();
    let (rank, witnesses) = two_rank(&classes, m, budget.primes)?;
    // the individually decided squares must be among the relations
    let nonsquares = gens.iter().filter(|g| g.squareness.is_square() == Some(false)).count();
    assert!(rank <= nonsquares, "rank exceeds the number of non-square generators");
    if m % 2 == 1 && is_prime_power(m) {
        assert_eq!(rank, 0, "odd prime powers have monodromy field Q(zeta_m)");
    }
    Ok(MonodromyFieldReport {
        m,
        generators: gens,
        rank,
        degree_over_q: euler_phi(m) as u128 * (1u128 << rank),
        witnesses,
    })
}

/// `e(f) = 0 mod m` for every kernel basis equation (odd `m` only).
pub fn twist_invariance_check(m: u64) -> Result<bool> {
    if m % 2 == 0 {
        return Err(Error::EvenModulus(m));
    }
    Ok(mt_equations(m)?.iter().all(|f| f.e_of_f().rem_euclid(m as i64) == 0))
}

impl Serialize for MonodromyFieldReport {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        use serde::ser::SerializeMap;
        let gens: Vec<serde_json::Value> = self
            .generators
            .iter()
            .map(|g| {
                serde_json::json!({
                    "equation": g.equation.to_string(),
                    "square_class": g.square_class,
                    "is_square_in_K": g.squareness.is_square() == Some(true),
                })
            })
            .collect();
        let mut map = s.serialize_map(Some(5))?;
        map.serialize_entry("m", &self.m)?;
        map.serialize_entry("rank", &self.rank)?;
        map.serialize_entry("degree_over_Q", &self.degree_over_q)?;
        map.serialize_entry("generators", &gens)?;
        map.serialize_entry("witnesses", &self.witnesses)?;
        map.end()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn m15() {
        let r = report(15).unwrap();
        assert_eq!(r.rank, 1);
        assert_eq!(r.degree_over_q, 16);
        let f = MTEquation::parse(15, "x_10*x_12/x_8/x_14").unwrap();
        let g = generators_for(&[f], Budget::default()).unwrap();
        assert!(matches!(g[0].squareness, SquareStatus::CertifiedNonSquare(_)));
        for j in 1..7u64 {
            let s = MTEquation::symplectic(15, j, 7).unwrap();
            let g = generators_for(&[s], Budget::default()).unwrap();
            assert!(matches!(g[0].squareness, SquareStatus::SquareWithWitness(_)), "{j}");
        }
    }

    #[test]
    fn small_odd() {
        assert_eq!(report(7).unwrap().rank, 0);
        assert_eq!(report(9).unwrap().rank, 0);
        assert_eq!(report(21).unwrap().rank, 1);
    }

    #[test]
    fn twist() {
        assert!(twist_invariance_check(15).unwrap());
        assert!(twist_invariance_check(9).unwrap());
        assert!(twist_invariance_check(8).is_err());
        let f = MTEquation::parse(18, "x_2/x_7").unwrap();
        assert_ne!(f.e_of_f().rem_euclid(18), 0);
    }
}
