//! CM types, the isogeny decomposition of `J_m`, the character-lattice map
//! and Mumford-Tate equations.

use crate::arith::{divisors, euler_phi, gcd, inv_mod, modulo, units};
use crate::cyclotomic::CycloElement;
use crate::error::{Error, Result};
use crate::linalg::{integer_kernel, IMat};
use num_bigint::BigInt;
use num_traits::ToPrimitive;
use serde::ser::SerializeMap;
use serde::{Serialize, Serializer};
use std::collections::BTreeMap;
use std::fmt;

/// `g(m) = floor((m-1)/2)`, the genus of `y^2 = x^m + 1`.
pub fn genus(m: u64) -> u64 {
    (m - 1) / 2
}

/// The variable indices `1..m-1`, skipping `m/2` when `m` is even.
pub fn variable_indices(m: u64) -> Vec<u64> {
    (1..m).filter(|&i| 2 * i != m).collect()
}

/// `Phi_d = { j : (j, d) = 1, 1 <= j <= g(d) }`.
pub fn cm_type(d: u64) -> Vec<u64> {
    (1..=genus(d)).filter(|&j| gcd(j, d) == 1).collect()
}

/// Units `u` with `u Phi_d = Phi_d`, by enumeration.
pub fn stabilizer(d: u64) -> Vec<u64> {
    let phi = cm_type(d);
    units(d)
        .into_iter()
        .filter(|&u| {
            let mut img: Vec<u64> = phi.iter().map(|&a| a * u % d).collect();
            img.sort_unstable();
            img == phi
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CMFactorData {
    pub d: u64,
    pub dimension: u64,
    pub cm_type: Vec<u64>,
    pub stabilizer: Vec<u64>,
    pub simple: bool,
    pub exceptional: bool,
    /// `X_d ~ Y_d^power` geometrically.
    pub power: usize,
    /// Set for `d = 2 mod 4`: `X_d` is isogenous over Q to `X_{d/2}`.
    pub isogenous_to: Option<u64>,
    pub endo_algebra: String,
    pub endo_field: String,
}

/// Defining data of the exceptional endomorphism fields.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ExceptionalField {
    /// Root field of an integer polynomial, coefficients from the constant term up.
    Polynomial { d: u64, coefficients: Vec<i64> },
    /// `Q(zeta_d)` adjoined square roots of the listed radicands.
    Radicals { d: u64, radicands: Vec<CycloElement> },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct DecompositionReport {
    pub m: u64,
    pub genus: u64,
    pub factors: Vec<CMFactorData>,
    pub endo_field: String,
    pub exceptional_fields: Vec<ExceptionalField>,
}

pub const EXCEPTIONAL: [u64; 3] = [20, 24, 60];

/// `f_20`, constant term first.
pub const F20: [i64; 17] = [1, 2, -2, -6, 2, -8, -2, -18, 20, 12, 46, 14, 27, 4, 8, 0, 1];
/// `f_24 = x^16 + 40x^12 + 432x^8 - 128x^4 + 256`, constant term first.
pub const F24: [i64; 17] = [256, 0, 0, 0, -128, 0, 0, 0, 432, 0, 0, 0, 40, 0, 0, 0, 1];

/// Exponent/coefficient lists of the three radicands generating `Q(eps_{J_60})` over `Q(zeta_60)`.
pub const RADICANDS_60: [&[(i64, i64)]; 3] = [
    &[(12, 3), (8, 2), (6, -2), (4, -1), (2, -2), (0, -1)],
    &[(13, 4), (3, -2)],
    &[(14, 2), (9, -2), (6, -1), (4, -2), (3, 2), (0, 2)],
];

pub fn radicands_60() -> Vec<CycloElement> {
    RADICANDS_60
        .iter()
        .map(|terms| {
            let t: Vec<(i64, crate::arith::Rational)> =
                terms.iter().map(|&(e, c)| (e, crate::arith::rat(c, 1))).collect();
            CycloElement::from_terms(60, &t)
        })
        .collect()
}

fn exceptional_field(d: u64) -> ExceptionalField {
    match d {
        20 => ExceptionalField::Polynomial { d, coefficients: F20.to_vec() },
        24 => ExceptionalField::Polynomial { d, coefficients: F24.to_vec() },
        60 => ExceptionalField::Radicals { d, radicands: radicands_60() },
        _ => unreachable!(),
    }
}

fn factor(d: u64) -> CMFactorData {
    let stab = stabilizer(d);
    let exceptional = EXCEPTIONAL.contains(&d);
    let (endo_algebra, endo_field) = if d % 4 != 0 || stab.len() == 1 {
        (format!("Q(zeta_{d})"), format!("Q(zeta_{d})"))
    } else if !exceptional {
        (format!("Mat_2(Q(zeta_{d} - zeta_{d}^-1))"), format!("Q(zeta_{d})"))
    } else {
        let f = match d {
            20 => "Q(sqrt(-5))",
            24 => "Q(sqrt(-6))",
            _ => "Q[x]/(x^4 + 15x^2 + 45)",
        };
        let ef = match d {
            60 => "Q(zeta_60)(sqrt(r_1), sqrt(r_2), sqrt(r_3))".to_string(),
            _ => format!("Q[x]/(f_{d})"),
        };
        (format!("Mat_4({f})"), ef)
    };
    CMFactorData {
        d,
        dimension: euler_phi(d) / 2,
        cm_type: cm_type(d),
        simple: stab.len() == 1,
        power: stab.len(),
        stabilizer: stab,
        exceptional,
        isogenous_to: (d % 4 == 2).then_some(d / 2),
        endo_algebra,
        endo_field,
    }
}

/// One factor `X_d` for each `d | m`, `d` not 1 or 2.
pub fn decompose(m: u64) -> Result<DecompositionReport> {
    if m < 3 {
        return Err(Error::BadModulus(m));
    }
    let factors: Vec<CMFactorData> = divisors(m).into_iter().filter(|&d| d > 2).map(factor).collect();
    let total: u64 = factors.iter().map(|f| f.dimension).sum();
    assert_eq!(total, genus(m), "factor dimensions must add up to the genus");
    let exc: Vec<u64> = EXCEPTIONAL.iter().copied().filter(|d| m % d == 0).collect();
    let endo_field = if exc.is_empty() {
        format!("Q(zeta_{m})")
    } else {
        let parts: Vec<String> = exc.iter().map(|d| format!("Q(End J_{d})")).collect();
        format!("Q(zeta_{m}) * {}", parts.join(" * "))
    };
    Ok(DecompositionReport {
        m,
        genus: genus(m),
        factors,
        endo_field,
        exceptional_fields: exc.into_iter().map(exceptional_field).collect(),
    })
}

/// The integer matrix of the character-lattice map: rows are units mod `m`,
/// columns the variables `x_i`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CharacterLatticeMap {
    pub m: u64,
    pub rows: Vec<u64>,
    pub columns: Vec<u64>,
    pub matrix: Vec<Vec<i64>>,
}

impl CharacterLatticeMap {
    pub fn apply(&self, f: &MTEquation) -> Vec<i64> {
        assert_eq!(f.m, self.m);
        let mut out = vec![0i64; self.rows.len()];
        for (c, &i) in self.columns.iter().enumerate() {
            let e = f.exponent(i);
            if e != 0 {
                for (r, o) in out.iter_mut().enumerate() {
                    *o += self.matrix[r][c] * e;
                }
            }
        }
        out
    }

    pub fn contains(&self, f: &MTEquation) -> bool {
        self.apply(f).iter().all(|&v| v == 0)
    }

    pub fn to_imat(&self) -> IMat {
        crate::linalg::to_imat(&self.matrix)
    }
}

/// Column of `x_i`: reflex norm of `Phi_d` (inverses of the CM type) at `j`,
/// followed by the norm lift from `(Z/d)^x` to `(Z/m)^x`.
#[allow(non_snake_case)]
pub fn build_E_matrix(m: u64) -> CharacterLatticeMap {
    let rows = units(m);
    let columns = variable_indices(m);
    let mut matrix = vec![vec![0i64; columns.len()]; rows.len()];
    for (c, &i) in columns.iter().enumerate() {
        let g = gcd(i, m);
        let (d, j) = (m / g, i / g);
        for a in cm_type(d) {
            let target = inv_mod(a, d).unwrap() * j % d;
            for (r, &u) in rows.iter().enumerate() {
                if u % d == target {
                    matrix[r][c] += 1;
                }
            }
        }
    }
    CharacterLatticeMap { m, rows, columns, matrix }
}

/// Hermite-normalized basis of the kernel of the character-lattice map.
pub fn mt_equations(m: u64) -> Result<Vec<MTEquation>> {
    if m < 3 {
        return Err(Error::BadModulus(m));
    }
    let e = build_E_matrix(m);
    let basis = integer_kernel(&e.to_imat(), e.columns.len());
    Ok(basis
        .into_iter()
        .map(|v| {
            let ex = e.columns.iter().zip(&v).map(|(&i, c)| (i, c.to_i64().expect("small exponent")));
            let f = MTEquation::from_exponents(m, ex).expect("kernel vectors have total degree 0");
            debug_assert!(e.contains(&f));
            f
        })
        .collect())
}

/// `f_a = x_a prod_{b in B} x_{p^k - b} / prod_{c in C} x_c`, checked against the kernel.
pub fn prime_power_equation(p: u64, k: u32, a: u64, b: &[u64], c: &[u64]) -> Result<MTEquation> {
    let bad = |s: &str| Err(Error::BadPartition(s.to_string()));
    if p < 3 || !crate::arith::is_prime(p) || k < 2 {
        return bad("p must be an odd prime and k >= 2");
    }
    let m = p.pow(k);
    if a == 0 || a >= m || a % p != 0 {
        return bad("a must be a multiple of p in [1, p^k - 1]");
    }
    let step = p.pow(k - 1);
    let mut set: Vec<u64> = (0..p).map(|j| a / p + j * step).collect();
    set.sort_unstable();
    let mut union: Vec<u64> = b.iter().chain(c).copied().collect();
    union.sort_unstable();
    if union != set || b.len() as u64 != (p - 1) / 2 || c.len() as u64 != p.div_ceil(2) {
        return bad(&format!("B, C must split {set:?} into sizes {} and {}", (p - 1) / 2, p.div_ceil(2)));
    }
    let mut ex: BTreeMap<u64, i64> = BTreeMap::new();
    *ex.entry(a).or_default() += 1;
    for &x in b {
        *ex.entry(m - x).or_default() += 1;
    }
    for &x in c {
        *ex.entry(x).or_default() -= 1;
    }
    let f = MTEquation::from_exponents(m, ex)?;
    if !build_E_matrix(m).contains(&f) {
        return Err(Error::NotInKernel(f.to_string()));
    }
    Ok(f)
}

/// A monomial `prod x_j^{d_j}` of total degree zero.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct MTEquation {
    m: u64,
    exponents: BTreeMap<u64, i64>,
}

impl MTEquation {
    pub fn from_exponents(m: u64, ex: impl IntoIterator<Item = (u64, i64)>) -> Result<Self> {
        if m < 3 {
            return Err(Error::BadModulus(m));
        }
        let mut exponents = BTreeMap::new();
        for (j, e) in ex {
            let jr = modulo(j as i64, m);
            if jr == 0 || 2 * jr == m {
                return Err(Error::NotAnEquation(format!("x_{j} is not a variable for m = {m}")));
            }
            *exponents.entry(jr).or_insert(0) += e;
        }
        exponents.retain(|_, e| *e != 0);
        if exponents.values().sum::<i64>() != 0 {
            return Err(Error::NotAnEquation("total degree must be 0".into()));
        }
        Ok(MTEquation { m, exponents })
    }

    /// The symplectic relation `x_j x_{m-j} / x_k x_{m-k}`.
    pub fn symplectic(m: u64, j: u64, k: u64) -> Result<Self> {
        Self::from_exponents(m, [(j, 1), (m - j, 1), (k, -1), (m - k, -1)])
    }

    pub fn m(&self) -> u64 {
        self.m
    }

    pub fn exponent(&self, j: u64) -> i64 {
        self.exponents.get(&j).copied().unwrap_or(0)
    }

    pub fn exponents(&self) -> &BTreeMap<u64, i64> {
        &self.exponents
    }

    pub fn is_trivial(&self) -> bool {
        self.exponents.is_empty()
    }

    /// `q = sum of |d_j|` over negative exponents.
    pub fn q(&self) -> i64 {
        self.exponents.values().filter(|e| **e < 0).map(|e| -e).sum()
    }

    /// `(j, e_j = d_j + 2q)` over every variable index, ascending.
    pub fn normalized_exponents(&self) -> Vec<(u64, i64)> {
        let q2 = 2 * self.q();
        if q2 == 0 {
            return Vec::new();
        }
        variable_indices(self.m).into_iter().map(|j| (j, self.exponent(j) + q2)).collect()
    }

    /// `n = sum e_j = 4qg`.
    pub fn n(&self) -> i64 {
        self.normalized_exponents().iter().map(|(_, e)| e).sum()
    }

    /// `e(f) = sum j e_j`.
    pub fn e_of_f(&self) -> i64 {
        self.normalized_exponents().iter().map(|&(j, e)| j as i64 * e).sum()
    }

    pub fn mul(&self, o: &Self) -> Self {
        assert_eq!(self.m, o.m);
        let ex = self.exponents.iter().chain(&o.exponents).map(|(&j, &e)| (j, e));
        Self::from_exponents(self.m, ex).unwrap()
    }

    pub fn pow(&self, k: i64) -> Self {
        Self::from_exponents(self.m, self.exponents.iter().map(|(&j, &e)| (j, e * k))).unwrap()
    }

    /// `sigma_u` permutes the variables: `x_j -> x_{uj}`.
    pub fn galois(&self, u: u64) -> Result<Self> {
        if gcd(u, self.m) != 1 {
            return Err(Error::NotCoprime(u as i64, self.m));
        }
        Self::from_exponents(self.m, self.exponents.iter().map(|(&j, &e)| (j * u % self.m, e)))
    }

    /// Parses `x_9*x_12/x_8/x_13`. Every factor after the first `/` is a
    /// denominator, so `x_10*x_12/x_8*x_14` also reads as written by hand.
    pub fn parse(m: u64, s: &str) -> Result<Self> {
        let s: String = s.chars().filter(|c| !c.is_whitespace()).collect();
        if s == "1" {
            return Self::from_exponents(m, []);
        }
        let (num, den) = match s.split_once('/') {
            Some((a, b)) => (a.to_string(), b.replace('/', "*")),
            None => (s.clone(), String::new()),
        };
        let mut ex = Vec::new();
        for (part, sign) in [(num, 1i64), (den, -1i64)] {
            if part.is_empty() || part == "1" {
                continue;
            }
            for tok in part.split('*') {
                let bad = || Error::Parse(format!("bad factor {tok:?} in {s:?}"));
                let body = tok.strip_prefix("x_").ok_or_else(bad)?;
                let body = body.trim_start_matches('{').replace('}', "");
                let (j, e) = match body.split_once('^') {
                    Some((j, e)) => (j.parse::<u64>().map_err(|_| bad())?, e.parse::<i64>().map_err(|_| bad())?),
                    None => (body.parse::<u64>().map_err(|_| bad())?, 1),
                };
                if j == 0 || j >= m {
                    return Err(Error::NotAnEquation(format!("x_{j} is out of range for m = {m}")));
                }
                ex.push((j, sign * e));
            }
        }
        Self::from_exponents(m, ex)
    }
}

impl fmt::Display for MTEquation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.exponents.is_empty() {
            return write!(f, "1");
        }
        let term = |j: u64, e: i64| if e == 1 { format!("x_{j}") } else { format!("x_{j}^{e}") };
        let num: Vec<String> = self.exponents.iter().filter(|(_, e)| **e > 0).map(|(&j, &e)| term(j, e)).collect();
        let den: Vec<String> = self.exponents.iter().filter(|(_, e)| **e < 0).map(|(&j, &e)| term(j, -e)).collect();
        write!(f, "{}", if num.is_empty() { "1".to_string() } else { num.join("*") })?;
        for d in den {
            write!(f, "/{d}")?;
        }
        Ok(())
    }
}

struct ExponentMap<'a>(&'a BTreeMap<u64, i64>);

impl Serialize for ExponentMap<'_> {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let mut map = s.serialize_map(Some(self.0.len()))?;
        for (j, e) in self.0.iter().filter(|(_, e)| **e > 0).chain(self.0.iter().filter(|(_, e)| **e < 0)) {
            map.serialize_entry(&j.to_string(), e)?;
        }
        map.end()
    }
}

impl Serialize for MTEquation {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let mut map = s.serialize_map(Some(2))?;
        map.serialize_entry("m", &self.m)?;
        map.serialize_entry("exponents", &ExponentMap(&self.exponents))?;
        map.end()
    }
}

/// Exponent vector of `f` in the column order of `build_E_matrix(m)`.
pub fn exponent_vector(f: &MTEquation) -> Vec<BigInt> {
    variable_indices(f.m).into_iter().map(|j| BigInt::from(f.exponent(j))).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::characters::{char_of_equation, Membership};

    #[test]
    fn cm_types_and_stabilizers() {
        assert_eq!(cm_type(5), vec![1, 2]);
        assert_eq!(cm_type(3), vec![1]);
        assert_eq!(cm_type(15), vec![1, 2, 4, 7]);
        assert_eq!(stabilizer(20), vec![1, 3, 7, 9]);
        assert_eq!(stabilizer(24), vec![1, 5, 7, 11]);
        assert_eq!(stabilizer(60), vec![1, 11, 19, 29]);
        assert_eq!(stabilizer(8), vec![1, 3]);
        assert_eq!(stabilizer(15), vec![1]);
        assert_eq!(stabilizer(14), vec![1]);
    }

    #[test]
    fn decomposition() {
        let r = decompose(15).unwrap();
        let dims: Vec<(u64, u64)> = r.factors.iter().map(|f| (f.d, f.dimension)).collect();
        assert_eq!(dims, vec![(3, 1), (5, 2), (15, 4)]);
        assert!(r.factors.iter().all(|f| f.simple));
        let r4 = decompose(4).unwrap();
        assert_eq!(r4.factors.len(), 1);
        assert_eq!(r4.factors[0].stabilizer, vec![1]);
        let r24 = decompose(24).unwrap();
        let x24 = r24.factors.iter().find(|f| f.d == 24).unwrap();
        assert!(x24.exceptional && x24.power == 4);
        assert_eq!(r24.exceptional_fields[0], ExceptionalField::Polynomial { d: 24, coefficients: F24.to_vec() });
        assert!(decompose(2).is_err());
    }

    #[test]
    fn kernel_ranks_and_examples() {
        assert!(mt_equations(3).unwrap().is_empty());
        let k5 = mt_equations(5).unwrap();
        assert_eq!(k5.len(), 1);
        assert_eq!(k5[0].pow(if k5[0].exponent(1) > 0 { 1 } else { -1 }).to_string(), "x_1*x_4/x_2/x_3");
        let e15 = build_E_matrix(15);
        assert_eq!(mt_equations(15).unwrap().len(), 9);
        for s in [
            "x_1*x_14/x_7/x_8",
            "x_2*x_13/x_7/x_8",
            "x_3*x_12/x_7/x_8",
            "x_4*x_11/x_7/x_8",
            "x_5*x_10/x_7/x_8",
            "x_6*x_9/x_7/x_8",
            "x_9*x_12/x_8/x_13",
            "x_11*x_12/x_9/x_14",
            "x_10*x_12/x_8/x_14",
        ] {
            assert!(e15.contains(&MTEquation::parse(15, s).unwrap()), "{s}");
        }
        let e10 = build_E_matrix(10);
        assert_eq!(mt_equations(10).unwrap().len(), 5);
        for s in ["x_1/x_4", "x_2/x_3", "x_1*x_9/x_4/x_6", "x_2*x_8/x_4/x_6", "x_3*x_7/x_4/x_6"] {
            assert!(e10.contains(&MTEquation::parse(10, s).unwrap()), "{s}");
        }
    }

    #[test]
    fn equations_give_b_characters() {
        let f = MTEquation::parse(5, "x_1*x_4/x_2/x_3").unwrap();
        assert_eq!(f.normalized_exponents(), vec![(1, 5), (2, 3), (3, 3), (4, 5)]);
        assert_eq!(f.n(), 16);
        let g = char_of_equation(&f);
        assert_eq!(g.weight(1), crate::arith::rat(24, 1));
        assert_eq!(g.membership(), Membership { in_a: true, in_b: true });
        let f15 = MTEquation::parse(15, "x_10*x_12/x_8*x_14").unwrap();
        assert_eq!(char_of_equation(&f15).weight(1), crate::arith::rat(84, 1));
    }

    #[test]
    fn prime_power_family() {
        let f = prime_power_equation(3, 2, 3, &[4], &[1, 7]).unwrap();
        assert!(build_E_matrix(9).contains(&f));
        let f2 = prime_power_equation(3, 2, 3, &[7], &[1, 4]).unwrap();
        let ratio = f2.mul(&f.pow(-1));
        assert!(build_E_matrix(9).contains(&ratio));
        assert!(prime_power_equation(5, 2, 5, &[1, 6], &[11, 16, 21]).is_ok());
        assert!(prime_power_equation(3, 2, 3, &[1, 4], &[7]).is_err());
    }

    #[test]
    fn text_and_json() {
        let f = MTEquation::parse(15, "x_9*x_12/x_8/x_13").unwrap();
        assert_eq!(f.to_string(), "x_9*x_12/x_8/x_13");
        assert_eq!(
            serde_json::to_string(&f).unwrap(),
            r#"{"m":15,"exponents":{"9":1,"12":1,"8":-1,"13":-1}}"#
        );
        assert!(MTEquation::parse(15, "x_{10}x_{12}").is_err());
    }
}
