//! Characters of `G_m^n`, their weights, and functions on `A_m = (1/m)Z/Z`.

use crate::arith::{divisors, frac_upper, gcd, modulo, rat, units, Rational};
use crate::error::{Error, Result};
use crate::linalg::{ColumnHermite, IMat};
use crate::mumford_tate::MTEquation;
use num_bigint::BigInt;
use num_traits::{ToPrimitive, Zero};
use serde::ser::SerializeMap;
use serde::{Serialize, Serializer};
use std::collections::HashMap;
use std::fmt;
use std::sync::{Arc, LazyLock, RwLock};

/// A zero-sum tuple `(a_0, ..., a_{n+1})` of residues mod `m`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct FermatCharacter {
    m: u64,
    entries: Vec<u64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct Membership {
    pub in_a: bool,
    pub in_b: bool,
}

impl FermatCharacter {
    pub fn new(m: u64, entries: &[i64]) -> Result<Self> {
        if m < 2 {
            return Err(Error::BadModulus(m));
        }
        if entries.len() < 3 {
            return Err(Error::Parse(format!("a character needs at least 3 entries, got {}", entries.len())));
        }
        let entries: Vec<u64> = entries.iter().map(|&a| modulo(a, m)).collect();
        if entries.iter().sum::<u64>() % m != 0 {
            return Err(Error::Parse(format!("entries of {entries:?} do not sum to 0 mod {m}")));
        }
        Ok(FermatCharacter { m, entries })
    }

    /// `gamma_i = (i, i, -2i)`.
    pub fn gamma(i: i64, m: u64) -> Result<Self> {
        let r = modulo(i, m);
        if r == 0 || (2 * r) % m == 0 {
            return Err(Error::BadIndex(i, m));
        }
        Self::new(m, &[r as i64, r as i64, -2 * r as i64])
    }

    pub fn modulus(&self) -> u64 {
        self.m
    }

    pub fn entries(&self) -> &[u64] {
        &self.entries
    }

    /// The `n` of `G_m^n`: number of entries minus two.
    pub fn n(&self) -> usize {
        self.entries.len() - 2
    }

    pub fn concat(&self, o: &Self) -> Self {
        assert_eq!(self.m, o.m);
        let mut entries = self.entries.clone();
        entries.extend_from_slice(&o.entries);
        FermatCharacter { m: self.m, entries }
    }

    pub fn scale(&self, u: i64) -> Result<Self> {
        let ur = modulo(u, self.m);
        if gcd(ur, self.m) != 1 {
            return Err(Error::NotCoprime(u, self.m));
        }
        Ok(FermatCharacter { m: self.m, entries: self.entries.iter().map(|&a| a * ur % self.m).collect() })
    }

    /// `<t alpha> = sum_i [t a_i] / m` with `[a]` in `[0, m-1]`.
    pub fn weight(&self, t: i64) -> Rational {
        let tr = modulo(t, self.m);
        let s: u64 = self.entries.iter().map(|&a| a * tr % self.m).sum();
        rat(s as i64, self.m as i64)
    }

    pub fn membership(&self) -> Membership {
        let in_a = self.entries.iter().all(|&a| a != 0);
        let target = rat(self.n() as i64, 2) + rat(1, 1);
        let in_b = in_a && units(self.m).iter().all(|&t| self.weight(t as i64) == target);
        Membership { in_a, in_b }
    }

    /// Occurrence counts as a function on `A_m`.
    pub fn to_am_function(&self) -> AmFunction {
        let mut values = vec![0i64; self.m as usize];
        for &a in &self.entries {
            values[a as usize] += 1;
        }
        AmFunction { m: self.m, values }
    }

    /// `gamma_f = gamma_1^{*e_1} * ... ` with `e_j = d_j + 2q`, in index order.
    pub fn of_equation(f: &MTEquation) -> Self {
        let m = f.m();
        let mut entries = Vec::new();
        for (j, e) in f.normalized_exponents() {
            for _ in 0..e {
                let r = j % m;
                entries.extend_from_slice(&[r, r, (2 * m - 2 * r % m) % m]);
            }
        }
        if entries.is_empty() {
            // the trivial equation has the empty product; keep a valid zero-sum shape
            entries = vec![0, 0, 0];
        }
        FermatCharacter { m, entries }
    }
}

/// `char_of_equation(f)`.
pub fn char_of_equation(f: &MTEquation) -> FermatCharacter {
    FermatCharacter::of_equation(f)
}

impl fmt::Display for FermatCharacter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let es: Vec<String> = self.entries.iter().map(|a| a.to_string()).collect();
        write!(f, "({}) mod {}", es.join(","), self.m)
    }
}

impl Serialize for FermatCharacter {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

/// An integer-valued function on `A_m`, index `k` standing for `k/m`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct AmFunction {
    m: u64,
    values: Vec<i64>,
}

impl AmFunction {
    pub fn zero(m: u64) -> Self {
        AmFunction { m, values: vec![0; m as usize] }
    }

    pub fn from_values(m: u64, values: Vec<i64>) -> Self {
        assert_eq!(values.len(), m as usize);
        AmFunction { m, values }
    }

    /// `[k/m]`.
    pub fn delta(k: i64, m: u64) -> Self {
        let mut f = Self::zero(m);
        f.values[modulo(k, m) as usize] = 1;
        f
    }

    pub fn modulus(&self) -> u64 {
        self.m
    }

    pub fn values(&self) -> &[i64] {
        &self.values
    }

    pub fn at(&self, k: i64) -> i64 {
        self.values[modulo(k, self.m) as usize]
    }

    pub fn add(&self, o: &Self) -> Self {
        assert_eq!(self.m, o.m);
        AmFunction { m: self.m, values: self.values.iter().zip(&o.values).map(|(a, b)| a + b).collect() }
    }

    pub fn scale(&self, c: i64) -> Self {
        AmFunction { m: self.m, values: self.values.iter().map(|a| a * c).collect() }
    }

    pub fn sub(&self, o: &Self) -> Self {
        self.add(&o.scale(-1))
    }

    pub fn is_zero(&self) -> bool {
        self.values.iter().all(|&v| v == 0)
    }

    /// `u -> sum_a {a} f(ua)` with `{a}` in `(0, 1]`.
    pub fn weight_function(&self, u: i64) -> Rational {
        let m = self.m;
        let ur = modulo(u, m);
        let mut s = Rational::zero();
        for k in 0..m {
            let v = self.values[(k * ur % m) as usize];
            if v != 0 {
                s += frac_upper(&rat(k as i64, m as i64)) * Rational::from_integer(v.into());
            }
        }
        s
    }

    /// The common weight over all units, if constant.
    pub fn constant_weight(&self) -> Option<Rational> {
        let us = units(self.m);
        let w = self.weight_function(us[0] as i64);
        us[1..].iter().all(|&u| self.weight_function(u as i64) == w).then_some(w)
    }
}

impl Serialize for AmFunction {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let nz: Vec<(usize, i64)> = self.values.iter().copied().enumerate().filter(|(_, v)| *v != 0).collect();
        let mut map = s.serialize_map(Some(nz.len()))?;
        for (k, v) in nz {
            map.serialize_entry(&format!("{}/{}", k, self.m), &v)?;
        }
        map.end()
    }
}

/// `epsilon_{d,a}` with `a = k/m`: `sum_{j<d} [a + j/d] + [-da]`, multiplicities added.
pub fn epsilon(d: u64, k: i64, m: u64) -> Result<AmFunction> {
    if d == 0 || m % d != 0 {
        return Err(Error::BadDivisor(d, m));
    }
    if modulo(k, m) == 0 {
        return Err(Error::ZeroArgument);
    }
    let mut f = AmFunction::zero(m);
    let step = (m / d) as i64;
    for j in 0..d as i64 {
        f.values[modulo(k + j * step, m) as usize] += 1;
    }
    f.values[modulo(-(d as i64) * k, m) as usize] += 1;
    Ok(f)
}

/// One column of the distribution system: `epsilon_{d, k/m}` with `k` in `(0, m/d]`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct EpsilonIndex {
    pub d: u64,
    pub k: u64,
}

impl EpsilonIndex {
    /// `a = k/m` as a rational in `(0, 1/d]`.
    pub fn a(&self, m: u64) -> Rational {
        rat(self.k as i64, m as i64)
    }
}

struct DistributionSystem {
    columns: Vec<EpsilonIndex>,
    hermite: ColumnHermite,
}

static SYSTEMS: LazyLock<RwLock<HashMap<u64, Arc<DistributionSystem>>>> = LazyLock::new(Default::default);

fn system(m: u64) -> Arc<DistributionSystem> {
    if let Some(s) = SYSTEMS.read().unwrap().get(&m) {
        return s.clone();
    }
    // epsilon_{d,a} depends on a only modulo 1/d; d = 1 excludes the zero class
    let mut columns = Vec::new();
    for d in divisors(m) {
        let width = m / d;
        let ks: Vec<u64> = if d == 1 { (1..m).collect() } else { (1..=width).collect() };
        columns.extend(ks.into_iter().map(|k| EpsilonIndex { d, k }));
    }
    let cols: Vec<AmFunction> = columns.iter().map(|c| epsilon(c.d, c.k as i64, m).unwrap()).collect();
    let mat: IMat = (0..m as usize)
        .map(|r| cols.iter().map(|c| BigInt::from(c.values[r])).collect())
        .collect();
    let s = Arc::new(DistributionSystem { columns, hermite: ColumnHermite::new(&mat) });
    SYSTEMS.write().unwrap().entry(m).or_insert(s).clone()
}

/// Integer coefficients with `2 f = sum c_{d,a} epsilon_{d,a}`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Decomposition {
    pub m: u64,
    pub terms: Vec<(EpsilonIndex, i64)>,
}

impl Decomposition {
    pub fn expand(&self) -> AmFunction {
        let mut f = AmFunction::zero(self.m);
        for (ix, c) in &self.terms {
            f = f.add(&epsilon(ix.d, ix.k as i64, self.m).unwrap().scale(*c));
        }
        f
    }
}

/// Decompose `2f` over the `epsilon_{d,a}`. The free coordinates of the
/// Hermite solution are set to zero, which makes the answer deterministic.
pub fn decompose_distribution(f: &AmFunction) -> Result<Decomposition> {
    if f.constant_weight().is_none() {
        return Err(Error::NotConstantWeight);
    }
    let sys = system(f.m);
    let b: Vec<BigInt> = f.values.iter().map(|&v| BigInt::from(2 * v)).collect();
    let x = sys.hermite.solve(&b).ok_or(Error::NoIntegralSolution)?;
    let terms: Vec<(EpsilonIndex, i64)> = sys
        .columns
        .iter()
        .zip(&x)
        .filter(|(_, c)| !c.is_zero())
        .map(|(ix, c)| (*ix, c.to_i64().expect("coefficient fits in i64")))
        .collect();
    let dec = Decomposition { m: f.m, terms };
    if dec.expand() != f.scale(2) {
        return Err(Error::NoIntegralSolution);
    }
    Ok(dec)
}
