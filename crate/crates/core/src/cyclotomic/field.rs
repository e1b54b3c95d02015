//! Per-conductor tables, built once and shared.

use crate::arith::{divisors, euler_phi, gcd, Rational};
use crate::linalg::inverse_rational;
use crate::numeric::{cos_sin_pi_frac, Real};
use num_bigint::BigInt;
use num_traits::Zero;
use std::collections::{HashMap, HashSet};
use std::sync::{Arc, LazyLock, RwLock};

/// Reduction data for `Q(zeta_n)`.
#[derive(Debug)]
pub struct FieldData {
    pub n: u64,
    pub phi: usize,
    /// `Phi_n`, lowest degree first, monic.
    pub poly: Vec<i64>,
    /// `x^k mod Phi_n` for `0 <= k < n`.
    pub pow: Vec<Vec<i64>>,
}

fn mobius(n: u64) -> i32 {
    let f = crate::arith::factor(n);
    if f.iter().any(|&(_, e)| e > 1) {
        0
    } else if f.len() % 2 == 0 {
        1
    } else {
        -1
    }
}

/// The `n`-th cyclotomic polynomial as `prod_{d | n} (x^d - 1)^mu(n/d)`.
pub fn cyclotomic_polynomial(n: u64) -> Vec<i64> {
    let mut num: Vec<i128> = vec![1];
    let mut dens = Vec::new();
    for d in divisors(n) {
        match mobius(n / d) {
            1 => {
                let mut r = vec![0i128; num.len() + d as usize];
                for (i, &c) in num.iter().enumerate() {
                    r[i + d as usize] += c;
                    r[i] -= c;
                }
                num = r;
            }
            -1 => dens.push(d as usize),
            _ => {}
        }
    }
    for d in dens {
        // exact division by x^d - 1, from the top
        let deg = num.len() - 1;
        let mut q = vec![0i128; deg + 1 - d];
        let mut r = num.clone();
        for k in (d..=deg).rev() {
            let c = r[k];
            q[k - d] = c;
            r[k] = 0;
            r[k - d] += c;
        }
        debug_assert!(r.iter().all(|&c| c == 0));
        num = q;
    }
    num.into_iter().map(|c| i64::try_from(c).expect("cyclotomic coefficient overflow")).collect()
}

impl FieldData {
    fn build(n: u64) -> Self {
        let poly = cyclotomic_polynomial(n);
        let phi = poly.len() - 1;
        debug_assert_eq!(phi as u64, euler_phi(n));
        let mut pow = Vec::with_capacity(n as usize);
        let mut cur = vec![0i64; phi];
        cur[0] = 1;
        for k in 0..n as usize {
            if k > 0 {
                let top = cur[phi - 1];
                let mut next = vec![0i64; phi];
                for i in (1..phi).rev() {
                    next[i] = cur[i - 1];
                }
                if top != 0 {
                    for i in 0..phi {
                        let v = next[i] as i128 - top as i128 * poly[i] as i128;
                        next[i] = i64::try_from(v).expect("power table overflow");
                    }
                }
                cur = next;
            }
            pow.push(cur.clone());
        }
        FieldData { n, phi, poly, pow }
    }

    /// Reduce a coefficient vector indexed by exponents `0..n`.
    pub fn reduce(&self, mut acc: Vec<BigInt>) -> Vec<BigInt> {
        let tail = acc.split_off(self.phi);
        for (k, c) in tail.into_iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            for (t, &p) in self.pow[k + self.phi].iter().enumerate() {
                if p != 0 {
                    acc[t] += &c * p;
                }
            }
        }
        acc
    }
}

static FIELDS: LazyLock<RwLock<HashMap<u64, Arc<FieldData>>>> = LazyLock::new(Default::default);

pub fn field(n: u64) -> Arc<FieldData> {
    if let Some(f) = FIELDS.read().unwrap().get(&n) {
        return f.clone();
    }
    let f = Arc::new(FieldData::build(n));
    FIELDS.write().unwrap().entry(n).or_insert(f).clone()
}

type EmbedTable = Arc<Vec<(Real, Real)>>;
static EMBED: LazyLock<RwLock<HashMap<(u64, u32), EmbedTable>>> = LazyLock::new(Default::default);

/// `(cos, sin)(2 pi k / n)` for `k < phi(n)` at width `w`.
pub fn embed_table(n: u64, w: u32) -> EmbedTable {
    if let Some(t) = EMBED.read().unwrap().get(&(n, w)) {
        return t.clone();
    }
    let phi = field(n).phi;
    let t: Vec<(Real, Real)> = (0..phi).map(|k| cos_sin_pi_frac(2 * k as i64, n, w)).collect();
    let t = Arc::new(t);
    EMBED.write().unwrap().entry((n, w)).or_insert(t).clone()
}

static KERNELS: LazyLock<RwLock<HashMap<(u64, u64), Arc<Vec<i64>>>>> = LazyLock::new(Default::default);

/// Generators of the kernel of `(Z/n)^x -> (Z/d)^x`.
pub fn kernel_generators(n: u64, d: u64) -> Arc<Vec<i64>> {
    if let Some(k) = KERNELS.read().unwrap().get(&(n, d)) {
        return k.clone();
    }
    let members: Vec<u64> = (0..n / d)
        .map(|t| (1 + d * t) % n)
        .filter(|&u| gcd(u, n) == 1)
        .collect();
    let mut span: HashSet<u64> = HashSet::from([1 % n]);
    let mut gens = Vec::new();
    for &u in &members {
        if span.contains(&u) {
            continue;
        }
        gens.push(u as i64);
        // close the span under multiplication by u
        let mut frontier: Vec<u64> = span.iter().copied().collect();
        while let Some(x) = frontier.pop() {
            let y = x * u % n;
            if span.insert(y) {
                frontier.push(y);
            }
            for &g in &gens {
                let y = x * g as u64 % n;
                if span.insert(y) {
                    frontier.push(y);
                }
            }
        }
    }
    let gens = Arc::new(gens);
    KERNELS.write().unwrap().entry((n, d)).or_insert(gens).clone()
}

/// Left inverse of the lift `Q(zeta_d) -> Q(zeta_n)` on a set of pivot coordinates.
#[derive(Debug)]
pub struct LiftSolver {
    pub pivots: Vec<usize>,
    pub inv: Vec<Vec<Rational>>,
}

static SOLVERS: LazyLock<RwLock<HashMap<(u64, u64), Arc<LiftSolver>>>> = LazyLock::new(Default::default);

pub fn lift_solver(n: u64, d: u64) -> Arc<LiftSolver> {
    if let Some(s) = SOLVERS.read().unwrap().get(&(n, d)) {
        return s.clone();
    }
    let fnn = field(n);
    let fd = field(d);
    let step = (n / d) as usize;
    // row r of the lift matrix: coordinate r of zeta_n^(j step) for j < phi(d)
    let row = |r: usize| -> Vec<Rational> {
        (0..fd.phi).map(|j| Rational::from_integer(fnn.pow[j * step][r].into())).collect()
    };
    let mut basis: Vec<(usize, Vec<Rational>)> = Vec::new();
    let mut pivots = Vec::new();
    for r in 0..fnn.phi {
        if pivots.len() == fd.phi {
            break;
        }
        let mut v = row(r);
        for (pc, b) in &basis {
            if !v[*pc].is_zero() {
                let f = v[*pc].clone() / &b[*pc];
                for (x, y) in v.iter_mut().zip(b) {
                    *x -= &f * y;
                }
            }
        }
        if let Some(pc) = v.iter().position(|x| !x.is_zero()) {
            basis.push((pc, v));
            pivots.push(r);
        }
    }
    assert_eq!(pivots.len(), fd.phi, "lift matrix has full column rank");
    let sub: Vec<Vec<Rational>> = pivots.iter().map(|&r| row(r)).collect();
    let inv = inverse_rational(&sub).expect("pivot block invertible");
    let s = Arc::new(LiftSolver { pivots, inv });
    SOLVERS.write().unwrap().entry((n, d)).or_insert(s).clone()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_cyclotomic_polynomials() {
        assert_eq!(cyclotomic_polynomial(1), vec![-1, 1]);
        assert_eq!(cyclotomic_polynomial(2), vec![1, 1]);
        assert_eq!(cyclotomic_polynomial(6), vec![1, -1, 1]);
        assert_eq!(cyclotomic_polynomial(12), vec![1, 0, -1, 0, 1]);
        // Phi_105 is the first with a coefficient -2
        assert!(cyclotomic_polynomial(105).contains(&-2));
    }

    #[test]
    fn kernel_group_size() {
        let g = kernel_generators(60, 15);
        assert!(!g.is_empty());
        assert!(g.iter().all(|&u| u % 15 == 1));
    }
}
