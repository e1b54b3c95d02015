//! Square roots in `Q(zeta_L)` by q-adic lifting.
//!
//! For a prime `q` not dividing `L`, `Q(zeta_L) (x) Q_q` splits into `c`
//! unramified fields of degree `f = ord_L(q)`. The candidate root is computed
//! in each component (Cipolla, then Hensel), the coordinates are recovered
//! from traces against a tensor-product integral basis, and every sign
//! pattern is verified by exact squaring. A quadratic non-residue in any
//! component proves there is no root in `Q(zeta_L)`.

use super::field::field;
use super::CycloElement;
use crate::arith::{carmichael, divisors, euler_phi, factor, is_prime, mult_order, Rational};
use crate::error::{Error, Result};
use crate::ffield::FiniteField;
use crate::linalg::inverse_rational;
use crate::padic::{mod_inverse, UElem, Unramified};
use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use std::collections::HashMap;
use std::sync::{Arc, LazyLock, RwLock};

/// Largest number of q-adic components tolerated (sign patterns grow as `2^(c-1)`).
const MAX_COMPONENTS: u64 = 8;

/// Square root of `x` in the first candidate conductor that contains one.
///
/// The witness is sign-normalized: non-negative real part, or non-negative
/// imaginary part when it is purely imaginary. `None` only means the search
/// failed in every candidate.
pub fn sqrt_in_cyclotomic(x: &CycloElement, candidates: &[u64], prec: u32) -> Result<Option<(u64, CycloElement)>> {
    if x.is_zero() {
        return Err(Error::ZeroInput);
    }
    for &l in candidates {
        let Ok(xl) = x.change_conductor(l) else { continue };
        if let Some(y) = sqrt_in_conductor(&xl, prec) {
            return Ok(Some((l, y)));
        }
    }
    Ok(None)
}

/// Square root inside the conductor of `x` itself.
pub fn sqrt_in_conductor(x: &CycloElement, prec: u32) -> Option<CycloElement> {
    if x.is_zero() {
        return Some(x.clone());
    }
    let mut l = x.conductor();
    let mut xl = x.clone();
    if l % 4 == 2 {
        l /= 2;
        xl = x.descend(l)?;
    }
    let y = if let Some(r) = xl.as_rational().filter(|_| l <= 2) {
        rational_sqrt(&r).map(|s| CycloElement::from_rational(&s))?
    } else {
        padic_sqrt(&xl, l)?
    };
    Some(normalize_sign(y, prec).lift(x.conductor()))
}

fn rational_sqrt(r: &Rational) -> Option<Rational> {
    if r.is_negative() {
        return None;
    }
    let a = r.numer().sqrt();
    let b = r.denom().sqrt();
    (&a * &a == *r.numer() && &b * &b == *r.denom()).then(|| Rational::new(a, b))
}

/// Pick the sign with non-negative real part (imaginary part if purely imaginary).
pub(crate) fn normalize_sign(y: CycloElement, prec: u32) -> CycloElement {
    if y.conj() == y.neg() {
        let v = y.embed(prec.max(64));
        return if v.im.is_negative() { y.neg() } else { y };
    }
    let mut p = prec.max(64);
    loop {
        let v = y.embed(p);
        if v.re.log2_floor().is_some_and(|l| l > -(p as i64) / 2) {
            return if v.re.is_negative() { y.neg() } else { y };
        }
        p *= 2;
    }
}

/// Ramanujan sum `c_{p^e}(k) = Tr(zeta_{p^e}^k)`.
fn ramanujan_pp(p: u64, e: u32, k: i64) -> i64 {
    let pe = p.pow(e) as i64;
    let pe1 = p.pow(e - 1) as i64;
    if k.rem_euclid(pe) == 0 {
        pe - pe1
    } else if k.rem_euclid(pe1) == 0 {
        -pe1
    } else {
        0
    }
}

static TRACE_INV: LazyLock<RwLock<HashMap<u64, Arc<Vec<Vec<Rational>>>>>> = LazyLock::new(Default::default);

/// Inverse of the Gram matrix `Tr(zeta^(i'-i))` on the power basis of `Q(zeta_{p^e})`.
fn trace_gram_inverse(p: u64, e: u32) -> Arc<Vec<Vec<Rational>>> {
    let pe = p.pow(e);
    if let Some(m) = TRACE_INV.read().unwrap().get(&pe) {
        return m.clone();
    }
    let phi = euler_phi(pe) as usize;
    let inv = if e == 1 {
        // (pI - J)^(-1) = (I + J) / p
        (0..phi)
            .map(|i| {
                (0..phi)
                    .map(|j| Rational::new(BigInt::from(1 + (i == j) as i64), BigInt::from(p)))
                    .collect()
            })
            .collect()
    } else {
        let t: Vec<Vec<Rational>> = (0..phi)
            .map(|i| {
                (0..phi)
                    .map(|j| Rational::from_integer(ramanujan_pp(p, e, j as i64 - i as i64).into()))
                    .collect()
            })
            .collect();
        inverse_rational(&t).expect("trace form is nondegenerate")
    };
    let inv = Arc::new(inv);
    TRACE_INV.write().unwrap().entry(pe).or_insert(inv).clone()
}

/// Tensor basis `prod_t zeta_{P_t}^{i_t}` of `Z[zeta_L]` over the prime-power factors.
struct TensorBasis {
    /// `(p, e, phi(p^e), stride)` per factor.
    axes: Vec<(u64, u32, usize, usize)>,
    /// Exponent `E(b)` with `b = zeta_L^E(b)`.
    exps: Vec<u64>,
}

impl TensorBasis {
    fn new(l: u64) -> Self {
        let fs = factor(l);
        let mut axes = Vec::new();
        let mut stride = 1usize;
        for &(p, e) in &fs {
            let ph = euler_phi(p.pow(e)) as usize;
            axes.push((p, e, ph, stride));
            stride *= ph;
        }
        let total = stride;
        let exps = (0..total)
            .map(|b| {
                axes.iter().fold(0u64, |acc, &(p, e, ph, st)| {
                    let i = (b / st % ph) as u64;
                    (acc + i * (l / p.pow(e))) % l
                })
            })
            .collect();
        TensorBasis { axes, exps }
    }

    /// Apply the inverse Gram matrix, axis by axis, modulo `m`.
    fn apply_inverse(&self, s: &mut [BigInt], m: &BigInt) {
        for &(p, e, ph, st) in &self.axes {
            let inv = trace_gram_inverse(p, e);
            let inv_mod: Vec<Vec<BigInt>> = inv
                .iter()
                .map(|row| {
                    row.iter()
                        .map(|r| (r.numer() * mod_inverse(r.denom(), m).expect("q does not divide L")).mod_floor(m))
                        .collect()
                })
                .collect();
            let total = s.len();
            for base in 0..total {
                if base / st % ph != 0 {
                    continue;
                }
                let fiber: Vec<BigInt> = (0..ph).map(|i| s[base + i * st].clone()).collect();
                for (i, row) in inv_mod.iter().enumerate() {
                    let v: BigInt = row.iter().zip(&fiber).map(|(a, b)| a * b).sum();
                    s[base + i * st] = v.mod_floor(m);
                }
            }
        }
    }
}

/// Order `f` of the auxiliary prime: the smallest divisor of `lambda(L)` with
/// at most `MAX_COMPONENTS` components.
fn component_degree(l: u64) -> u64 {
    let phi = euler_phi(l);
    let lam = carmichael(l);
    divisors(lam).into_iter().find(|&f| phi / f <= MAX_COMPONENTS).unwrap_or(lam)
}

fn auxiliary_primes(l: u64, f: u64) -> impl Iterator<Item = u64> {
    (3u64..).filter(move |&q| is_prime(q) && l % q != 0 && mult_order(q % l, l) == f)
}

fn padic_sqrt(x: &CycloElement, l: u64) -> Option<CycloElement> {
    let fd = field(l);
    let phi = fd.phi;
    let den = x.denominator().clone();
    // y'^2 = num * den with y' = den * y, integral
    let target: Vec<BigInt> = x.numerators().iter().map(|c| c * &den).collect();
    let target_el = CycloElement::from_parts(l, target.clone(), BigInt::one());
    let f = component_degree(l);
    let height = target.iter().map(|c| c.bits()).max().unwrap_or(1);
    let basis = TensorBasis::new(l);
    let mut tried = 0;
    for q in auxiliary_primes(l, f) {
        tried += 1;
        if tried > 24 {
            return None;
        }
        match sqrt_with_prime(&target, &target_el, l, q, f as usize, height, phi, &basis) {
            Outcome::Root(y) => return Some(y.scale(&Rational::new(BigInt::one(), den))),
            Outcome::NonResidue => return None,
            Outcome::BadPrime => continue,
            Outcome::PrecisionExhausted => return None,
        }
    }
    None
}

enum Outcome {
    Root(CycloElement),
    NonResidue,
    BadPrime,
    PrecisionExhausted,
}

#[allow(clippy::too_many_arguments)]
fn sqrt_with_prime(
    target: &[BigInt],
    target_el: &CycloElement,
    l: u64,
    q: u64,
    f: usize,
    height: u64,
    phi: usize,
    basis: &TensorBasis,
) -> Outcome {
    let ff = FiniteField::new(q, f);
    let reps = coset_reps(l, q);
    // residues first: cheap rejection of bad primes and of non-squares
    let w0 = ff.root_of_unity(l);
    let mut roots0 = Vec::with_capacity(reps.len());
    for &k in &reps {
        let p = ff.pow_u(&w0, k);
        let coeffs: Vec<u64> = target.iter().map(|c| c.mod_floor(&BigInt::from(q)).try_into().unwrap()).collect();
        let v = ff.eval(&coeffs, &p);
        if ff.is_zero(&v) {
            return Outcome::BadPrime;
        }
        match ff.sqrt(&v) {
            Some(r) => roots0.push(r),
            None => return Outcome::NonResidue,
        }
    }
    let log2q = (q as f64).log2();
    let mut bits = height / 2 + 64 + 4 * (64 - (phi as u64).leading_zeros() as u64);
    for _ in 0..6 {
        let k = ((bits as f64) / log2q).ceil() as u32 + 1;
        if let Some(y) = attempt(target, target_el, l, &ff, &reps, &roots0, k, phi, basis) {
            return Outcome::Root(y);
        }
        bits *= 2;
    }
    Outcome::PrecisionExhausted
}

/// Representatives of `(Z/L)^x / <q>`.
fn coset_reps(l: u64, q: u64) -> Vec<u64> {
    let mut seen = vec![false; l as usize];
    let mut reps = Vec::new();
    for k in crate::arith::units(l) {
        if seen[k as usize] {
            continue;
        }
        reps.push(k);
        let mut j = k;
        while !seen[j as usize] {
            seen[j as usize] = true;
            j = j * q % l;
        }
    }
    reps
}

#[allow(clippy::too_many_arguments)]
fn attempt(
    target: &[BigInt],
    target_el: &CycloElement,
    l: u64,
    ff: &FiniteField,
    reps: &[u64],
    roots0: &[Vec<u64>],
    k: u32,
    phi: usize,
    basis: &TensorBasis,
) -> Option<CycloElement> {
    let ring = Unramified::new(ff.clone(), k);
    let m = ring.modulus.clone();
    let w0 = ff.root_of_unity(l);
    let w = ring.lift_root_of_unity(&w0, l);
    let winv = ring.inv(&w)?;
    let mut winv_pow: Vec<UElem> = Vec::with_capacity(l as usize);
    let mut cur = ring.one();
    for _ in 0..l {
        winv_pow.push(cur.clone());
        cur = ring.mul(&cur, &winv);
    }
    let fdat = field(l);
    let mut contributions: Vec<Vec<BigInt>> = Vec::with_capacity(reps.len());
    for (j, &kj) in reps.iter().enumerate() {
        let pt = ring.pow(&w, &BigUint::from(kj));
        // Horner evaluation of the target at zeta -> W^kj
        let mut v = ring.zero();
        for c in target.iter().rev() {
            v = ring.mul(&v, &pt);
            v[0] = (&v[0] + c).mod_floor(&m);
        }
        let z = ring.sqrt_from(&v, &roots0[j]);
        let form = ring.trace_form(&z);
        // S_b = Tr(z * W^(-kj E(b)))
        let mut s: Vec<BigInt> = basis
            .exps
            .iter()
            .map(|&e| {
                let wp = &winv_pow[(kj * e % l) as usize];
                let t: BigInt = form.iter().zip(wp).map(|(a, b)| a * b).sum();
                t.mod_floor(&m)
            })
            .collect();
        basis.apply_inverse(&mut s, &m);
        let mut coords = vec![BigInt::zero(); phi];
        for (yb, &e) in s.iter().zip(&basis.exps) {
            if yb.is_zero() {
                continue;
            }
            for (c, &p) in coords.iter_mut().zip(&fdat.pow[e as usize]) {
                if p != 0 {
                    *c += yb * p;
                }
            }
        }
        contributions.push(coords.into_iter().map(|c| c.mod_floor(&m)).collect());
    }
    let half = &m >> 1;
    let slack = &m >> 16;
    let c = contributions.len();
    for mask in 0u64..(1 << (c - 1)) {
        let mut y = contributions[0].clone();
        for (j, cj) in contributions.iter().enumerate().skip(1) {
            let neg = mask >> (j - 1) & 1 == 1;
            for (a, b) in y.iter_mut().zip(cj) {
                if neg {
                    *a -= b;
                } else {
                    *a += b;
                }
            }
        }
        let mut small = true;
        for a in y.iter_mut() {
            *a = a.mod_floor(&m);
            if *a > half {
                *a -= &m;
            }
            if a.abs() > slack {
                small = false;
                break;
            }
        }
        if !small {
            continue;
        }
        let cand = CycloElement::from_parts(l, y, BigInt::one());
        if cand.square() == *target_el {
            return Some(cand);
        }
    }
    let _ = target;
    None
}

/// `sqrt(n)` as the positive real root in `Q(zeta_{4n})`, from quadratic Gauss sums.
pub fn sqrt_of_positive_integer(n: u64) -> CycloElement {
    assert!(n >= 1);
    let mut out = CycloElement::one();
    for (p, e) in factor(n) {
        let s = BigInt::from(p).pow(e / 2);
        out = out.scale(&Rational::from_integer(s));
        if e % 2 == 1 {
            out = out.mul(&sqrt_prime(p));
        }
    }
    assert_eq!(out.square(), CycloElement::from_int(n as i64));
    let v = out.embed(64);
    assert!(!v.re.is_negative());
    out
}

fn sqrt_prime(p: u64) -> CycloElement {
    if p == 2 {
        return CycloElement::from_terms(8, &[(1, Rational::one()), (3, -Rational::one())]);
    }
    // g = sum (a/p) zeta_p^a satisfies g = sqrt(p) or i sqrt(p)
    let terms: Vec<(i64, Rational)> = (1..p)
        .map(|a| (a as i64, Rational::from_integer(crate::arith::legendre(a, p).into())))
        .collect();
    let g = CycloElement::from_terms(p, &terms);
    if p % 4 == 1 {
        g
    } else {
        g.mul(&CycloElement::i()).neg()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::rat;

    #[test]
    fn documented_roots() {
        let (l, w) = sqrt_in_cyclotomic(&CycloElement::from_int(-3), &[3], 128).unwrap().unwrap();
        assert_eq!(l, 3);
        let expect = CycloElement::from_int(1).add(&CycloElement::zeta(3).scale(&rat(2, 1)));
        assert_eq!(w, expect);
        let (_, r2) = sqrt_in_cyclotomic(&CycloElement::from_int(2), &[8], 128).unwrap().unwrap();
        assert_eq!(r2, CycloElement::from_terms(8, &[(1, rat(1, 1)), (3, rat(-1, 1))]));
        let (_, r5) = sqrt_in_cyclotomic(&CycloElement::zeta(5), &[5], 128).unwrap().unwrap();
        // zeta_5^3 has negative real part, so the normalized witness is its negative
        let z3 = CycloElement::from_terms(5, &[(3, rat(1, 1))]);
        assert_eq!(r5.square(), CycloElement::zeta(5));
        assert_eq!(r5, z3.neg());
        assert!(sqrt_in_cyclotomic(&CycloElement::zero(), &[3], 64).is_err());
    }

    #[test]
    fn non_squares_are_rejected() {
        assert!(sqrt_in_conductor(&CycloElement::from_int(2).lift(5), 64).is_none());
        assert!(sqrt_in_conductor(&CycloElement::from_int(-1).lift(3), 64).is_none());
    }

    #[test]
    fn random_squares_in_composite_conductors() {
        for &l in &[12u64, 15, 20, 21, 60, 105] {
            let terms: Vec<(i64, Rational)> =
                (0..7).map(|k| (k * 5 + 1, rat(((k * 37) % 11) - 5, 1 + (k % 3)))).collect();
            let y = CycloElement::from_terms(l, &terms);
            let x = y.square();
            let r = sqrt_in_conductor(&x, 128).expect("square must be found");
            assert_eq!(r.square(), x);
            assert!(r == y || r == y.neg());
        }
    }

    #[test]
    fn gauss_sum_radicals() {
        assert_eq!(sqrt_of_positive_integer(1), CycloElement::one());
        assert_eq!(sqrt_of_positive_integer(2), CycloElement::from_terms(8, &[(1, rat(1, 1)), (3, rat(-1, 1))]));
        let s5 = CycloElement::from_terms(5, &[(0, rat(1, 1)), (1, rat(2, 1)), (4, rat(2, 1))]);
        assert_eq!(sqrt_of_positive_integer(5), s5.lift(20));
        for n in [3u64, 7, 12, 45, 105] {
            assert_eq!(sqrt_of_positive_integer(n).square(), CycloElement::from_int(n as i64));
        }
    }
}
