//! Finite fields `F_q = F_p[t]/(h)` with word-sized `p`.
//!
//! Used for residue fields of cyclotomic primes: Gauss sums, quadratic
//! residue certificates and the starting points of Hensel lifts.

use crate::arith::{inv_mod, mul_mod, pow_mod, prime_divisors};
use num_bigint::BigUint;
use num_traits::{One, Zero};

/// Polynomial over `F_p`, little-endian, trimmed of leading zeros.
pub type PolyP = Vec<u64>;

fn trim(a: &mut PolyP) {
    while a.last() == Some(&0) {
        a.pop();
    }
}

fn poly_mulmod(a: &[u64], b: &[u64], h: &[u64], p: u64) -> PolyP {
    if a.is_empty() || b.is_empty() {
        return vec![];
    }
    let mut r = vec![0u64; a.len() + b.len() - 1];
    for (i, &x) in a.iter().enumerate() {
        if x == 0 {
            continue;
        }
        for (j, &y) in b.iter().enumerate() {
            r[i + j] = (r[i + j] + mul_mod(x, y, p)) % p;
        }
    }
    poly_rem(&mut r, h, p);
    r
}

/// In-place remainder modulo a monic polynomial.
fn poly_rem(r: &mut PolyP, h: &[u64], p: u64) {
    let d = h.len() - 1;
    while r.len() > d {
        let c = r.pop().unwrap();
        if c == 0 {
            continue;
        }
        let base = r.len() - d;
        for j in 0..d {
            r[base + j] = (r[base + j] + p - mul_mod(c, h[j], p)) % p;
        }
    }
    trim(r);
}

fn poly_gcd(mut a: PolyP, mut b: PolyP, p: u64) -> PolyP {
    trim(&mut a);
    trim(&mut b);
    while !b.is_empty() {
        // make b monic then reduce a
        let lc = *b.last().unwrap();
        let inv = inv_mod(lc, p).unwrap();
        for c in b.iter_mut() {
            *c = mul_mod(*c, inv, p);
        }
        poly_rem(&mut a, &b, p);
        std::mem::swap(&mut a, &mut b);
    }
    a
}

fn poly_powmod(base: &[u64], e: &BigUint, h: &[u64], p: u64) -> PolyP {
    let mut acc: PolyP = vec![1];
    for i in (0..e.bits()).rev() {
        acc = poly_mulmod(&acc, &acc, h, p);
        if e.bit(i) {
            acc = poly_mulmod(&acc, base, h, p);
        }
    }
    acc
}

/// Ben-Or irreducibility test for a monic `h` over `F_p`.
pub fn is_irreducible(h: &[u64], p: u64) -> bool {
    let f = h.len() - 1;
    if f <= 1 {
        return true;
    }
    let x: PolyP = vec![0, 1];
    let mut xp = x.clone();
    let pb = BigUint::from(p);
    for _ in 0..f / 2 {
        xp = poly_powmod(&xp, &pb, h, p);
        let mut diff = xp.clone();
        diff.resize(diff.len().max(2), 0);
        diff[1] = (diff[1] + p - 1) % p;
        trim(&mut diff);
        let g = poly_gcd(h.to_vec(), diff, p);
        if g.len() > 1 {
            return false;
        }
    }
    true
}

/// Smallest monic irreducible of degree `f` in the order of little-endian coefficient words.
pub fn find_irreducible(p: u64, f: usize) -> PolyP {
    if f == 1 {
        return vec![0, 1];
    }
    let mut coeffs = vec![0u64; f];
    loop {
        // increment like an odometer, constant term first
        let mut i = 0;
        loop {
            coeffs[i] += 1;
            if coeffs[i] < p {
                break;
            }
            coeffs[i] = 0;
            i += 1;
        }
        if coeffs[0] == 0 {
            continue;
        }
        let mut h = coeffs.clone();
        h.push(1);
        if is_irreducible(&h, p) {
            return h;
        }
    }
}

/// The field `F_p[t]/(h)` of order `q = p^f`.
#[derive(Clone, Debug)]
pub struct FiniteField {
    pub p: u64,
    pub f: usize,
    pub h: PolyP,
    pub order: BigUint,
}

pub type Elem = PolyP;

impl FiniteField {
    pub fn new(p: u64, f: usize) -> Self {
        let h = find_irreducible(p, f);
        Self::with_modulus(p, h)
    }

    pub fn with_modulus(p: u64, h: PolyP) -> Self {
        let f = h.len() - 1;
        FiniteField { p, f, h, order: BigUint::from(p).pow(f as u32) }
    }

    pub fn zero(&self) -> Elem {
        vec![]
    }

    pub fn one(&self) -> Elem {
        vec![1]
    }

    pub fn constant(&self, c: u64) -> Elem {
        let mut v = vec![c % self.p];
        trim(&mut v);
        v
    }

    /// The generator `t` of the power basis.
    pub fn gen(&self) -> Elem {
        let mut v: Elem = vec![0, 1];
        poly_rem(&mut v, &self.h, self.p);
        v
    }

    pub fn add(&self, a: &Elem, b: &Elem) -> Elem {
        let n = a.len().max(b.len());
        let mut r: Elem = (0..n)
            .map(|i| (a.get(i).copied().unwrap_or(0) + b.get(i).copied().unwrap_or(0)) % self.p)
            .collect();
        trim(&mut r);
        r
    }

    pub fn neg(&self, a: &Elem) -> Elem {
        a.iter().map(|&c| (self.p - c) % self.p).collect()
    }

    pub fn sub(&self, a: &Elem, b: &Elem) -> Elem {
        self.add(a, &self.neg(b))
    }

    pub fn mul(&self, a: &Elem, b: &Elem) -> Elem {
        poly_mulmod(a, b, &self.h, self.p)
    }

    pub fn scale(&self, a: &Elem, c: u64) -> Elem {
        let mut r: Elem = a.iter().map(|&x| mul_mod(x, c % self.p, self.p)).collect();
        trim(&mut r);
        r
    }

    pub fn pow(&self, a: &Elem, e: &BigUint) -> Elem {
        poly_powmod(a, e, &self.h, self.p)
    }

    pub fn pow_u(&self, a: &Elem, e: u64) -> Elem {
        self.pow(a, &BigUint::from(e))
    }

    pub fn is_zero(&self, a: &Elem) -> bool {
        a.is_empty()
    }

    pub fn inv(&self, a: &Elem) -> Option<Elem> {
        if a.is_empty() {
            return None;
        }
        Some(self.pow(a, &(&self.order - 2u32)))
    }

    /// Euler criterion; zero counts as a square.
    pub fn is_square(&self, a: &Elem) -> bool {
        if a.is_empty() {
            return true;
        }
        let e = (&self.order - 1u32) >> 1;
        self.pow(a, &e) == self.one()
    }

    /// Enumerate field elements in a fixed order (base-p digits of `k`).
    pub fn element(&self, mut k: u64) -> Elem {
        let mut v = Vec::with_capacity(self.f);
        for _ in 0..self.f {
            v.push(k % self.p);
            k /= self.p;
        }
        trim(&mut v);
        v
    }

    /// A square root by Cipolla's method, if one exists.
    pub fn sqrt(&self, a: &Elem) -> Option<Elem> {
        if a.is_empty() {
            return Some(vec![]);
        }
        if !self.is_square(a) {
            return None;
        }
        // find b with b^2 - a a non-square
        let mut k = 0u64;
        let (b, d) = loop {
            let b = self.element(k);
            let d = self.sub(&self.mul(&b, &b), a);
            if !d.is_empty() && !self.is_square(&d) {
                break (b, d);
            }
            k += 1;
        };
        // (b + y)^((q+1)/2) in F_q[y]/(y^2 - d)
        let e: BigUint = (&self.order + 1u32) >> 1;
        let mul2 = |x: &(Elem, Elem), z: &(Elem, Elem)| -> (Elem, Elem) {
            let r0 = self.add(&self.mul(&x.0, &z.0), &self.mul(&self.mul(&x.1, &z.1), &d));
            let r1 = self.add(&self.mul(&x.0, &z.1), &self.mul(&x.1, &z.0));
            (r0, r1)
        };
        let base = (b, self.one());
        let mut acc = (self.one(), self.zero());
        for i in (0..e.bits()).rev() {
            acc = mul2(&acc, &acc);
            if e.bit(i) {
                acc = mul2(&acc, &base);
            }
        }
        debug_assert!(acc.1.is_empty());
        debug_assert_eq!(self.mul(&acc.0, &acc.0), *a);
        Some(acc.0)
    }

    /// Exact multiplicative order of a nonzero element, given the factorization of `q - 1`.
    pub fn order_of(&self, a: &Elem, qm1_primes: &[BigUint]) -> BigUint {
        let mut ord = &self.order - 1u32;
        for ell in qm1_primes {
            while (&ord % ell).is_zero() && self.pow(a, &(&ord / ell)) == self.one() {
                ord /= ell;
            }
        }
        ord
    }

    /// An element of exact order `n`; requires `n | q - 1`.
    pub fn root_of_unity(&self, n: u64) -> Elem {
        let qm1 = &self.order - 1u32;
        assert!((&qm1 % n).is_zero(), "{} does not divide q - 1", n);
        let cof = &qm1 / n;
        let ps = prime_divisors(n);
        let mut k = 1u64;
        loop {
            let y = self.pow(&self.element(k), &cof);
            if !y.is_empty() && ps.iter().all(|&l| self.pow_u(&y, n / l) != self.one()) {
                return y;
            }
            k += 1;
        }
    }

    /// A generator of the multiplicative group.
    pub fn primitive_element(&self) -> Elem {
        let qm1 = &self.order - 1u32;
        let ps = factor_big(&qm1);
        let mut k = 1u64;
        loop {
            let y = self.element(k);
            if !y.is_empty() && ps.iter().all(|l| self.pow(&y, &(&qm1 / l)) != self.one()) {
                return y;
            }
            k += 1;
        }
    }

    /// Absolute trace to `F_p`.
    pub fn trace(&self, a: &Elem) -> u64 {
        let pb = BigUint::from(self.p);
        let mut x = a.clone();
        let mut s = self.zero();
        for _ in 0..self.f {
            s = self.add(&s, &x);
            x = self.pow(&x, &pb);
        }
        debug_assert!(s.len() <= 1);
        s.first().copied().unwrap_or(0)
    }

    /// Evaluate a polynomial with coefficients in `F_p` at an element.
    pub fn eval(&self, coeffs: &[u64], x: &Elem) -> Elem {
        let mut acc = self.zero();
        for &c in coeffs.iter().rev() {
            acc = self.add(&self.mul(&acc, x), &self.constant(c));
        }
        acc
    }
}

/// Trial-division factorization of a `BigUint` into distinct primes.
/// Only used on `q - 1` for the modest field sizes of this crate.
pub fn factor_big(n: &BigUint) -> Vec<BigUint> {
    let mut n = n.clone();
    let mut out = Vec::new();
    let mut d = BigUint::from(2u32);
    while &d * &d <= n {
        if (&n % &d).is_zero() {
            out.push(d.clone());
            while (&n % &d).is_zero() {
                n /= &d;
            }
        }
        d += 1u32;
    }
    if n > BigUint::one() {
        out.push(n);
    }
    out
}

/// Roots modulo a prime `q` of the cyclotomic polynomial: all `w^k` for a fixed primitive root.
pub fn primitive_root_mod(n: u64, q: u64) -> u64 {
    assert_eq!((q - 1) % n, 0);
    let ps = prime_divisors(n);
    let mut a = 2u64;
    loop {
        let y = pow_mod(a, (q - 1) / n, q);
        if ps.iter().all(|&l| pow_mod(y, n / l, q) != 1) && (n == 1 || y != 1) {
            return y;
        }
        a += 1;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_extension() {
        let f = FiniteField::new(3, 4);
        assert_eq!(f.order, BigUint::from(81u32));
        let g = f.primitive_element();
        let ps = factor_big(&BigUint::from(80u32));
        assert_eq!(f.order_of(&g, &ps), BigUint::from(80u32));
        let z = f.root_of_unity(16);
        assert_eq!(f.pow_u(&z, 16), f.one());
        assert_ne!(f.pow_u(&z, 8), f.one());
    }

    #[test]
    fn cipolla() {
        let f = FiniteField::new(7, 3);
        for k in 1..343u64 {
            let a = f.element(k);
            let sq = f.mul(&a, &a);
            let r = f.sqrt(&sq).unwrap();
            assert_eq!(f.mul(&r, &r), sq);
        }
    }

    #[test]
    fn trace_is_linear() {
        let f = FiniteField::new(5, 3);
        let a = f.element(17);
        let b = f.element(99);
        assert_eq!((f.trace(&a) + f.trace(&b)) % 5, f.trace(&f.add(&a, &b)));
        assert_eq!(f.trace(&f.one()), 3);
    }
}
