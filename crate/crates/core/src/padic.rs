//! Fixed-precision p-adic numbers and unramified extensions of `Z_p`.

use crate::arith::Rational;
use crate::ffield::{Elem, FiniteField};
use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::Serialize;

/// `p^v * unit` known modulo `p^precision`. Zero is `unit = 0`, `valuation = precision`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PadicNumber {
    pub p: u64,
    pub precision: u32,
    pub valuation: i64,
    pub unit: BigUint,
}

impl PadicNumber {
    pub fn modulus(p: u64, n: u32) -> BigUint {
        BigUint::from(p).pow(n)
    }

    /// Normalize an integer residue modulo `p^n`.
    pub fn from_residue(p: u64, n: u32, x: &BigInt) -> Self {
        let m = BigInt::from(Self::modulus(p, n));
        let mut x = x.mod_floor(&m);
        if x.is_zero() {
            return PadicNumber { p, precision: n, valuation: n as i64, unit: BigUint::zero() };
        }
        let pb = BigInt::from(p);
        let mut v = 0i64;
        while (&x % &pb).is_zero() {
            x /= &pb;
            v += 1;
        }
        let unit_mod = BigInt::from(Self::modulus(p, n - v as u32));
        PadicNumber { p, precision: n, valuation: v, unit: x.mod_floor(&unit_mod).to_biguint().unwrap() }
    }

    pub fn from_rational(p: u64, n: u32, r: &Rational) -> Option<Self> {
        let pb = BigInt::from(p);
        let (mut num, mut den) = (r.numer().clone(), r.denom().clone());
        let mut v = 0i64;
        if num.is_zero() {
            return Some(Self::from_residue(p, n, &BigInt::zero()));
        }
        while (&num % &pb).is_zero() {
            num /= &pb;
            v += 1;
        }
        while (&den % &pb).is_zero() {
            den /= &pb;
            v -= 1;
        }
        let m = BigInt::from(Self::modulus(p, n));
        let inv = mod_inverse(&den, &m)?;
        let unit = (num * inv).mod_floor(&m).to_biguint()?;
        Some(PadicNumber { p, precision: n, valuation: v, unit })
    }

    pub fn is_zero(&self) -> bool {
        self.unit.is_zero()
    }

    /// Residue modulo `p^precision`, defined when the valuation is non-negative.
    pub fn residue(&self) -> Option<BigInt> {
        if self.valuation < 0 {
            return None;
        }
        let m = BigInt::from(Self::modulus(self.p, self.precision));
        let pv = BigInt::from(self.p).pow(self.valuation as u32);
        Some((BigInt::from(self.unit.clone()) * pv).mod_floor(&m))
    }

    pub fn mul(&self, o: &Self) -> Self {
        assert_eq!(self.p, o.p);
        let n = self.precision.min(o.precision);
        let m = Self::modulus(self.p, n);
        PadicNumber {
            p: self.p,
            precision: n,
            valuation: self.valuation + o.valuation,
            unit: (&self.unit * &o.unit) % m,
        }
    }

    pub fn inv(&self) -> Option<Self> {
        if self.is_zero() {
            return None;
        }
        let m = BigInt::from(Self::modulus(self.p, self.precision));
        let u = mod_inverse(&BigInt::from(self.unit.clone()), &m)?;
        Some(PadicNumber {
            p: self.p,
            precision: self.precision,
            valuation: -self.valuation,
            unit: u.to_biguint().unwrap(),
        })
    }

    pub fn neg(&self) -> Self {
        let m = Self::modulus(self.p, self.precision);
        let unit = if self.unit.is_zero() { BigUint::zero() } else { (&m - &self.unit) % &m };
        PadicNumber { unit, ..self.clone() }
    }

    /// Drop to a lower precision.
    pub fn truncate(&self, n: u32) -> Self {
        let n = n.min(self.precision);
        PadicNumber { unit: &self.unit % Self::modulus(self.p, n), precision: n, ..self.clone() }
    }

    /// True when the value is `+1` or `-1` to full precision.
    pub fn sign(&self) -> Option<i32> {
        if self.valuation != 0 {
            return None;
        }
        let m = Self::modulus(self.p, self.precision);
        if self.unit.is_one() {
            Some(1)
        } else if self.unit == &m - 1u32 {
            Some(-1)
        } else {
            None
        }
    }

    /// Base-p digits of the unit part, most significant first.
    pub fn digits(&self) -> String {
        let mut u = self.unit.clone();
        let pb = BigUint::from(self.p);
        let n = self.precision as i64 - self.valuation.max(0);
        let mut ds = Vec::new();
        for _ in 0..n.max(0) {
            ds.push((&u % &pb).to_u64().unwrap());
            u /= &pb;
        }
        ds.reverse();
        ds.iter().map(|d| d.to_string()).collect::<Vec<_>>().join(".")
    }
}

#[derive(Serialize)]
struct PadicJson {
    p: u64,
    precision: u32,
    valuation: i64,
    unit: String,
    digits: String,
}

impl Serialize for PadicNumber {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        PadicJson {
            p: self.p,
            precision: self.precision,
            valuation: self.valuation,
            unit: self.unit.to_string(),
            digits: self.digits(),
        }
        .serialize(s)
    }
}

pub fn mod_inverse(a: &BigInt, m: &BigInt) -> Option<BigInt> {
    let g = a.mod_floor(m).extended_gcd(m);
    if !g.gcd.is_one() {
        return None;
    }
    Some(g.x.mod_floor(m))
}

/// The ring `(Z/p^k)[t]/(H)` where `H` lifts an irreducible `h` mod `p`:
/// the unramified extension of degree `f` at precision `k`.
#[derive(Clone, Debug)]
pub struct Unramified {
    pub field: FiniteField,
    pub k: u32,
    pub modulus: BigInt,
    h: Vec<BigInt>,
    /// `Tr(t^i)` for `i < f`, as residues.
    traces: Vec<BigInt>,
}

pub type UElem = Vec<BigInt>;

impl Unramified {
    pub fn new(field: FiniteField, k: u32) -> Self {
        let modulus = BigInt::from(field.p).pow(k);
        let h: Vec<BigInt> = field.h.iter().map(|&c| BigInt::from(c)).collect();
        let f = field.f;
        // Newton identities for the power sums of the roots of the monic H
        let mut traces = vec![BigInt::zero(); f];
        traces[0] = BigInt::from(f);
        for i in 1..f {
            // s_i = -(i * e_i + sum_{j<i} e_j-coeff * s_{i-j}) with H = sum h_j t^j, h_f = 1
            let mut s = BigInt::from(i) * &h[f - i];
            for j in 1..i {
                s += &h[f - j] * &traces[i - j];
            }
            traces[i] = (-s).mod_floor(&modulus);
        }
        Unramified { field, k, modulus, h, traces }
    }

    pub fn degree(&self) -> usize {
        self.field.f
    }

    fn reduce(&self, mut r: Vec<BigInt>) -> UElem {
        let f = self.field.f;
        while r.len() > f {
            let c = r.pop().unwrap();
            if c.is_zero() {
                continue;
            }
            let base = r.len() - f;
            for j in 0..f {
                r[base + j] -= &c * &self.h[j];
            }
        }
        r.resize(f, BigInt::zero());
        r.iter().map(|c| c.mod_floor(&self.modulus)).collect()
    }

    pub fn zero(&self) -> UElem {
        vec![BigInt::zero(); self.field.f]
    }

    pub fn one(&self) -> UElem {
        self.from_int(&BigInt::one())
    }

    pub fn from_int(&self, n: &BigInt) -> UElem {
        let mut v = self.zero();
        v[0] = n.mod_floor(&self.modulus);
        v
    }

    pub fn from_rational(&self, r: &Rational) -> Option<UElem> {
        let inv = mod_inverse(r.denom(), &self.modulus)?;
        Some(self.from_int(&(r.numer() * inv)))
    }

    pub fn lift(&self, a: &Elem) -> UElem {
        let mut v = self.zero();
        for (i, &c) in a.iter().enumerate() {
            v[i] = BigInt::from(c);
        }
        v
    }

    pub fn residue(&self, a: &UElem) -> Elem {
        let p = BigInt::from(self.field.p);
        let mut v: Elem = a.iter().map(|c| c.mod_floor(&p).to_u64().unwrap()).collect();
        while v.last() == Some(&0) {
            v.pop();
        }
        v
    }

    pub fn add(&self, a: &UElem, b: &UElem) -> UElem {
        a.iter().zip(b).map(|(x, y)| (x + y).mod_floor(&self.modulus)).collect()
    }

    pub fn sub(&self, a: &UElem, b: &UElem) -> UElem {
        a.iter().zip(b).map(|(x, y)| (x - y).mod_floor(&self.modulus)).collect()
    }

    pub fn neg(&self, a: &UElem) -> UElem {
        a.iter().map(|x| (-x).mod_floor(&self.modulus)).collect()
    }

    pub fn scale(&self, a: &UElem, c: &BigInt) -> UElem {
        a.iter().map(|x| (x * c).mod_floor(&self.modulus)).collect()
    }

    pub fn mul(&self, a: &UElem, b: &UElem) -> UElem {
        let f = self.field.f;
        let mut r = vec![BigInt::zero(); 2 * f - 1];
        for i in 0..f {
            if a[i].is_zero() {
                continue;
            }
            for j in 0..f {
                r[i + j] += &a[i] * &b[j];
            }
        }
        self.reduce(r)
    }

    pub fn pow(&self, a: &UElem, e: &BigUint) -> UElem {
        let mut acc = self.one();
        for i in (0..e.bits()).rev() {
            acc = self.mul(&acc, &acc);
            if e.bit(i) {
                acc = self.mul(&acc, a);
            }
        }
        acc
    }

    pub fn pow_i(&self, a: &UElem, e: i64) -> Option<UElem> {
        if e >= 0 {
            Some(self.pow(a, &BigUint::from(e as u64)))
        } else {
            Some(self.pow(&self.inv(a)?, &BigUint::from((-e) as u64)))
        }
    }

    /// Inverse by Newton iteration from the residue-field inverse.
    pub fn inv(&self, a: &UElem) -> Option<UElem> {
        let r = self.field.inv(&self.residue(a))?;
        let mut v = self.lift(&r);
        let two = self.from_int(&BigInt::from(2));
        let mut prec = 1u32;
        while prec < self.k {
            v = self.mul(&v, &self.sub(&two, &self.mul(a, &v)));
            prec *= 2;
        }
        Some(v)
    }

    /// Square root of a unit, lifted from the residue root `r0` by the
    /// inverse square-root iteration `z <- z (3 - a z^2) / 2`.
    pub fn sqrt_from(&self, a: &UElem, r0: &Elem) -> UElem {
        let rinv = self.field.inv(r0).expect("unit square root");
        let mut z = self.lift(&rinv);
        let three = self.from_int(&BigInt::from(3));
        let half = mod_inverse(&BigInt::from(2), &self.modulus).unwrap();
        let mut prec = 1u32;
        while prec < self.k {
            let t = self.sub(&three, &self.mul(a, &self.mul(&z, &z)));
            z = self.scale(&self.mul(&z, &t), &half);
            prec *= 2;
        }
        self.mul(a, &z)
    }

    /// Hensel lift of a root of `x^n - 1` with nonzero residue; `p` must not divide `n`.
    pub fn lift_root_of_unity(&self, r0: &Elem, n: u64) -> UElem {
        let mut x = self.lift(r0);
        let nb = BigInt::from(n);
        let one = self.one();
        let mut prec = 1u32;
        while prec < self.k {
            // x <- x - (x^n - 1) / (n x^(n-1)) = x - x (x^n - 1) / (n x^n)
            let xn = self.pow(&x, &BigUint::from(n));
            let num = self.mul(&x, &self.sub(&xn, &one));
            let den = self.inv(&self.scale(&xn, &nb)).expect("separable");
            x = self.sub(&x, &self.mul(&num, &den));
            prec *= 2;
        }
        x
    }

    /// Multiply by the generator `t`.
    pub fn mul_by_t(&self, a: &UElem) -> UElem {
        let mut r = vec![BigInt::zero()];
        r.extend(a.iter().cloned());
        self.reduce(r)
    }

    /// `(Tr(a t^s))_{s < f}`: the linear form `w -> Tr(a w)` in coordinates.
    pub fn trace_form(&self, a: &UElem) -> Vec<BigInt> {
        let mut w = a.clone();
        let mut out = Vec::with_capacity(self.field.f);
        for s in 0..self.field.f {
            out.push(self.trace(&w));
            if s + 1 < self.field.f {
                w = self.mul_by_t(&w);
            }
        }
        out
    }

    /// Absolute trace to `Z/p^k`.
    pub fn trace(&self, a: &UElem) -> BigInt {
        let mut s = BigInt::zero();
        for (c, t) in a.iter().zip(&self.traces) {
            s += c * t;
        }
        s.mod_floor(&self.modulus)
    }

    /// Is the element in `Z/p^k` (all higher coordinates vanish)?
    pub fn as_scalar(&self, a: &UElem) -> Option<BigInt> {
        if a[1..].iter().all(|c| c.is_zero()) {
            Some(a[0].clone())
        } else {
            None
        }
    }

    /// Symmetric representative in `(-p^k/2, p^k/2]`.
    pub fn centered(&self, x: &BigInt) -> BigInt {
        let r = x.mod_floor(&self.modulus);
        if &r * 2 > self.modulus {
            r - &self.modulus
        } else {
            r
        }
    }

    pub fn is_unit(&self, a: &UElem) -> bool {
        !self.residue(a).is_empty()
    }

    pub fn abs_leq(&self, x: &BigInt, bound: &BigInt) -> bool {
        self.centered(x).abs() <= *bound
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn padic_from_rational() {
        let x = PadicNumber::from_rational(5, 4, &Rational::new(25.into(), 3.into())).unwrap();
        assert_eq!(x.valuation, 2);
        let back = x.mul(&PadicNumber::from_rational(5, 4, &Rational::from_integer(3.into())).unwrap());
        assert_eq!(back.unit, BigUint::one());
    }

    #[test]
    fn unramified_roots_and_sqrt() {
        let ff = FiniteField::new(7, 2);
        let r = Unramified::new(ff.clone(), 20);
        let w0 = ff.root_of_unity(16);
        let w = r.lift_root_of_unity(&w0, 16);
        assert_eq!(r.pow(&w, &BigUint::from(16u32)), r.one());
        let a = r.add(&w, &r.from_int(&BigInt::from(3)));
        let sq = r.mul(&a, &a);
        let s0 = ff.sqrt(&r.residue(&sq)).unwrap();
        let s = r.sqrt_from(&sq, &s0);
        assert_eq!(r.mul(&s, &s), sq);
        let inv = r.inv(&a).unwrap();
        assert_eq!(r.mul(&a, &inv), r.one());
        // trace of 1 is the degree
        assert_eq!(r.trace(&r.one()), BigInt::from(2));
    }
}
