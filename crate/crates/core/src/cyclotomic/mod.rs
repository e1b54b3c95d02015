//! Exact arithmetic in cyclotomic fields `Q(zeta_N)`.
//!
//! Elements live on the power basis `1, zeta_N, ..., zeta_N^(phi(N)-1)`
//! reduced modulo the `N`-th cyclotomic polynomial, with integer numerators
//! over one common positive denominator.

mod field;
mod serial;
mod sqrt;
mod square;

pub use field::{cyclotomic_polynomial, FieldData};
pub use sqrt::{sqrt_in_cyclotomic, sqrt_in_conductor, sqrt_of_positive_integer};
pub use square::{is_square_in_subfield, reduce_at, NonSquareCertificate, SquareStatus};

use crate::arith::{gcd, lcm, prime_divisors, Rational};
use crate::error::{Error, Result};
use crate::numeric::{work_bits, ComplexApprox, Real};
use field::{embed_table, field, kernel_generators, lift_solver};
use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use std::fmt;

#[derive(Clone, Debug)]
pub struct CycloElement {
    n: u64,
    num: Vec<BigInt>,
    den: BigInt,
}

/// Returned by [`CycloElement::change_conductor`] when the element does not
/// lie in the requested subfield.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NotInSubfield {
    pub conductor: u64,
    pub target: u64,
}

impl CycloElement {
    /// Build from integer numerators (length `phi(n)`) and a denominator.
    pub fn from_parts(n: u64, num: Vec<BigInt>, den: BigInt) -> Self {
        assert!(n >= 1);
        assert_eq!(num.len(), field(n).phi, "coefficient count must be phi(n)");
        assert!(!den.is_zero());
        let mut x = CycloElement { n, num, den };
        x.normalize();
        x
    }

    pub fn from_coeffs(n: u64, coeffs: &[Rational]) -> Self {
        let den = coeffs.iter().fold(BigInt::one(), |acc, c| acc.lcm(c.denom()));
        let num = coeffs.iter().map(|c| c.numer() * (&den / c.denom())).collect();
        Self::from_parts(n, num, den)
    }

    /// `sum c_k zeta_n^k` for arbitrary integer exponents.
    pub fn from_terms(n: u64, terms: &[(i64, Rational)]) -> Self {
        let den = terms.iter().fold(BigInt::one(), |acc, (_, c)| acc.lcm(c.denom()));
        let mut acc = vec![BigInt::zero(); n as usize];
        for (k, c) in terms {
            acc[k.rem_euclid(n as i64) as usize] += c.numer() * (&den / c.denom());
        }
        Self::from_exponent_vector(n, acc, den)
    }

    /// Reduce a vector indexed by exponents `0..n` (integer coefficients, common `den`).
    pub fn from_exponent_vector(n: u64, acc: Vec<BigInt>, den: BigInt) -> Self {
        assert_eq!(acc.len(), n as usize);
        let num = field(n).reduce(acc);
        Self::from_parts(n, num, den)
    }

    pub fn from_rational(r: &Rational) -> Self {
        CycloElement { n: 1, num: vec![r.numer().clone()], den: r.denom().clone() }
    }

    pub fn from_int(k: i64) -> Self {
        Self::from_rational(&Rational::from_integer(k.into()))
    }

    pub fn zero() -> Self {
        Self::from_int(0)
    }

    pub fn one() -> Self {
        Self::from_int(1)
    }

    /// `zeta_n` at conductor exactly `n`.
    pub fn zeta(n: u64) -> Self {
        Self::from_terms(n, &[(1, Rational::one())])
    }

    /// `zeta_n^k`, placed at conductor `n/2` when `n = 2 mod 4`.
    pub fn root_of_unity(k: i64, n: u64) -> Self {
        if n % 4 == 2 {
            // zeta_n = -zeta_{n/2}^{(n/2+1)/2}
            let h = n / 2;
            let sign = if k.rem_euclid(2) == 1 { -1 } else { 1 };
            let e = (k.rem_euclid(n as i64) as i128 * ((h as i128 + 1) / 2)).rem_euclid(h as i128) as i64;
            return Self::from_terms(h.max(1), &[(e, Rational::from_integer(sign.into()))]);
        }
        Self::from_terms(n, &[(k, Rational::one())])
    }

    /// `i = zeta_4`.
    pub fn i() -> Self {
        Self::zeta(4)
    }

    pub fn conductor(&self) -> u64 {
        self.n
    }

    pub fn numerators(&self) -> &[BigInt] {
        &self.num
    }

    pub fn denominator(&self) -> &BigInt {
        &self.den
    }

    pub fn coeffs(&self) -> Vec<Rational> {
        self.num.iter().map(|c| Rational::new(c.clone(), self.den.clone())).collect()
    }

    fn normalize(&mut self) {
        if self.den.is_negative() {
            self.den = -&self.den;
            for c in self.num.iter_mut() {
                *c = -&*c;
            }
        }
        let mut g = self.den.clone();
        for c in &self.num {
            if g.is_one() {
                break;
            }
            g = g.gcd(c);
        }
        if !g.is_one() && !g.is_zero() {
            self.den /= &g;
            for c in self.num.iter_mut() {
                *c /= &g;
            }
        }
        if self.num.iter().all(|c| c.is_zero()) {
            self.den = BigInt::one();
        }
    }

    pub fn is_zero(&self) -> bool {
        self.num.iter().all(|c| c.is_zero())
    }

    pub fn is_one(&self) -> bool {
        self.as_rational().is_some_and(|r| r.is_one())
    }

    /// The value as a rational number, when it is one.
    pub fn as_rational(&self) -> Option<Rational> {
        if self.num[1..].iter().all(|c| c.is_zero()) {
            Some(Rational::new(self.num[0].clone(), self.den.clone()))
        } else {
            None
        }
    }

    /// Lift to conductor `m`, a multiple of the current one.
    pub fn lift(&self, m: u64) -> Self {
        assert!(m % self.n == 0, "lift target {m} is not a multiple of {}", self.n);
        if m == self.n {
            return self.clone();
        }
        let step = (m / self.n) as usize;
        let mut acc = vec![BigInt::zero(); m as usize];
        for (i, c) in self.num.iter().enumerate() {
            acc[i * step] = c.clone();
        }
        Self::from_exponent_vector(m, acc, self.den.clone())
    }

    /// Descend to `Q(zeta_d)` for `d | n`, if the element lies there.
    pub fn descend(&self, d: u64) -> Option<Self> {
        let n = self.n;
        assert!(n % d == 0, "descent target {d} does not divide {n}");
        if d == n {
            return Some(self.clone());
        }
        if self.is_zero() {
            return Some(Self::zero().lift(d));
        }
        let step = (n / d) as usize;
        let fd = field(d);
        if prime_divisors(n).iter().all(|p| d % p == 0) {
            // Phi_n(x) = Phi_d(x^(n/d)): the subfield is spanned by exponents divisible by n/d
            for (i, c) in self.num.iter().enumerate() {
                if i % step != 0 && !c.is_zero() {
                    return None;
                }
            }
            let num = (0..fd.phi).map(|j| self.num[j * step].clone()).collect();
            return Some(Self::from_parts(d, num, self.den.clone()));
        }
        for &u in kernel_generators(n, d).iter() {
            if self.galois(u).ok()? != *self {
                return None;
            }
        }
        let solver = lift_solver(n, d);
        let coeffs: Vec<Rational> = solver
            .inv
            .iter()
            .map(|row| {
                row.iter()
                    .zip(&solver.pivots)
                    .map(|(a, &p)| a * &self.num[p])
                    .fold(Rational::zero(), |s, t| s + t)
                    / &self.den
            })
            .collect();
        let y = Self::from_coeffs(d, &coeffs);
        if y.lift(n).num != self.num || y.lift(n).den != self.den {
            return None;
        }
        Some(y)
    }

    /// Move to conductor `m`: lift when `n | m`, descend when `m | n`, otherwise
    /// descend to `gcd(n, m)` and lift.
    pub fn change_conductor(&self, m: u64) -> std::result::Result<Self, NotInSubfield> {
        let fail = NotInSubfield { conductor: self.n, target: m };
        if m == 0 {
            return Err(fail);
        }
        if m % self.n == 0 {
            return Ok(self.lift(m));
        }
        let g = gcd(self.n, m);
        match self.descend(g) {
            Some(y) => Ok(y.lift(m)),
            None => Err(fail),
        }
    }

    /// The same element at the smallest conductor that contains it.
    pub fn minimal(&self) -> Self {
        let mut x = self.clone();
        if x.as_rational().is_some() {
            return Self::from_rational(&x.as_rational().unwrap());
        }
        if x.n % 4 == 2 {
            x = x.descend(x.n / 2).expect("Q(zeta_2k) = Q(zeta_k) for odd k");
        }
        'outer: loop {
            for p in prime_divisors(x.n) {
                let mut d = x.n / p;
                if d % 4 == 2 {
                    d /= 2;
                }
                if let Some(y) = x.descend(d) {
                    x = y;
                    continue 'outer;
                }
            }
            return x;
        }
    }

    fn common(a: &Self, b: &Self) -> (Self, Self) {
        if a.n == b.n {
            return (a.clone(), b.clone());
        }
        let m = lcm(a.n, b.n);
        (a.lift(m), b.lift(m))
    }

    pub fn add(&self, o: &Self) -> Self {
        if self.n != o.n {
            let (a, b) = Self::common(self, o);
            return a.add(&b);
        }
        if self.den == o.den {
            let num = self.num.iter().zip(&o.num).map(|(a, b)| a + b).collect();
            return Self::from_parts(self.n, num, self.den.clone());
        }
        let num = self.num.iter().zip(&o.num).map(|(a, b)| a * &o.den + b * &self.den).collect();
        Self::from_parts(self.n, num, &self.den * &o.den)
    }

    pub fn neg(&self) -> Self {
        CycloElement { n: self.n, num: self.num.iter().map(|c| -c).collect(), den: self.den.clone() }
    }

    pub fn sub(&self, o: &Self) -> Self {
        self.add(&o.neg())
    }

    pub fn mul(&self, o: &Self) -> Self {
        if self.n != o.n {
            if o.n == 1 {
                return self.scale(&o.as_rational().unwrap());
            }
            if self.n == 1 {
                return o.scale(&self.as_rational().unwrap());
            }
            let (a, b) = Self::common(self, o);
            return a.mul(&b);
        }
        let f = field(self.n);
        let n = self.n as usize;
        let mut acc = vec![BigInt::zero(); n];
        for (i, a) in self.num.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in o.num.iter().enumerate() {
                if b.is_zero() {
                    continue;
                }
                let mut k = i + j;
                if k >= n {
                    k -= n;
                }
                acc[k] += a * b;
            }
        }
        Self::from_parts(self.n, f.reduce(acc), &self.den * &o.den)
    }

    pub fn scale(&self, r: &Rational) -> Self {
        Self::from_parts(
            self.n,
            self.num.iter().map(|c| c * r.numer()).collect(),
            &self.den * r.denom(),
        )
    }

    pub fn square(&self) -> Self {
        self.mul(self)
    }

    /// Multiplicative inverse by solving the multiplication matrix exactly.
    pub fn inv(&self) -> Result<Self> {
        if self.is_zero() {
            return Err(Error::DivisionByZero);
        }
        if let Some(r) = self.as_rational() {
            return Ok(Self::from_rational(&r.recip()).lift(self.n));
        }
        let f = field(self.n);
        let phi = f.phi;
        // column j holds the coordinates of num * zeta^j
        let mut cols: Vec<Vec<BigInt>> = Vec::with_capacity(phi);
        for j in 0..phi {
            let mut acc = vec![BigInt::zero(); self.n as usize];
            for (i, a) in self.num.iter().enumerate() {
                acc[(i + j) % self.n as usize] += a;
            }
            cols.push(f.reduce(acc));
        }
        let mat: Vec<Vec<BigInt>> = (0..phi).map(|r| (0..phi).map(|c| cols[c][r].clone()).collect()).collect();
        let mut rhs = vec![BigInt::zero(); phi];
        rhs[0] = self.den.clone();
        let y = crate::linalg::solve_rational(&mat, &rhs).ok_or(Error::DivisionByZero)?;
        Ok(Self::from_coeffs(self.n, &y))
    }

    pub fn div(&self, o: &Self) -> Result<Self> {
        if let Some(r) = o.as_rational() {
            if r.is_zero() {
                return Err(Error::DivisionByZero);
            }
            return Ok(self.scale(&r.recip()));
        }
        Ok(self.mul(&o.inv()?))
    }

    pub fn pow(&self, e: i64) -> Result<Self> {
        let base = if e < 0 { self.inv()? } else { self.clone() };
        let mut e = e.unsigned_abs();
        let mut acc = Self::one().lift(self.n);
        let mut b = base;
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul(&b);
            }
            e >>= 1;
            if e > 0 {
                b = b.square();
            }
        }
        Ok(acc)
    }

    /// `sigma_u: zeta_n -> zeta_n^u`.
    pub fn galois(&self, u: i64) -> Result<Self> {
        let n = self.n;
        let ur = u.rem_euclid(n as i64) as u64;
        if gcd(ur, n) != 1 && n > 1 {
            return Err(Error::NotCoprime(u, n));
        }
        if n <= 2 || ur == 1 {
            return Ok(self.clone());
        }
        let mut acc = vec![BigInt::zero(); n as usize];
        for (i, c) in self.num.iter().enumerate() {
            if !c.is_zero() {
                acc[(i as u64 * ur % n) as usize] += c;
            }
        }
        Ok(Self::from_exponent_vector(n, acc, self.den.clone()))
    }

    /// Complex conjugate, `sigma_{-1}`.
    pub fn conj(&self) -> Self {
        self.galois(-1).expect("-1 is a unit")
    }

    /// Numeric value under `zeta_N -> exp(2 pi i / N)`.
    ///
    /// The error is below `2^(-prec + c)` with `c = log2(sum |num| / den) + log2(phi) + 2`.
    pub fn embed(&self, prec: u32) -> ComplexApprox {
        let w = work_bits(prec);
        let table = embed_table(self.n, w);
        let mut re = Real::zero(w);
        let mut im = Real::zero(w);
        for (c, (cs, sn)) in self.num.iter().zip(table.iter()) {
            if c.is_zero() {
                continue;
            }
            re = re.add(&cs.mul_int(c));
            im = im.add(&sn.mul_int(c));
        }
        ComplexApprox::new(re.div_int(&self.den), im.div_int(&self.den), prec)
    }

    /// Bits of the largest numerator and of the denominator.
    pub fn height_bits(&self) -> u64 {
        self.num.iter().map(|c| c.bits()).max().unwrap_or(0).max(self.den.bits())
    }
}

impl PartialEq for CycloElement {
    fn eq(&self, o: &Self) -> bool {
        if self.n == o.n {
            return self.den == o.den && self.num == o.num;
        }
        let (a, b) = Self::common(self, o);
        a.den == b.den && a.num == b.num
    }
}

impl Eq for CycloElement {}

impl fmt::Display for CycloElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let x = self.minimal();
        let cs: Vec<String> = x.coeffs().iter().map(crate::arith::fmt_rat).collect();
        write!(f, "cyclo({}; {})", x.n, cs.join(", "))
    }
}

macro_rules! binop {
    ($tr:ident, $m:ident, $f:ident) => {
        impl std::ops::$tr<&CycloElement> for &CycloElement {
            type Output = CycloElement;
            fn $m(self, o: &CycloElement) -> CycloElement {
                self.$f(o)
            }
        }
        impl std::ops::$tr for CycloElement {
            type Output = CycloElement;
            fn $m(self, o: CycloElement) -> CycloElement {
                (&self).$f(&o)
            }
        }
    };
}

binop!(Add, add, add);
binop!(Sub, sub, sub);
binop!(Mul, mul, mul);

impl std::ops::Neg for &CycloElement {
    type Output = CycloElement;
    fn neg(self) -> CycloElement {
        CycloElement::neg(self)
    }
}

impl std::ops::Neg for CycloElement {
    type Output = CycloElement;
    fn neg(self) -> CycloElement {
        CycloElement::neg(&self)
    }
}

/// `cyclo_arith` in one call.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ArithOp {
    Add,
    Sub,
    Mul,
    Div,
}

pub fn cyclo_arith(a: &CycloElement, b: &CycloElement, op: ArithOp) -> Result<CycloElement> {
    Ok(match op {
        ArithOp::Add => a.add(b),
        ArithOp::Sub => a.sub(b),
        ArithOp::Mul => a.mul(b),
        ArithOp::Div => a.div(b)?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::rat;

    fn z(k: i64, n: u64) -> CycloElement {
        CycloElement::from_terms(n, &[(k, Rational::one())])
    }

    #[test]
    fn basic_identities() {
        let i = CycloElement::i();
        assert_eq!(i.mul(&i), CycloElement::from_int(-1));
        let z5 = CycloElement::zeta(5);
        assert_eq!(CycloElement::one().div(&z5).unwrap(), z(4, 5));
        let z3 = CycloElement::zeta(3);
        assert_eq!(z3.mul(&z3), CycloElement::from_int(-1).sub(&z3));
    }

    #[test]
    fn galois_action() {
        assert_eq!(CycloElement::zeta(5).galois(2).unwrap(), z(2, 5));
        let z7 = CycloElement::zeta(7);
        assert_eq!(z7.galois(3).unwrap().galois(2).unwrap(), z(6, 7));
        assert!(z7.galois(7).is_err());
        let x = CycloElement::one().add(&z7);
        let a = x.embed(128);
        let b = x.galois(6).unwrap().embed(128);
        assert!(a.conj().close_to(&b, 120));
    }

    #[test]
    fn conductor_changes() {
        let z6 = CycloElement::zeta(6);
        let d = z6.change_conductor(3).unwrap();
        assert_eq!(d.conductor(), 3);
        assert_eq!(d, CycloElement::one().add(&CycloElement::zeta(3)));
        assert!(CycloElement::zeta(5).change_conductor(3).is_err());
        let s5 = CycloElement::from_int(1).add(&z(1, 5).add(&z(4, 5)).scale(&rat(2, 1)));
        assert_eq!(s5.square(), CycloElement::from_int(5));
        let up = s5.lift(20);
        assert_eq!(up.descend(5).unwrap(), s5);
        assert_eq!(up.minimal().conductor(), 5);
        // rad(n) does not divide d: general path
        let w = z(1, 3).lift(12);
        assert_eq!(w.descend(3).unwrap(), z(1, 3));
        let q = z(1, 4).lift(60);
        assert_eq!(q.minimal().conductor(), 4);
        assert!(q.descend(15).is_none());
    }

    #[test]
    fn embedding() {
        let v = CycloElement::i().embed(128);
        assert!(v.close_to(&crate::numeric::root_of_unity(1, 4, 128), 120));
        let s = z(1, 3).add(&z(2, 3)).embed(200);
        assert!(s.close_to(&ComplexApprox::one(200).mul_rat(&rat(-1, 1)), 190));
        let r5 = CycloElement::from_int(1).add(&z(1, 5).add(&z(4, 5)).scale(&rat(2, 1)));
        assert!(r5.embed(128).re.to_decimal(8).starts_with("2.2360679"));
    }

    #[test]
    fn root_of_unity_normalizes() {
        let a = CycloElement::root_of_unity(1, 6);
        assert_eq!(a.conductor(), 3);
        assert_eq!(a, CycloElement::zeta(6));
        let b = CycloElement::root_of_unity(7, 30);
        assert_eq!(b, z(7, 30));
        assert_eq!(b.conductor(), 15);
    }

    #[test]
    fn inverse_general() {
        let x = z(1, 7).add(&CycloElement::from_int(3)).add(&z(3, 7).scale(&rat(-2, 5)));
        let y = x.inv().unwrap();
        assert!(x.mul(&y).is_one());
    }
}
