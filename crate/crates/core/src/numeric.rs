//! Fixed-point multiprecision reals and complexes on top of `BigInt`.
//!
//! A [`Real`] is an integer mantissa `m` read as `m / 2^w`. All operands of a
//! binary operation share the same `w`. Every primitive rounds by truncation,
//! so each one contributes at most one unit in the last place; callers keep
//! 64 guard bits above the precision they report (see [`work_bits`]).

use crate::arith::Rational;
use num_bigint::{BigInt, Sign};
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use std::collections::HashMap;
use std::sync::{LazyLock, Mutex};

/// Guard bits carried above any requested precision.
pub const GUARD: u32 = 64;

/// Working width for a requested precision.
pub fn work_bits(prec: u32) -> u32 {
    prec + GUARD
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Real {
    pub m: BigInt,
    pub w: u32,
}

impl Real {
    pub fn zero(w: u32) -> Self {
        Real { m: BigInt::zero(), w }
    }

    pub fn from_int(n: &BigInt, w: u32) -> Self {
        Real { m: n << w, w }
    }

    pub fn from_i64(n: i64, w: u32) -> Self {
        Self::from_int(&BigInt::from(n), w)
    }

    pub fn from_rational(r: &Rational, w: u32) -> Self {
        Real { m: (r.numer() << w).div_floor(r.denom()), w }
    }

    pub fn add(&self, o: &Real) -> Real {
        debug_assert_eq!(self.w, o.w);
        Real { m: &self.m + &o.m, w: self.w }
    }

    pub fn sub(&self, o: &Real) -> Real {
        debug_assert_eq!(self.w, o.w);
        Real { m: &self.m - &o.m, w: self.w }
    }

    pub fn neg(&self) -> Real {
        Real { m: -&self.m, w: self.w }
    }

    pub fn mul(&self, o: &Real) -> Real {
        debug_assert_eq!(self.w, o.w);
        Real { m: (&self.m * &o.m) >> self.w, w: self.w }
    }

    pub fn div(&self, o: &Real) -> Real {
        debug_assert_eq!(self.w, o.w);
        Real { m: (&self.m << self.w) / &o.m, w: self.w }
    }

    pub fn mul_rat(&self, r: &Rational) -> Real {
        Real { m: (&self.m * r.numer()) / r.denom(), w: self.w }
    }

    pub fn mul_int(&self, n: &BigInt) -> Real {
        Real { m: &self.m * n, w: self.w }
    }

    pub fn div_int(&self, n: &BigInt) -> Real {
        Real { m: &self.m / n, w: self.w }
    }

    pub fn shl(&self, k: i64) -> Real {
        let m = if k >= 0 { &self.m << k as u64 } else { &self.m >> (-k) as u64 };
        Real { m, w: self.w }
    }

    pub fn is_negative(&self) -> bool {
        self.m.is_negative()
    }

    pub fn abs(&self) -> Real {
        Real { m: self.m.abs(), w: self.w }
    }

    /// Change the number of fractional bits.
    pub fn rescale(&self, w: u32) -> Real {
        let m = if w >= self.w { &self.m << (w - self.w) } else { &self.m >> (self.w - w) };
        Real { m, w }
    }

    pub fn sqrt(&self) -> Real {
        assert!(!self.m.is_negative(), "sqrt of a negative number");
        Real { m: (&self.m << self.w).sqrt(), w: self.w }
    }

    pub fn to_f64(&self) -> f64 {
        let bits = self.m.bits() as i64;
        let shift = (bits - 60).max(0);
        let top = (&self.m >> shift as u64).to_f64().unwrap_or(0.0);
        top * 2f64.powi((shift - self.w as i64) as i32)
    }

    /// `floor(log2 |x|)`, or `None` for zero.
    pub fn log2_floor(&self) -> Option<i64> {
        if self.m.is_zero() {
            None
        } else {
            Some(self.m.bits() as i64 - 1 - self.w as i64)
        }
    }

    /// Decimal rendering with `digits` fractional digits (truncated).
    pub fn to_decimal(&self, digits: usize) -> String {
        let neg = self.m.is_negative();
        let a = self.m.abs();
        let scale = BigInt::from(10u32).pow(digits as u32);
        let v = (&a * &scale) >> self.w;
        let (ip, fp) = v.div_rem(&scale);
        let mut s = format!("{}.{:0>width$}", ip, fp.to_string(), width = digits);
        if neg {
            s.insert(0, '-');
        }
        s
    }
}

/// `sum_{n>=0} (-1)^n / ((2n+1) k^(2n+1))` at `w` bits, `k >= 2`.
fn atan_inv(k: u64, w: u32) -> BigInt {
    let kk = BigInt::from(k * k);
    let mut power = (BigInt::one() << w) / k;
    let mut sum = BigInt::zero();
    let mut n = 0u64;
    while !power.is_zero() {
        let t = &power / (2 * n + 1);
        if n % 2 == 0 {
            sum += t;
        } else {
            sum -= t;
        }
        power /= &kk;
        n += 1;
    }
    sum
}

/// `atanh(1/k)` at `w` bits.
fn atanh_inv(k: u64, w: u32) -> BigInt {
    let kk = BigInt::from(k * k);
    let mut power = (BigInt::one() << w) / k;
    let mut sum = BigInt::zero();
    let mut n = 0u64;
    while !power.is_zero() {
        sum += &power / (2 * n + 1);
        power /= &kk;
        n += 1;
    }
    sum
}

static CONSTS: LazyLock<Mutex<HashMap<(u8, u32), Real>>> = LazyLock::new(Default::default);

fn cached(tag: u8, w: u32, f: impl FnOnce(u32) -> BigInt) -> Real {
    if let Some(r) = CONSTS.lock().unwrap().get(&(tag, w)) {
        return r.clone();
    }
    let m = f(w + 32) >> 32u32;
    let r = Real { m, w };
    CONSTS.lock().unwrap().insert((tag, w), r.clone());
    r
}

pub fn pi(w: u32) -> Real {
    cached(0, w, |w| 16 * atan_inv(5, w) - 4 * atan_inv(239, w))
}

pub fn ln2(w: u32) -> Real {
    cached(1, w, |w| 2 * atanh_inv(3, w))
}

pub fn exp(x: &Real) -> Real {
    let w = x.w;
    let wi = w + 32;
    let x = x.rescale(wi);
    let l2 = ln2(wi);
    // x = k ln2 + r with |r| <= ln2 / 2
    let k = (&x.m + (&l2.m >> 1u32)).div_floor(&l2.m);
    let r = x.sub(&l2.mul_int(&k));
    let s = ((wi as f64).sqrt() as u32).max(4);
    let r = r.shl(-(s as i64));
    let one = BigInt::one() << wi;
    let mut term = one.clone();
    let mut sum = one.clone();
    let mut n = 1u64;
    loop {
        term = ((&term * &r.m) >> wi) / n;
        if term.is_zero() {
            break;
        }
        sum += &term;
        n += 1;
    }
    let mut y = Real { m: sum, w: wi };
    for _ in 0..s {
        y = y.mul(&y);
    }
    let k = k.to_i64().expect("exponent out of range");
    y.shl(k).rescale(w)
}

/// Natural logarithm of a positive real.
pub fn ln(x: &Real) -> Real {
    assert!(x.m.is_positive(), "ln of a non-positive number");
    let w = x.w;
    let wi = w + 32;
    let x = x.rescale(wi);
    // x = 2^k y with y in [1, 2)
    let k = x.m.bits() as i64 - 1 - wi as i64;
    let y = x.shl(-k);
    let one = Real::from_i64(1, wi);
    let t = y.sub(&one).div(&y.add(&one));
    let t2 = t.mul(&t);
    let mut power = t.m.clone();
    let mut sum = BigInt::zero();
    let mut n = 0u64;
    while !power.is_zero() {
        sum += &power / (2 * n + 1);
        power = (&power * &t2.m) >> wi;
        n += 1;
    }
    let lny = Real { m: sum * 2, w: wi };
    lny.add(&ln2(wi).mul_int(&BigInt::from(k))).rescale(w)
}

/// `(cos, sin)` of a real angle with `|x| <= 1`, by Taylor series.
fn cos_sin_small(x: &Real) -> (Real, Real) {
    let w = x.w;
    let x2 = x.mul(x);
    let one = BigInt::one() << w;
    let (mut c, mut s) = (one.clone(), x.m.clone());
    let (mut tc, mut ts) = (one, x.m.clone());
    let mut n = 1u64;
    loop {
        tc = -((&tc * &x2.m) >> w) / ((2 * n - 1) * (2 * n));
        ts = -((&ts * &x2.m) >> w) / ((2 * n) * (2 * n + 1));
        if tc.is_zero() && ts.is_zero() {
            break;
        }
        c += &tc;
        s += &ts;
        n += 1;
    }
    (Real { m: c, w }, Real { m: s, w })
}

/// `(cos(pi p / q), sin(pi p / q))` for integers `p`, `q > 0`.
pub fn cos_sin_pi_frac(p: i64, q: u64, w: u32) -> (Real, Real) {
    let wi = w + 16;
    let q2 = 2 * q as i64;
    let mut p = p.rem_euclid(q2);
    // reduce to [0, pi] with sin sign, then [0, pi/2], then [0, pi/4]
    let mut sin_sign = 1;
    if p > q as i64 {
        p = q2 - p;
        sin_sign = -1;
    }
    let mut cos_sign = 1;
    if 2 * p > q as i64 {
        p = q as i64 - p;
        cos_sign = -1;
    }
    // now 0 <= p/q <= 1/2
    let swap = 4 * p > q as i64;
    let pp = if swap { q as i64 - 2 * p } else { 2 * p };
    // angle = pi * pp / (2q) <= pi/4
    let ang = pi(wi).mul_rat(&Rational::new(BigInt::from(pp), BigInt::from(2 * q)));
    let (c, s) = cos_sin_small(&ang);
    let (c, s) = if swap { (s, c) } else { (c, s) };
    let c = if cos_sign < 0 { c.neg() } else { c };
    let s = if sin_sign < 0 { s.neg() } else { s };
    (c.rescale(w), s.rescale(w))
}

/// Multiprecision complex number with its nominal precision.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ComplexApprox {
    pub re: Real,
    pub im: Real,
    /// Bits the value is claimed to be correct to, before any caller slack.
    pub precision_bits: u32,
}

impl ComplexApprox {
    pub fn new(re: Real, im: Real, precision_bits: u32) -> Self {
        ComplexApprox { re, im, precision_bits }
    }

    pub fn zero(prec: u32) -> Self {
        let w = work_bits(prec);
        ComplexApprox::new(Real::zero(w), Real::zero(w), prec)
    }

    pub fn from_real(re: Real, prec: u32) -> Self {
        let w = re.w;
        ComplexApprox::new(re, Real::zero(w), prec)
    }

    pub fn one(prec: u32) -> Self {
        Self::from_real(Real::from_i64(1, work_bits(prec)), prec)
    }

    pub fn add(&self, o: &Self) -> Self {
        ComplexApprox::new(self.re.add(&o.re), self.im.add(&o.im), self.precision_bits.min(o.precision_bits))
    }

    pub fn sub(&self, o: &Self) -> Self {
        ComplexApprox::new(self.re.sub(&o.re), self.im.sub(&o.im), self.precision_bits.min(o.precision_bits))
    }

    pub fn mul(&self, o: &Self) -> Self {
        let re = self.re.mul(&o.re).sub(&self.im.mul(&o.im));
        let im = self.re.mul(&o.im).add(&self.im.mul(&o.re));
        ComplexApprox::new(re, im, self.precision_bits.min(o.precision_bits))
    }

    pub fn scale(&self, r: &Real) -> Self {
        ComplexApprox::new(self.re.mul(r), self.im.mul(r), self.precision_bits)
    }

    pub fn mul_rat(&self, r: &Rational) -> Self {
        ComplexApprox::new(self.re.mul_rat(r), self.im.mul_rat(r), self.precision_bits)
    }

    pub fn norm_sqr(&self) -> Real {
        self.re.mul(&self.re).add(&self.im.mul(&self.im))
    }

    pub fn inv(&self) -> Self {
        let n = self.norm_sqr();
        ComplexApprox::new(self.re.div(&n), self.im.neg().div(&n), self.precision_bits)
    }

    pub fn div(&self, o: &Self) -> Self {
        self.mul(&o.inv())
    }

    pub fn conj(&self) -> Self {
        ComplexApprox::new(self.re.clone(), self.im.neg(), self.precision_bits)
    }

    pub fn pow(&self, mut e: i64) -> Self {
        let mut base = if e < 0 { self.inv() } else { self.clone() };
        e = e.abs();
        let mut acc = Self::one(self.precision_bits);
        acc.re = acc.re.rescale(self.re.w);
        acc.im = acc.im.rescale(self.re.w);
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul(&base);
            }
            base = base.mul(&base);
            e >>= 1;
        }
        acc
    }

    /// `i^k`.
    pub fn i_pow(k: i64, prec: u32) -> Self {
        let w = work_bits(prec);
        let (re, im) = match k.rem_euclid(4) {
            0 => (1, 0),
            1 => (0, 1),
            2 => (-1, 0),
            _ => (0, -1),
        };
        ComplexApprox::new(Real::from_i64(re, w), Real::from_i64(im, w), prec)
    }

    /// `log2 |self - o|`, or `None` when they agree to every working bit.
    pub fn log2_dist(&self, o: &Self) -> Option<i64> {
        let d = self.sub(o);
        let a = d.re.abs();
        let b = d.im.abs();
        let big = if a.m > b.m { a } else { b };
        big.log2_floor().map(|l| l + 1)
    }

    /// True when `|self - o| < 2^-bits` (up to the factor two from max-norm).
    pub fn close_to(&self, o: &Self, bits: u32) -> bool {
        match self.log2_dist(o) {
            None => true,
            Some(l) => l < -(bits as i64),
        }
    }

    pub fn to_string_digits(&self, digits: usize) -> String {
        let im = self.im.to_decimal(digits);
        if im.starts_with('-') {
            format!("{} - {}i", self.re.to_decimal(digits), &im[1..])
        } else {
            format!("{} + {}i", self.re.to_decimal(digits), im)
        }
    }
}

/// `exp(2 pi i k / n)` at the working width of `prec`.
pub fn root_of_unity(k: i64, n: u64, prec: u32) -> ComplexApprox {
    let (c, s) = cos_sin_pi_frac(2 * k, n, work_bits(prec));
    ComplexApprox::new(c, s, prec)
}

/// Sign of a big integer as -1/0/1.
pub fn sign_of(x: &BigInt) -> i32 {
    match x.sign() {
        Sign::Minus => -1,
        Sign::NoSign => 0,
        Sign::Plus => 1,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const PI_50: &str = "3.14159265358979323846264338327950288419716939937510";

    #[test]
    fn pi_digits() {
        assert_eq!(pi(256).to_decimal(50), PI_50);
    }

    #[test]
    fn exp_ln_roundtrip() {
        let w = 300;
        let x = Real::from_rational(&Rational::new(7.into(), 3.into()), w);
        let y = ln(&exp(&x));
        assert!((y.m - x.m).abs() < BigInt::from(1u32 << 12));
        let e = exp(&Real::from_i64(1, w));
        assert_eq!(e.to_decimal(30), "2.718281828459045235360287471352");
    }

    #[test]
    fn trig() {
        let w = 256;
        let (c, s) = cos_sin_pi_frac(1, 6, w);
        let half = Real::from_rational(&Rational::new(1.into(), 2.into()), w);
        assert!((s.m - half.m).abs() < BigInt::from(1u32 << 8));
        let three = Real::from_i64(3, w).sqrt().shl(-1);
        assert!((c.m - three.m).abs() < BigInt::from(1u32 << 8));
        let (c, s) = cos_sin_pi_frac(7, 4, w);
        assert!(c.to_f64() > 0.7 && s.to_f64() < -0.7);
    }
}
