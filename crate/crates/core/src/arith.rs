//! Small-integer number theory shared by every other module.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

/// Exact rational scalars. Always kept in lowest terms with a positive denominator.
pub type Rational = BigRational;

pub fn rat(n: i64, d: i64) -> Rational {
    Rational::new(BigInt::from(n), BigInt::from(d))
}

pub fn rat_int(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

/// Text form `a/b`, or `a` when the denominator is one.
pub fn fmt_rat(r: &Rational) -> String {
    if r.denom().is_one() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

pub fn parse_rat(s: &str) -> Option<Rational> {
    let s = s.trim();
    match s.split_once('/') {
        Some((n, d)) => {
            let n: BigInt = n.trim().parse().ok()?;
            let d: BigInt = d.trim().parse().ok()?;
            if d.is_zero() {
                return None;
            }
            Some(Rational::new(n, d))
        }
        None => Some(Rational::from_integer(s.parse().ok()?)),
    }
}

pub fn gcd(a: u64, b: u64) -> u64 {
    a.gcd(&b)
}

pub fn lcm(a: u64, b: u64) -> u64 {
    a / gcd(a, b) * b
}

/// Representative of `a mod m` in `[0, m)`.
pub fn modulo(a: i64, m: u64) -> u64 {
    a.rem_euclid(m as i64) as u64
}

pub fn factor(mut n: u64) -> Vec<(u64, u32)> {
    let mut out = Vec::new();
    let mut p = 2u64;
    while p * p <= n {
        if n % p == 0 {
            let mut e = 0;
            while n % p == 0 {
                n /= p;
                e += 1;
            }
            out.push((p, e));
        }
        p += if p == 2 { 1 } else { 2 };
    }
    if n > 1 {
        out.push((n, 1));
    }
    out
}

pub fn prime_divisors(n: u64) -> Vec<u64> {
    factor(n).into_iter().map(|(p, _)| p).collect()
}

pub fn euler_phi(n: u64) -> u64 {
    factor(n)
        .into_iter()
        .fold(n, |acc, (p, _)| acc / p * (p - 1))
}

/// Number of distinct prime factors.
pub fn omega(n: u64) -> usize {
    factor(n).len()
}

pub fn divisors(n: u64) -> Vec<u64> {
    let mut ds = vec![1u64];
    for (p, e) in factor(n) {
        let cur = ds.clone();
        let mut pk = 1;
        for _ in 0..e {
            pk *= p;
            ds.extend(cur.iter().map(|d| d * pk));
        }
    }
    ds.sort_unstable();
    ds
}

pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    for p in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        if n % p == 0 {
            return n == p;
        }
    }
    // deterministic Miller-Rabin for 64-bit inputs
    let mut d = n - 1;
    let mut s = 0;
    while d % 2 == 0 {
        d /= 2;
        s += 1;
    }
    'outer: for a in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        let mut x = pow_mod(a, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = mul_mod(x, x, n);
            if x == n - 1 {
                continue 'outer;
            }
        }
        return false;
    }
    true
}

pub fn next_prime(n: u64) -> u64 {
    let mut k = n + 1;
    while !is_prime(k) {
        k += 1;
    }
    k
}

pub fn mul_mod(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

pub fn pow_mod(mut b: u64, mut e: u64, m: u64) -> u64 {
    if m == 1 {
        return 0;
    }
    let mut r = 1u64;
    b %= m;
    while e > 0 {
        if e & 1 == 1 {
            r = mul_mod(r, b, m);
        }
        b = mul_mod(b, b, m);
        e >>= 1;
    }
    r
}

/// Inverse of `a` modulo `m`, if it exists.
pub fn inv_mod(a: u64, m: u64) -> Option<u64> {
    let g = (a as i128).extended_gcd(&(m as i128));
    if g.gcd != 1 {
        return None;
    }
    Some(g.x.rem_euclid(m as i128) as u64)
}

/// The units of `Z/mZ` in increasing order.
pub fn units(m: u64) -> Vec<u64> {
    if m == 1 {
        return vec![0];
    }
    (1..m).filter(|&u| gcd(u, m) == 1).collect()
}

/// Multiplicative order of `a` modulo `m`; `a` must be a unit.
pub fn mult_order(a: u64, m: u64) -> u64 {
    let mut ord = carmichael(m);
    for p in prime_divisors(ord) {
        while ord % p == 0 && pow_mod(a, ord / p, m) == 1 % m {
            ord /= p;
        }
    }
    ord
}

/// Carmichael's function, the exponent of `(Z/mZ)^x`.
pub fn carmichael(m: u64) -> u64 {
    factor(m).into_iter().fold(1, |acc, (p, e)| {
        let l = if p == 2 && e >= 3 {
            1u64 << (e - 2)
        } else {
            p.pow(e - 1) * (p - 1)
        };
        lcm(acc, l)
    })
}

/// Squarefree kernel check.
pub fn is_squarefree(n: u64) -> bool {
    factor(n).iter().all(|&(_, e)| e == 1)
}

pub fn is_prime_power(n: u64) -> bool {
    factor(n).len() == 1
}

/// `n` as a machine integer when it fits.
pub fn small(n: &BigInt) -> Option<i64> {
    n.to_i64()
}

/// Floor of a rational.
pub fn floor(r: &Rational) -> BigInt {
    r.floor().to_integer()
}

/// Fractional part in `[0, 1)`.
pub fn frac(r: &Rational) -> Rational {
    r - Rational::from_integer(floor(r))
}

/// Fractional part in `(0, 1]`: the `{x}` convention used for Gamma arguments.
pub fn frac_upper(r: &Rational) -> Rational {
    let f = frac(r);
    if f.is_zero() {
        Rational::one()
    } else {
        f
    }
}

/// Symmetric residue of `a` modulo `m` as used by rational reconstruction.
pub fn sym_mod(a: &BigInt, m: &BigInt) -> BigInt {
    let mut r = a.mod_floor(m);
    if &r * 2 > *m {
        r -= m;
    }
    r
}

/// Rational reconstruction of `a mod m`: the unique `n/d` with `|n|, d < sqrt(m/2)`, if any.
pub fn rational_reconstruct(a: &BigInt, m: &BigInt) -> Option<Rational> {
    let bound = (m / 2u32).sqrt();
    let (mut r0, mut r1) = (m.clone(), a.mod_floor(m));
    let (mut t0, mut t1) = (BigInt::zero(), BigInt::one());
    while r1 > bound {
        let q = &r0 / &r1;
        let r2 = &r0 - &q * &r1;
        let t2 = &t0 - &q * &t1;
        r0 = std::mem::replace(&mut r1, r2);
        t0 = std::mem::replace(&mut t1, t2);
    }
    if t1.is_zero() || t1.abs() > bound {
        return None;
    }
    if !r1.gcd(&t1).is_one() && !r1.is_zero() {
        return None;
    }
    Some(Rational::new(r1, t1))
}

/// Legendre symbol `(a/p)` for an odd prime `p`, as -1, 0 or 1.
pub fn legendre(a: u64, p: u64) -> i32 {
    let a = a % p;
    if a == 0 {
        return 0;
    }
    if pow_mod(a, (p - 1) / 2, p) == 1 {
        1
    } else {
        -1
    }
}

/// Reduce a rational modulo a prime not dividing its denominator.
pub fn rat_mod(r: &Rational, p: u64) -> Option<u64> {
    let pb = BigInt::from(p);
    let d = r.denom().mod_floor(&pb).to_u64()?;
    if d == 0 {
        return None;
    }
    let n = r.numer().mod_floor(&pb).to_u64()?;
    Some(mul_mod(n, inv_mod(d, p)?, p))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn phi_and_divisors() {
        assert_eq!(euler_phi(15), 8);
        assert_eq!(euler_phi(420), 96);
        assert_eq!(divisors(12), vec![1, 2, 3, 4, 6, 12]);
        assert_eq!(divisors(105).iter().sum::<u64>(), 192);
    }

    #[test]
    fn orders() {
        assert_eq!(mult_order(2, 7), 3);
        assert_eq!(carmichael(420), 12);
        assert_eq!(mult_order(31, 15), 1);
    }

    #[test]
    fn reconstruction() {
        let m = BigInt::from(1_000_003u64);
        let r = rat(-17, 23);
        let inv = inv_mod(23, 1_000_003).unwrap();
        let a = BigInt::from(mul_mod(1_000_003 - 17, inv, 1_000_003));
        assert_eq!(rational_reconstruct(&a, &m), Some(r));
    }

    #[test]
    fn primes() {
        let ps: Vec<u64> = (0..50).filter(|&n| is_prime(n)).collect();
        assert_eq!(ps, vec![2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47]);
        assert!(is_prime(1_000_000_007));
    }
}
