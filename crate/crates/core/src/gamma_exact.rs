//! Formal Gamma monomials, their numeric values, and exact reduction of
//! squared constant-weight monomials to cyclotomic numbers.
//!
//! A square `gm^2` is reduced by decomposing the doubled argument function
//! over the `epsilon_{d,a}`, replacing each `Gamma(epsilon_{d,a})` by its
//! closed form (translation, reflection, multiplication formula), and then
//! writing sines as differences of roots of unity.

use crate::arith::{factor, frac_upper, lcm, rat, Rational};
use crate::characters::{decompose_distribution, AmFunction, FermatCharacter};
use crate::cyclotomic::CycloElement;
use crate::error::{Error, Result};
use crate::mumford_tate::MTEquation;
use crate::numeric::{cos_sin_pi_frac, exp, ln, pi, work_bits, ComplexApprox, Real};
use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Serialize, Serializer};
use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::sync::{LazyLock, RwLock};

pub use crate::cyclotomic::sqrt_of_positive_integer;

/// `r (2 pi)^a i^b prod Gamma(x)^e prod n^s`, arguments in `(0, 1)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GammaMonomial {
    pub gamma_factors: BTreeMap<Rational, i64>,
    pub two_pi_exp: Rational,
    /// Exponent of `i`, reduced into `[0, 4)`.
    pub i_exp: Rational,
    pub rational_scalar: Rational,
    pub radical_part: BTreeMap<u64, Rational>,
}

/// Where a monomial comes from.
#[derive(Clone, Debug)]
pub enum GammaSource {
    Equation(MTEquation),
    Character(FermatCharacter),
    GammaHat { u: i64, alpha: FermatCharacter },
    PValue(FermatCharacter),
    Theta { k: u64, m: u64 },
}

pub fn build(source: &GammaSource) -> Result<GammaMonomial> {
    match source {
        GammaSource::Equation(f) => Ok(GammaMonomial::of_equation(f)),
        GammaSource::Character(a) => Ok(GammaMonomial::of_character(a)),
        GammaSource::GammaHat { u, alpha } => GammaMonomial::gamma_hat(*u, alpha),
        GammaSource::PValue(b) => GammaMonomial::p_value(b),
        GammaSource::Theta { k, m } => GammaMonomial::theta(*k, *m),
    }
}

fn reduce_i(e: &Rational) -> Rational {
    let four = rat(4, 1);
    
    e - (e / &four).floor() * &four
}

/// The indices `i_r` of a character written as `gamma_{i_1} * ... * gamma_{i_n}`.
pub fn gamma_indices(alpha: &FermatCharacter) -> Result<Vec<u64>> {
    let m = alpha.modulus();
    let e = alpha.entries();
    if e.len() % 3 != 0 {
        return Err(Error::Parse(format!("{alpha} is not a product of gamma_i")));
    }
    e.chunks(3)
        .map(|t| {
            if t[0] == t[1] && (2 * t[0] + t[2]) % m == 0 && t[0] != 0 && (2 * t[0]) % m != 0 {
                Ok(t[0])
            } else {
                Err(Error::Parse(format!("{alpha} is not a product of gamma_i")))
            }
        })
        .collect()
}

impl GammaMonomial {
    pub fn one() -> Self {
        GammaMonomial {
            gamma_factors: BTreeMap::new(),
            two_pi_exp: Rational::zero(),
            i_exp: Rational::zero(),
            rational_scalar: Rational::one(),
            radical_part: BTreeMap::new(),
        }
    }

    pub fn rational(r: Rational) -> Self {
        GammaMonomial { rational_scalar: r, ..Self::one() }
    }

    /// `(2 pi i)^e`.
    pub fn two_pi_i(e: Rational) -> Self {
        GammaMonomial { two_pi_exp: e.clone(), i_exp: reduce_i(&e), ..Self::one() }
    }

    /// `Gamma(x)^e` for rational `x > 0`, translated into `(0, 1]`.
    pub fn gamma(x: &Rational, e: i64) -> Self {
        assert!(x.is_positive(), "Gamma at a non-positive argument");
        let mut g = Self::one();
        let mut x = x.clone();
        let one = Rational::one();
        while x > one {
            x -= &one;
            // Gamma(x + 1) = x Gamma(x)
            g.rational_scalar *= pow_rat(&x, e);
        }
        if x != one {
            *g.gamma_factors.entry(x).or_insert(0) += e;
        }
        g
    }

    pub fn mul(&self, o: &Self) -> Self {
        let mut r = self.clone();
        for (x, e) in &o.gamma_factors {
            *r.gamma_factors.entry(x.clone()).or_insert(0) += e;
        }
        r.gamma_factors.retain(|_, e| *e != 0);
        r.two_pi_exp += &o.two_pi_exp;
        r.i_exp = reduce_i(&(&r.i_exp + &o.i_exp));
        r.rational_scalar *= &o.rational_scalar;
        for (n, e) in &o.radical_part {
            *r.radical_part.entry(*n).or_insert_with(Rational::zero) += e;
        }
        r.radical_part.retain(|_, e| !e.is_zero());
        r
    }

    pub fn pow(&self, k: i64) -> Self {
        let kr = rat(k, 1);
        GammaMonomial {
            gamma_factors: self.gamma_factors.iter().map(|(x, e)| (x.clone(), e * k)).filter(|(_, e)| *e != 0).collect(),
            two_pi_exp: &self.two_pi_exp * &kr,
            i_exp: reduce_i(&(&self.i_exp * &kr)),
            rational_scalar: pow_rat(&self.rational_scalar, k),
            radical_part: if k == 0 {
                BTreeMap::new()
            } else {
                self.radical_part.iter().map(|(n, e)| (*n, e * &kr)).collect()
            },
        }
    }

    pub fn inv(&self) -> Self {
        self.pow(-1)
    }

    /// `n^e` for a positive integer `n`.
    pub fn radical(n: u64, e: Rational) -> Self {
        let mut g = Self::one();
        if n > 1 && !e.is_zero() {
            g.radical_part.insert(n, e);
        }
        g
    }

    /// `i^e`.
    pub fn i_power(e: Rational) -> Self {
        GammaMonomial { i_exp: reduce_i(&e), ..Self::one() }
    }

    /// `Gamma(f) = prod_j [Gamma(j/m)^2 Gamma([-2j]/m)]^{d_j}`, `[-2j]` in `[1, m]`.
    pub fn of_equation(f: &MTEquation) -> Self {
        let m = f.m() as i64;
        let mut g = Self::one();
        for (&j, &d) in f.exponents() {
            let j = j as i64;
            let r = (-2 * j).rem_euclid(m);
            let r = if r == 0 { m } else { r };
            g = g.mul(&Self::gamma(&rat(j, m), 2 * d)).mul(&Self::gamma(&rat(r, m), d));
        }
        g
    }

    /// `Gamma(alpha) = (2 pi i)^{-<alpha>} prod Gamma({a_i/m})`, `{.}` in `(0, 1]`.
    pub fn of_character(alpha: &FermatCharacter) -> Self {
        let m = alpha.modulus() as i64;
        let mut counts: BTreeMap<u64, i64> = BTreeMap::new();
        for &a in alpha.entries() {
            *counts.entry(a).or_insert(0) += 1;
        }
        let mut g = Self::two_pi_i(-alpha.weight(1));
        for (a, c) in counts {
            let x = frac_upper(&rat(a as i64, m));
            g = g.mul(&Self::gamma(&x, c));
        }
        g
    }

    /// `(2 pi i)^{-q/2} prod_j Gamma([u i_j]/m)^2 / Gamma([2u i_j]/m)`.
    pub fn gamma_hat(u: i64, alpha: &FermatCharacter) -> Result<Self> {
        let m = alpha.modulus();
        if crate::arith::gcd(crate::arith::modulo(u, m), m) != 1 {
            return Err(Error::NotCoprime(u, m));
        }
        let idx = gamma_indices(alpha)?;
        let mut g = Self::two_pi_i(rat(-(idx.len() as i64), 2));
        for i in idx {
            let a = crate::arith::modulo(u * i as i64, m) as i64;
            let b = crate::arith::modulo(2 * u * i as i64, m) as i64;
            g = g.mul(&Self::gamma(&rat(a, m as i64), 2)).mul(&Self::gamma(&rat(b, m as i64), -1));
        }
        Ok(g)
    }

    /// `P(gamma, omega_beta) = (2 pi i)^{-n/2} prod_r Gamma(i_r/m)^2 Gamma(2 i_r/m)^{-1}`.
    pub fn p_value(beta: &FermatCharacter) -> Result<Self> {
        let m = beta.modulus() as i64;
        let idx = gamma_indices(beta)?;
        let mut g = Self::two_pi_i(rat(-(idx.len() as i64), 2));
        for i in idx {
            g = g.mul(&Self::gamma(&rat(i as i64, m), 2)).mul(&Self::gamma(&rat(2 * i as i64, m), -1));
        }
        Ok(g)
    }

    /// `theta_k = sin(k pi / m)`, written as `pi / (Gamma(k/m) Gamma((m-k)/m))`.
    pub fn theta(k: u64, m: u64) -> Result<Self> {
        if k == 0 || k >= m {
            return Err(Error::BadIndex(k as i64, m));
        }
        let (k, m) = (k as i64, m as i64);
        let g = Self::gamma(&rat(k, m), -1).mul(&Self::gamma(&rat(m - k, m), -1));
        Ok(g.mul(&GammaMonomial { two_pi_exp: Rational::one(), rational_scalar: rat(1, 2), ..Self::one() }))
    }

    /// `Gamma(gamma_det)` with `gamma_det = gamma_1 * ... * gamma_{m-1}` (skipping `m/2`).
    pub fn gamma_det(m: u64) -> Self {
        let mut entries = Vec::new();
        for j in crate::mumford_tate::variable_indices(m) {
            entries.extend_from_slice(&[j as i64, j as i64, -2 * j as i64]);
        }
        Self::of_character(&FermatCharacter::new(m, &entries).expect("gamma_det is a character"))
    }

    /// Least common denominator of the Gamma arguments.
    pub fn level(&self) -> u64 {
        self.gamma_factors.keys().fold(1u64, |l, x| lcm(l, x.denom().to_u64().expect("level fits in u64")))
    }

    /// Exponents of the Gamma factors as a function on `A_level`; index 0 stays 0.
    pub fn am_function(&self) -> AmFunction {
        let l = self.level().max(2);
        let mut v = vec![0i64; l as usize];
        for (x, e) in &self.gamma_factors {
            let k = (x * Rational::from_integer(BigInt::from(l))).to_integer().to_usize().unwrap();
            v[k % l as usize] += e;
        }
        AmFunction::from_values(l, v)
    }
}

fn pow_rat(x: &Rational, e: i64) -> Rational {
    if e >= 0 {
        num_traits::pow(x.clone(), e as usize)
    } else {
        num_traits::pow(x.recip(), (-e) as usize)
    }
}

fn fmt_exp(r: &Rational) -> String {
    crate::arith::fmt_rat(r)
}

impl fmt::Display for GammaMonomial {
    /// `(2pi)^{a} i^{b} r * prod Gamma(p/q)^{e} * prod n^{u/v}`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "(2pi)^{{{}}} i^{{{}}} {}",
            fmt_exp(&self.two_pi_exp),
            fmt_exp(&self.i_exp),
            fmt_exp(&self.rational_scalar)
        )?;
        for (x, e) in &self.gamma_factors {
            write!(f, " * Gamma({})^{{{}}}", fmt_exp(x), e)?;
        }
        for (n, e) in &self.radical_part {
            write!(f, " * {}^{{{}}}", n, fmt_exp(e))?;
        }
        Ok(())
    }
}

impl Serialize for GammaMonomial {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

// ---------------------------------------------------------------- numerics

static BERNOULLI: LazyLock<RwLock<Vec<Rational>>> = LazyLock::new(|| RwLock::new(vec![Rational::one()]));

/// `B_0, ..., B_n` (with `B_1 = -1/2`).
fn bernoulli(n: usize) -> Vec<Rational> {
    {
        let b = BERNOULLI.read().unwrap();
        if b.len() > n {
            return b[..=n].to_vec();
        }
    }
    let mut b = BERNOULLI.write().unwrap();
    while b.len() <= n {
        let k = b.len();
        // sum_{j<=k} C(k+1, j) B_j = 0
        let mut s = Rational::zero();
        let mut c = BigInt::one();
        for (j, bj) in b.iter().enumerate() {
            s += bj * Rational::from_integer(c.clone());
            c = c * BigInt::from(k + 1 - j) / BigInt::from(j + 1);
        }
        let next = -s / Rational::from_integer(BigInt::from(k + 1));
        b.push(next);
    }
    b[..=n].to_vec()
}

static LN_GAMMA: LazyLock<RwLock<HashMap<(Rational, u32), Real>>> = LazyLock::new(Default::default);

/// `ln Gamma(x)` for rational `x > 0` at width `w`.
///
/// Shifts to `z = x + K` with `K ~ 0.12 w`, sums the Stirling series until
/// a term drops below `2^-(w+4)`; for real `z > 0` the remainder is bounded
/// by the first omitted term. The shift is undone with the exact rational
/// `prod_{k<K} (x + k)`.
pub fn ln_gamma(x: &Rational, w: u32) -> Real {
    assert!(x.is_positive());
    if let Some(r) = LN_GAMMA.read().unwrap().get(&(x.clone(), w)) {
        return r.clone();
    }
    let wi = w + 16;
    let k = (w as u64 * 12 / 100 + 2) as i64;
    let z = x + rat(k, 1);
    let mut shift = Rational::one();
    for j in 0..k {
        shift *= x + rat(j, 1);
    }
    let lnz = ln(&Real::from_rational(&z, wi));
    let half = rat(1, 2);
    let two_pi = pi(wi).shl(1);
    let mut acc = lnz.mul_rat(&(&z - &half)).sub(&Real::from_rational(&z, wi));
    acc = acc.add(&ln(&two_pi).mul_rat(&half));
    let zinv = z.recip();
    let zinv2 = &zinv * &zinv;
    let mut zp = zinv.clone();
    let tiny = BigInt::one() << 4u32;
    let mut n = 1usize;
    loop {
        let b = bernoulli(2 * n);
        let coeff = &b[2 * n] / Rational::from_integer(BigInt::from(2 * n * (2 * n - 1)));
        let term = Real::from_rational(&(coeff * &zp), wi);
        if term.m.abs() < tiny {
            break;
        }
        acc = acc.add(&term);
        zp *= &zinv2;
        n += 1;
        assert!(n < 4 * w as usize, "Stirling series failed to converge");
    }
    let r = acc.sub(&ln(&Real::from_rational(&shift, wi))).rescale(w);
    LN_GAMMA.write().unwrap().insert((x.clone(), w), r.clone());
    r
}

/// `Gamma(x)` for rational `x > 0`.
pub fn gamma_real(x: &Rational, prec: u32) -> Real {
    exp(&ln_gamma(x, work_bits(prec)))
}

fn log_magnitude(gm: &GammaMonomial, w: u32) -> Real {
    let mut l = Real::zero(w);
    for (x, e) in &gm.gamma_factors {
        l = l.add(&ln_gamma(x, w).mul_int(&BigInt::from(*e)));
    }
    if !gm.two_pi_exp.is_zero() {
        l = l.add(&ln(&pi(w).shl(1)).mul_rat(&gm.two_pi_exp));
    }
    for (n, e) in &gm.radical_part {
        l = l.add(&ln(&Real::from_i64(*n as i64, w)).mul_rat(e));
    }
    if !gm.rational_scalar.is_zero() {
        l = l.add(&ln(&Real::from_rational(&gm.rational_scalar.abs(), w)));
    }
    l
}

/// Numeric value of `gm`, absolute error below `2^-prec` relative to its size.
pub fn numeric_eval(gm: &GammaMonomial, prec: u32) -> ComplexApprox {
    let w0 = work_bits(prec);
    if gm.rational_scalar.is_zero() {
        return ComplexApprox::zero(prec);
    }
    // extra width so that small values keep `prec` significant bits
    let est = log_magnitude(gm, 64).to_f64();
    let extra = if est < 0.0 { (-est / std::f64::consts::LN_2).ceil() as u32 + 8 } else { 0 };
    let w = w0 + extra;
    let mag = exp(&log_magnitude(gm, w));
    let mag = if gm.rational_scalar.is_negative() { mag.neg() } else { mag };
    let (p, q) = (gm.i_exp.numer().clone(), gm.i_exp.denom().clone());
    let (c, s) = cos_sin_pi_frac(p.to_i64().unwrap(), (q * 2u32).to_u64().unwrap(), w);
    let z = ComplexApprox::new(mag.mul(&c), mag.mul(&s), prec);
    ComplexApprox::new(z.re.rescale(w0), z.im.rescale(w0), prec)
}

// ---------------------------------------------------------------- exact

/// An exact value with the numeric check it passed.
#[derive(Clone, Debug)]
pub struct ExactAlgebraic {
    pub value: CycloElement,
    pub label: String,
    pub numeric: ComplexApprox,
}

impl Serialize for ExactAlgebraic {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        use serde::ser::SerializeStruct;
        let mut st = s.serialize_struct("ExactAlgebraic", 3)?;
        st.serialize_field("value", &self.value)?;
        st.serialize_field("label", &self.label)?;
        st.serialize_field("numeric_check", &self.numeric.to_string_digits(30))?;
        st.end()
    }
}

/// Compares `a` and `b` to `bits` bits relative to `max(1, |b|)`.
pub fn relatively_close(a: &ComplexApprox, b: &ComplexApprox, bits: u32) -> bool {
    let w = a.re.w.max(b.re.w);
    let a = ComplexApprox::new(a.re.rescale(w), a.im.rescale(w), a.precision_bits);
    let b = ComplexApprox::new(b.re.rescale(w), b.im.rescale(w), b.precision_bits);
    let scale = b.re.abs().log2_floor().into_iter().chain(b.im.abs().log2_floor()).max().unwrap_or(0).max(0);
    match a.log2_dist(&b) {
        None => true,
        Some(l) => l - scale < -(bits as i64),
    }
}

/// Default width of the numeric cross-check.
pub const CHECK_BITS: u32 = 256;

pub fn reduce_square(gm: &GammaMonomial) -> Result<ExactAlgebraic> {
    reduce_square_with(gm, CHECK_BITS)
}

/// Exact value of `gm^2` in a cyclotomic field, checked numerically at `prec >= 256` bits.
pub fn reduce_square_with(gm: &GammaMonomial, prec: u32) -> Result<ExactAlgebraic> {
    let prec = prec.max(CHECK_BITS);
    let value = exact_square(gm)?;
    let numeric = numeric_eval(gm, prec);
    let sq = numeric.mul(&numeric);
    let emb = value.embed(prec);
    if !relatively_close(&emb, &sq, prec / 2) {
        return Err(Error::NumericMismatch(format!(
            "{gm}: exact {} vs numeric {}",
            emb.to_string_digits(20),
            sq.to_string_digits(20)
        )));
    }
    Ok(ExactAlgebraic { value, label: format!("({gm})^2"), numeric: sq })
}

/// `sin(pi s)` for rational `s` in `(0, 1)` as `(zeta - zeta^-1) / 2i`; returns the root-of-unity difference.
fn sine_numerator(s: &Rational) -> CycloElement {
    let (p, q) = (s.numer().to_i64().unwrap(), s.denom().to_u64().unwrap());
    CycloElement::root_of_unity(p, 2 * q).sub(&CycloElement::root_of_unity(-p, 2 * q))
}

/// `1 / (zeta_{2q}^p - zeta_{2q}^-p)` without a linear solve: with `z = zeta_q^p`,
/// `1/(z - 1) = (1/q) sum_k k z^k`.
fn sine_numerator_inv(s: &Rational) -> CycloElement {
    let (p, q) = (s.numer().to_i64().unwrap(), s.denom().to_i64().unwrap());
    let terms: Vec<(i64, Rational)> = (1..q).map(|k| (p * (1 + 2 * k), rat(k, q))).collect();
    CycloElement::from_terms(2 * q as u64, &terms)
}

fn exact_square(gm: &GammaMonomial) -> Result<CycloElement> {
    let two = rat(2, 1);
    let mut two_pi = &gm.two_pi_exp * &two;
    let mut i_exp = &gm.i_exp * &two;
    let scalar = &gm.rational_scalar * &gm.rational_scalar;
    // integer prime powers kept apart from `scalar`; they can be huge
    let mut pows: BTreeMap<u64, i64> = BTreeMap::new();
    let mut primes: BTreeMap<u64, Rational> = BTreeMap::new();
    let add_radical = |n: u64, e: &Rational, primes: &mut BTreeMap<u64, Rational>| {
        for (p, k) in factor(n) {
            *primes.entry(p).or_insert_with(Rational::zero) += e * rat(k as i64, 1);
        }
    };
    for (n, e) in &gm.radical_part {
        add_radical(*n, &(e * &two), &mut primes);
    }
    let mut sines: BTreeMap<Rational, i64> = BTreeMap::new();
    if !gm.gamma_factors.is_empty() {
        let h = gm.am_function();
        let l = h.modulus() as i64;
        let dec = decompose_distribution(&h)?;
        for (ix, c) in &dec.terms {
            let d = ix.d as i64;
            let da = rat(d * ix.k as i64, l);
            let cr = rat(*c, 1);
            // prod_{k<d} Gamma(a + k/d) = (2 pi)^{(d-1)/2} d^{1/2 - da} Gamma(da)
            add_radical(ix.d, &(&cr * (rat(1, 2) - &da)), &mut primes);
            if da < Rational::one() {
                // Gamma(da) Gamma(1 - da) = pi / sin(pi da) = (2 pi) / (2 sin(pi da))
                two_pi += &cr * rat(d + 1, 2);
                *pows.entry(2).or_insert(0) -= c;
                *sines.entry(da).or_insert(0) -= c;
            } else {
                two_pi += &cr * rat(d - 1, 2);
            }
        }
    }
    if !two_pi.is_zero() {
        return Err(Error::TranscendentalResidue(format!("(2 pi)^{} remains in ({gm})^2", fmt_exp(&two_pi))));
    }
    let mut sqrt_of = BigInt::one();
    for (p, e) in &primes {
        let e2 = e * &two;
        if !e2.is_integer() {
            return Err(Error::NonHalfIntegerExponent(*p, fmt_exp(e)));
        }
        let whole = e.floor();
        *pows.entry(*p).or_insert(0) += whole.to_integer().to_i64().unwrap();
        if !(e - &whole).is_zero() {
            sqrt_of *= *p;
        }
    }
    sines.retain(|_, e| *e != 0);
    for e in sines.values() {
        // sin = D / (2i)
        *pows.entry(2).or_insert(0) -= e;
        i_exp -= rat(*e, 1);
    }
    pows.retain(|_, e| *e != 0);
    let i_exp = reduce_i(&i_exp);
    let unit_exp = (i_exp.numer().to_i64().unwrap(), 4 * i_exp.denom().to_u64().unwrap());
    let total: i64 = sines.values().map(|e| e.abs()).sum();
    let v = if total <= DIRECT_SINE_LIMIT {
        let mut prod = CycloElement::one();
        for (s, e) in &sines {
            let d = if *e > 0 { sine_numerator(s) } else { sine_numerator_inv(s) };
            prod = prod.mul(&d.pow(e.abs())?);
        }
        let scalar = pows.iter().fold(scalar, |acc, (p, e)| acc * pow_rat(&rat(*p as i64, 1), *e));
        prod.mul(&CycloElement::root_of_unity(unit_exp.0, unit_exp.1)).scale(&scalar)
    } else {
        sine_product_modular(&sines, unit_exp, &scalar, &pows)?
    };
    let radical = sqrt_of_positive_integer(sqrt_of.to_u64().expect("radicand fits in u64"));
    Ok(v.mul(&radical).minimal())
}

/// Above this many sine factors (with multiplicity) the product is evaluated modularly.
const DIRECT_SINE_LIMIT: i64 = 2000;

/// `r * prod p^{k_p} * zeta^u * prod_s D(s)^{e_s}` by evaluation at every place above primes
/// `q = 1 mod N`, interpolation, CRT and rational reconstruction.
///
/// Large exponent vectors come from the distribution decomposition; the
/// product itself is small but the partial products are not. Reconstruction
/// stops once two successive prime sets give the same element.
fn sine_product_modular(
    sines: &BTreeMap<Rational, i64>,
    unit: (i64, u64),
    scalar: &Rational,
    pows: &BTreeMap<u64, i64>,
) -> Result<CycloElement> {
    use crate::arith::{inv_mod, is_prime, mul_mod, pow_mod, rat_mod, rational_reconstruct, units};
    let n = sines.keys().fold(unit.1, |l, s| lcm(l, 2 * s.denom().to_u64().unwrap()));
    let places = units(n);
    let phi = places.len();
    let factors: Vec<(u64, i64)> = sines
        .iter()
        .map(|(s, e)| {
            let (p, q) = (s.numer().to_i64().unwrap(), s.denom().to_u64().unwrap());
            ((p.rem_euclid(2 * q as i64) as u64) * (n / (2 * q)), *e)
        })
        .collect();
    let unit_shift = (unit.0.rem_euclid(unit.1 as i64) as u64) * (n / unit.1);
    let mut modulus = BigInt::one();
    let mut residues: Vec<BigInt> = vec![BigInt::zero(); phi];
    let mut previous: Option<Vec<Rational>> = None;
    let mut q = (1u64 << 62) / n * n + 1;
    for _ in 0..MODULAR_PRIME_BUDGET {
        loop {
            q -= n;
            if is_prime(q) {
                break;
            }
        }
        let Some(mut sc) = rat_mod(scalar, q) else { continue };
        for (&p, &e) in pows {
            let b = if e < 0 { inv_mod(p % q, q).unwrap() } else { p % q };
            sc = mul_mod(sc, pow_mod(b, e.unsigned_abs(), q), q);
        }
        let r = crate::ffield::primitive_root_mod(n, q);
        // values at zeta -> r^k
        let mut rows = Vec::with_capacity(phi);
        let mut ok = true;
        for &k in &places {
            let z = pow_mod(r, k, q);
            let mut v = mul_mod(sc, pow_mod(z, unit_shift, q), q);
            for &(a, e) in &factors {
                let za = pow_mod(z, a, q);
                let d = (za + q - inv_mod(za, q).unwrap()) % q;
                let d = if e < 0 { inv_mod(d, q).unwrap_or(0) } else { d };
                v = mul_mod(v, pow_mod(d, e.unsigned_abs(), q), q);
            }
            if v == 0 {
                ok = false;
                break;
            }
            let mut row: Vec<u64> = Vec::with_capacity(phi + 1);
            let mut zp = 1u64;
            for _ in 0..phi {
                row.push(zp);
                zp = mul_mod(zp, z, q);
            }
            row.push(v);
            rows.push(row);
        }
        if !ok {
            continue;
        }
        let coords = solve_mod(rows, q).ok_or_else(|| Error::NumericMismatch("singular Vandermonde system".into()))?;
        // CRT
        let qb = BigInt::from(q);
        let minv = BigInt::from(inv_mod((&modulus % &qb).to_u64().unwrap(), q).unwrap());
        for (res, c) in residues.iter_mut().zip(&coords) {
            let t = ((BigInt::from(*c) - &*res) * &minv).mod_floor(&qb);
            *res += &modulus * t;
        }
        modulus *= &qb;
        let rec: Option<Vec<Rational>> = residues.iter().map(|a| rational_reconstruct(a, &modulus)).collect();
        if let Some(rec) = rec {
            if previous.as_ref() == Some(&rec) {
                return Ok(CycloElement::from_coeffs(n, &rec));
            }
            previous = Some(rec);
        }
    }
    Err(Error::BudgetExhausted(format!("modular sine product in Q(zeta_{n}) did not stabilise")))
}

const MODULAR_PRIME_BUDGET: usize = 2000;

/// Gaussian elimination on an augmented `phi x (phi + 1)` system modulo a prime.
fn solve_mod(mut a: Vec<Vec<u64>>, q: u64) -> Option<Vec<u64>> {
    use crate::arith::{inv_mod, mul_mod};
    let n = a.len();
    for c in 0..n {
        let piv = (c..n).find(|&r| a[r][c] != 0)?;
        a.swap(c, piv);
        let inv = inv_mod(a[c][c], q)?;
        for x in a[c].iter_mut() {
            *x = mul_mod(*x, inv, q);
        }
        let pivot_row = a[c].clone();
        for (r, row) in a.iter_mut().enumerate() {
            if r != c && row[c] != 0 {
                let f = row[c];
                for (x, &y) in row.iter_mut().zip(&pivot_row).skip(c) {
                    *x = (*x + q - mul_mod(f, y, q)) % q;
                }
            }
        }
    }
    Some(a.into_iter().map(|row| row[n]).collect())
}

/// `(zeta_{2m}^k - zeta_{2m}^{-k}) / 2i`, the exact `sin(k pi / m)`.
pub fn exact_sin_pi(s: &Rational) -> CycloElement {
    let r = s.clone() - s.floor();
    if r.is_zero() {
        return CycloElement::zero();
    }
    let inv_2i = CycloElement::i().scale(&rat(-1, 2));
    let base = sine_numerator(&r).mul(&inv_2i);
    if s.floor().to_integer().is_odd() {
        base.neg()
    } else {
        base
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    /// `|x - digits| < 10^-(decimals - 1)`.
    fn approx(x: &Real, digits: &str) {
        let (int, frac) = digits.split_once('.').unwrap();
        let scale = BigInt::from(10u32).pow(frac.len() as u32);
        let r = Rational::new(format!("{int}{frac}").parse::<BigInt>().unwrap(), scale.clone());
        let diff = x.sub(&Real::from_rational(&r, x.w)).abs();
        let tol = Real::from_rational(&Rational::new(BigInt::from(10), scale), x.w);
        assert!(diff.m < tol.m, "{} vs {digits}", x.to_decimal(30));
    }

    #[test]
    fn gamma_numerics() {
        approx(&gamma_real(&rat(1, 2), 128), "1.7724538509055160272981674833");
        approx(&gamma_real(&rat(1, 3), 128), "2.6789385347077476336556929409");
        approx(&gamma_real(&rat(1, 1), 128), "1.00000000000000000000");
        approx(&gamma_real(&rat(7, 2), 128), "3.3233509704478425511840640312");
    }

    #[test]
    fn bernoulli_numbers() {
        let b = bernoulli(12);
        assert_eq!(b[1], rat(-1, 2));
        assert_eq!(b[2], rat(1, 6));
        assert_eq!(b[12], rat(-691, 2730));
        assert!(b[11].is_zero());
    }

    #[test]
    fn builders() {
        let f = MTEquation::parse(5, "x_1*x_4/x_2/x_3").unwrap();
        let g = GammaMonomial::of_equation(&f);
        assert_eq!(g.gamma_factors.values().sum::<i64>(), 0);
        let t = GammaMonomial::theta(1, 5).unwrap();
        let v = numeric_eval(&t, 128);
        approx(&v.re, "0.5877852522924731291687059546");
        let a = FermatCharacter::gamma(1, 5).unwrap().concat(&FermatCharacter::gamma(4, 5).unwrap());
        let gh = GammaMonomial::gamma_hat(1, &a).unwrap();
        let expect = GammaMonomial::two_pi_i(rat(-1, 1))
            .mul(&GammaMonomial::gamma(&rat(1, 5), 2))
            .mul(&GammaMonomial::gamma(&rat(2, 5), -1))
            .mul(&GammaMonomial::gamma(&rat(4, 5), 2))
            .mul(&GammaMonomial::gamma(&rat(3, 5), -1));
        assert_eq!(gh, expect);
        let p = GammaMonomial::p_value(&FermatCharacter::gamma(4, 5).unwrap()).unwrap();
        // Gamma(8/5) = (3/5) Gamma(3/5)
        assert_eq!(p.rational_scalar, rat(5, 3));
    }

    #[test]
    fn sine_inverse() {
        for s in [rat(1, 5), rat(3, 7), rat(7, 30), rat(1, 2)] {
            assert!(sine_numerator(&s).mul(&sine_numerator_inv(&s)).is_one());
        }
    }

    #[test]
    fn theta_square_is_sine_square() {
        for (k, m) in [(1u64, 5u64), (2, 7), (4, 15)] {
            let r = reduce_square(&GammaMonomial::theta(k, m).unwrap()).unwrap();
            let s = exact_sin_pi(&rat(k as i64, m as i64));
            assert_eq!(r.value, s.square());
        }
    }

    #[test]
    fn determinant_character() {
        for m in [3u64, 5, 7, 9, 15] {
            let g = (m - 1) / 2;
            let r = reduce_square(&GammaMonomial::gamma_det(m)).unwrap();
            let sign = if g % 2 == 0 { 1 } else { -1 };
            assert_eq!(r.value.as_rational(), Some(rat(sign, (m * m * m) as i64)), "m = {m}");
        }
        for m in [4u64, 6, 8, 10, 12] {
            let g = (m - 1) / 2;
            let r = reduce_square(&GammaMonomial::gamma_det(m)).unwrap();
            let sign = if g % 2 == 0 { 1 } else { -1 };
            assert_eq!(r.value.as_rational(), Some(rat(16 * sign, (m * m * m * m) as i64)), "m = {m}");
        }
    }

    #[test]
    fn example_m15() {
        let f = MTEquation::parse(15, "x_10*x_12/x_8*x_14").unwrap();
        let r = reduce_square_with(&GammaMonomial::of_equation(&f), 400).unwrap();
        let s = |k: i64| exact_sin_pi(&rat(k, 15));
        let num = s(1).pow(3).unwrap().mul(&s(6));
        let den = s(2).mul(&s(3).pow(4).unwrap()).mul(&s(5).pow(3).unwrap());
        let expect = num.div(&den).unwrap().mul(&sqrt_of_positive_integer(5)).scale(&rat(3, 16));
        let a = r.value.embed(400);
        let b = expect.embed(400);
        assert!(relatively_close(&a, &b, 200));
        assert_eq!(r.value, expect);
    }

    #[test]
    fn non_constant_weight_is_rejected() {
        let g = GammaMonomial::gamma(&rat(1, 5), 1);
        assert!(matches!(reduce_square(&g), Err(Error::NotConstantWeight)));
    }
}
