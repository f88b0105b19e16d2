//! Dyadic interval arithmetic over exact rationals.
//!
//! Rational quantities stay exact (point intervals); irrational quantities
//! (rational powers, exp, log) are enclosed by directed-rounded dyadic
//! endpoints at a caller-chosen precision. A comparison is only reported
//! when the enclosures decide it.

use std::cmp::Ordering;

use num_bigint::{BigInt, Sign};
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};

pub type Rat = BigRational;

pub fn rat(n: i64, d: i64) -> Rat {
    Rat::new(BigInt::from(n), BigInt::from(d))
}

pub fn rat_int(n: i64) -> Rat {
    Rat::from_integer(BigInt::from(n))
}

/// x^e for an i64 exponent by binary exponentiation; x must be nonzero when e < 0.
pub fn rat_pow_i64(x: &Rat, e: i64) -> Rat {
    if e == 0 {
        return Rat::one();
    }
    let mut base = if e < 0 { x.recip() } else { x.clone() };
    let mut n = e.unsigned_abs();
    let mut acc = Rat::one();
    while n > 0 {
        if n & 1 == 1 {
            acc *= &base;
        }
        n >>= 1;
        if n > 0 {
            let b = base.clone();
            base *= b;
        }
    }
    acc
}

/// Bit length of the integer part, used to pick rounding scales.
fn magnitude_bits(x: &Rat) -> i64 {
    if x.is_zero() {
        return 0;
    }
    x.numer().bits() as i64 - x.denom().bits() as i64
}

fn pow2(e: i64) -> Rat {
    if e >= 0 {
        Rat::from_integer(BigInt::one() << e as usize)
    } else {
        Rat::new(BigInt::one(), BigInt::one() << (-e) as usize)
    }
}

/// Largest dyadic with ~`prec` significant bits that is `<= x`.
pub fn round_down(x: &Rat, prec: u32) -> Rat {
    if x.is_zero() {
        return Rat::zero();
    }
    let shift = prec as i64 - magnitude_bits(x);
    let scaled = x * pow2(shift);
    let fl = scaled.floor();
    fl * pow2(-shift)
}

/// Smallest dyadic with ~`prec` significant bits that is `>= x`.
pub fn round_up(x: &Rat, prec: u32) -> Rat {
    if x.is_zero() {
        return Rat::zero();
    }
    let shift = prec as i64 - magnitude_bits(x);
    let scaled = x * pow2(shift);
    let ce = scaled.ceil();
    ce * pow2(-shift)
}

#[derive(Clone, Debug, PartialEq)]
pub struct Interval {
    lo: Rat,
    hi: Rat,
}

impl Interval {
    pub fn new(lo: Rat, hi: Rat) -> Self {
        debug_assert!(lo <= hi, "inverted interval");
        Interval { lo, hi }
    }

    pub fn point(x: Rat) -> Self {
        Interval { lo: x.clone(), hi: x }
    }

    pub fn from_i64(x: i64) -> Self {
        Self::point(rat_int(x))
    }

    pub fn zero() -> Self {
        Self::point(Rat::zero())
    }

    pub fn one() -> Self {
        Self::point(Rat::one())
    }

    pub fn lo(&self) -> &Rat {
        &self.lo
    }

    pub fn hi(&self) -> &Rat {
        &self.hi
    }

    pub fn is_point(&self) -> bool {
        self.lo == self.hi
    }

    /// Exact rational value, if the enclosure is a point.
    pub fn as_rat(&self) -> Option<&Rat> {
        if self.is_point() {
            Some(&self.lo)
        } else {
            None
        }
    }

    pub fn midpoint(&self) -> Rat {
        (&self.lo + &self.hi) / rat_int(2)
    }

    pub fn width(&self) -> Rat {
        &self.hi - &self.lo
    }

    pub fn to_f64(&self) -> f64 {
        let m = self.midpoint();
        rat_to_f64(&m)
    }

    pub fn contains_zero(&self) -> bool {
        !self.lo.is_positive() && !self.hi.is_negative()
    }

    pub fn hull(&self, other: &Interval) -> Interval {
        Interval {
            lo: if self.lo <= other.lo { self.lo.clone() } else { other.lo.clone() },
            hi: if self.hi >= other.hi { self.hi.clone() } else { other.hi.clone() },
        }
    }

    /// Outward-rounds both endpoints to dyadics with ~`prec` bits.
    pub fn tighten(&self, prec: u32) -> Interval {
        if self.is_point() && self.lo.denom().bits() <= prec as u64 {
            return self.clone();
        }
        Interval {
            lo: round_down(&self.lo, prec),
            hi: round_up(&self.hi, prec),
        }
    }

    pub fn neg(&self) -> Interval {
        Interval { lo: -self.hi.clone(), hi: -self.lo.clone() }
    }

    pub fn add(&self, other: &Interval) -> Interval {
        Interval { lo: &self.lo + &other.lo, hi: &self.hi + &other.hi }
    }

    pub fn sub(&self, other: &Interval) -> Interval {
        Interval { lo: &self.lo - &other.hi, hi: &self.hi - &other.lo }
    }

    pub fn mul(&self, other: &Interval) -> Interval {
        if self.is_point() && other.is_point() {
            return Interval::point(&self.lo * &other.lo);
        }
        let cands = [
            &self.lo * &other.lo,
            &self.lo * &other.hi,
            &self.hi * &other.lo,
            &self.hi * &other.hi,
        ];
        let mut lo = cands[0].clone();
        let mut hi = cands[0].clone();
        for c in &cands[1..] {
            if *c < lo {
                lo = c.clone();
            }
            if *c > hi {
                hi = c.clone();
            }
        }
        Interval { lo, hi }
    }

    pub fn square(&self) -> Interval {
        if self.contains_zero() {
            let a = (&self.lo * &self.lo).max(&self.hi * &self.hi);
            Interval { lo: Rat::zero(), hi: a }
        } else {
            self.mul(self)
        }
    }

    pub fn recip(&self) -> Result<Interval> {
        if self.contains_zero() {
            return Err(Error::SingularMatrix);
        }
        Ok(Interval { lo: self.hi.recip(), hi: self.lo.recip() })
    }

    pub fn div(&self, other: &Interval) -> Result<Interval> {
        Ok(self.mul(&other.recip()?))
    }

    pub fn abs(&self) -> Interval {
        if !self.lo.is_negative() {
            self.clone()
        } else if !self.hi.is_positive() {
            self.neg()
        } else {
            Interval { lo: Rat::zero(), hi: self.hi.clone().max(-self.lo.clone()) }
        }
    }

    pub fn scale(&self, c: &Rat) -> Interval {
        if c.is_negative() {
            Interval { lo: &self.hi * c, hi: &self.lo * c }
        } else {
            Interval { lo: &self.lo * c, hi: &self.hi * c }
        }
    }

    /// Integer power; for negative exponents the interval must not contain zero.
    pub fn pow_i64(&self, e: i64) -> Result<Interval> {
        if e == 0 {
            return Ok(Interval::one());
        }
        if e < 0 {
            return self.recip()?.pow_i64(-e);
        }
        if e % 2 == 0 && self.contains_zero() {
            let a = rat_pow_i64(&self.lo.abs(), e).max(rat_pow_i64(&self.hi.abs(), e));
            return Ok(Interval { lo: Rat::zero(), hi: a });
        }
        let (a, b) = (rat_pow_i64(&self.lo, e), rat_pow_i64(&self.hi, e));
        Ok(if a <= b { Interval { lo: a, hi: b } } else { Interval { lo: b, hi: a } })
    }

    /// Certified comparison: `None` when the enclosures overlap nontrivially.
    pub fn cmp_certified(&self, other: &Interval) -> Option<Ordering> {
        if self.is_point() && other.is_point() {
            return Some(self.lo.cmp(&other.lo));
        }
        if self.hi < other.lo {
            Some(Ordering::Less)
        } else if self.lo > other.hi {
            Some(Ordering::Greater)
        } else {
            None
        }
    }

    pub fn lt_certified(&self, other: &Interval) -> Option<bool> {
        match self.cmp_certified(other) {
            Some(Ordering::Less) => Some(true),
            Some(_) => Some(false),
            None => None,
        }
    }

    pub fn le_certified(&self, other: &Interval) -> Option<bool> {
        match self.cmp_certified(other) {
            Some(Ordering::Greater) => Some(false),
            Some(_) => Some(true),
            None => None,
        }
    }

    /// sqrt of a nonnegative interval, outward rounded at `prec` bits.
    pub fn sqrt(&self, prec: u32) -> Result<Interval> {
        if self.lo.is_negative() {
            return Err(Error::PreconditionViolated("sqrt of negative interval".into()));
        }
        let lo = nth_root_lower(&self.lo, 2, prec);
        let hi = nth_root_upper(&self.hi, 2, prec);
        Ok(Interval { lo, hi })
    }
}

pub fn rat_to_f64(x: &Rat) -> f64 {
    // Scale into f64 range before converting.
    let nb = x.numer().bits() as i64;
    let db = x.denom().bits() as i64;
    if nb < 900 && db < 900 {
        let n = bigint_to_f64(x.numer());
        let d = bigint_to_f64(x.denom());
        n / d
    } else {
        let shift = nb - db;
        let scaled = x * pow2(-shift);
        let n = bigint_to_f64(scaled.numer());
        let d = bigint_to_f64(scaled.denom());
        (n / d) * 2f64.powi(shift.clamp(-1022, 1022) as i32)
    }
}

fn bigint_to_f64(x: &BigInt) -> f64 {
    use num_traits::ToPrimitive;
    x.to_f64().unwrap_or(f64::INFINITY)
}

/// Dyadic `r` with `r^n <= x` and `(r + 2^-prec')^n > x`, rounded down.
pub fn nth_root_lower(x: &Rat, n: u32, prec: u32) -> Rat {
    debug_assert!(!x.is_negative());
    if x.is_zero() {
        return Rat::zero();
    }
    let p = prec as usize;
    let scaled = (x.numer() << (n as usize * p)) / x.denom();
    let r = scaled.nth_root(n);
    Rat::new(r, BigInt::one() << p)
}

/// Dyadic upper companion of `nth_root_lower`.
pub fn nth_root_upper(x: &Rat, n: u32, prec: u32) -> Rat {
    debug_assert!(!x.is_negative());
    if x.is_zero() {
        return Rat::zero();
    }
    let p = prec as usize;
    let scaled = (x.numer() << (n as usize * p)) / x.denom();
    let r = scaled.nth_root(n) + BigInt::one();
    Rat::new(r, BigInt::one() << p)
}

/// Enclosure of `base^(exp)` for rational `base > 0` and rational `exp`.
pub fn rational_pow(base: &Rat, exp: &Rat, prec: u32) -> Result<Interval> {
    if !base.is_positive() {
        return Err(Error::PreconditionViolated("rational_pow needs a positive base".into()));
    }
    if exp.is_zero() {
        return Ok(Interval::one());
    }
    let p: i64 = match exp.numer().try_into() {
        Ok(v) => v,
        Err(_) => return Err(Error::PreconditionViolated("power exponent too large".into())),
    };
    let q: u32 = match exp.denom().try_into() {
        Ok(v) => v,
        Err(_) => return Err(Error::PreconditionViolated("power exponent denominator too large".into())),
    };
    if q == 1 {
        return Ok(Interval::point(rat_pow_i64(base, p)));
    }
    // Exact q-th roots (e.g. 4^{1/2}) stay rational points.
    let rn = base.numer().nth_root(q);
    let rd = base.denom().nth_root(q);
    if &num_traits::pow(rn.clone(), q as usize) == base.numer()
        && &num_traits::pow(rd.clone(), q as usize) == base.denom()
    {
        return Ok(Interval::point(rat_pow_i64(&Rat::new(rn, rd), p)));
    }
    let root = Interval::new(nth_root_lower(base, q, prec), nth_root_upper(base, q, prec));
    let out = root.pow_i64(p)?;
    Ok(out.tighten(prec))
}

/// Enclosure of `e^x` for rational `x`.
pub fn exp_enclosure(x: &Rat, prec: u32) -> Interval {
    if x.is_zero() {
        return Interval::one();
    }
    // Argument reduction so |y| <= 1/2, then e^x = (e^y)^(2^s).
    let mut s: u32 = 0;
    let half = rat(1, 2);
    let mut y = x.clone();
    while y.abs() > half {
        y /= rat_int(2);
        s += 1;
    }
    let tol = pow2(-((prec + s + 8) as i64));
    let mut term = Rat::one();
    let mut sum = Rat::one();
    let mut k: i64 = 1;
    loop {
        term = term * &y / rat_int(k);
        sum += &term;
        if term.abs() < tol {
            break;
        }
        k += 1;
    }
    // Ratio of consecutive terms is <= 1/2, so the tail is <= 2|t_K| with t_K the next term.
    let rem = term.abs() * rat_int(2);
    let mut enc = Interval::new(&sum - &rem, &sum + &rem).tighten(prec + s + 4);
    for _ in 0..s {
        enc = enc.square().tighten(prec + 4);
    }
    enc.tighten(prec)
}

fn atanh_enclosure(z: &Rat, prec: u32) -> Interval {
    // |z| < 1/2 assumed; atanh(z) = sum z^{2i+1}/(2i+1).
    debug_assert!(z.abs() < rat(1, 2));
    let tol = pow2(-((prec + 8) as i64));
    let z2 = z * z;
    let mut pow = z.clone();
    let mut sum = z.clone();
    let mut i: i64 = 1;
    loop {
        pow *= &z2;
        let term = &pow / rat_int(2 * i + 1);
        sum += &term;
        if term.abs() < tol {
            // Tail ratio <= z^2 < 1/4, so tail <= |term| * 4/3 < 2|term|.
            let rem = term.abs() * rat_int(2);
            return Interval::new(&sum - &rem, &sum + &rem).tighten(prec + 4);
        }
        i += 1;
    }
}

/// Enclosure of `ln x` for rational `x > 0`.
pub fn ln_enclosure(x: &Rat, prec: u32) -> Result<Interval> {
    if !x.is_positive() {
        return Err(Error::PreconditionViolated("ln needs a positive argument".into()));
    }
    let mut y = x.clone();
    let mut k: i64 = 0;
    let hi = rat(3, 2);
    let lo = rat(3, 4);
    while y >= hi {
        y /= rat_int(2);
        k += 1;
    }
    while y < lo {
        y *= rat_int(2);
        k -= 1;
    }
    // ln y = 2 atanh((y-1)/(y+1)) with |z| <= 1/5.
    let z = (&y - Rat::one()) / (&y + Rat::one());
    let ln_y = atanh_enclosure(&z, prec).scale(&rat_int(2));
    let ln2 = atanh_enclosure(&rat(1, 3), prec).scale(&rat_int(2));
    Ok(ln_y.add(&ln2.scale(&rat_int(k))).tighten(prec))
}

/// Enclosure of `sin x` for rational `x` (intended for moderate |x|).
pub fn sin_enclosure(x: &Rat, prec: u32) -> Interval {
    let tol = pow2(-((prec + 8) as i64));
    let x2 = x * x;
    let mut term = x.clone();
    let mut sum = x.clone();
    let mut k: i64 = 1;
    loop {
        // term_{k} = (-1)^k x^{2k+1}/(2k+1)!
        term = -term * &x2 / rat_int((2 * k) * (2 * k + 1));
        sum += &term;
        let decreasing = x2 < Rat::from_integer(BigInt::from((2 * k + 2) * (2 * k + 3)));
        if decreasing && term.abs() < tol {
            let rem = term.abs() * rat_int(2);
            let enc = Interval::new(&sum - &rem, &sum + &rem).tighten(prec + 4);
            // Clamp to [-1, 1]: sin is bounded in absolute value.
            let lo = enc.lo().clone().max(-Rat::one()).min(Rat::one());
            let hi = enc.hi().clone().min(Rat::one()).max(-Rat::one());
            return Interval::new(lo, hi).tighten(prec);
        }
        k += 1;
    }
}

/// Parses "p/q" or "p" into an exact rational.
pub fn parse_rat(s: &str) -> Result<Rat> {
    let s = s.trim();
    let (n, d) = match s.split_once('/') {
        Some((a, b)) => (a.trim(), b.trim()),
        None => (s, "1"),
    };
    let num: BigInt = n
        .parse()
        .map_err(|_| Error::Config(format!("bad rational numerator in {s:?}")))?;
    let den: BigInt = d
        .parse()
        .map_err(|_| Error::Config(format!("bad rational denominator in {s:?}")))?;
    if den.is_zero() {
        return Err(Error::Config(format!("zero denominator in {s:?}")));
    }
    if den.sign() == Sign::Minus {
        return Err(Error::Config(format!("denominator must be positive in {s:?}")));
    }
    Ok(Rat::new(num, den))
}

pub fn format_rat(x: &Rat) -> String {
    if x.denom().is_one() {
        format!("{}", x.numer())
    } else {
        format!("{}/{}", x.numer(), x.denom())
    }
}
