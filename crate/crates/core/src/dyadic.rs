//! Arbitrary-precision binary numbers with directed rounding, and interval
//! arithmetic on top of them.
//!
//! A [`Dyadic`] is an exact value `mant * 2^exp`. Every `f64` converts to one
//! without loss, so point clouds and floating coefficients can be lifted into
//! exact arithmetic. [`Interval`] keeps a `[lo, hi]` enclosure whose endpoints
//! are rounded outward to a working precision; passing [`EXACT`] disables the
//! rounding entirely.
//!
//! The transcendental enclosures (`exp`, `ln`) are built from Taylor/atanh
//! series with explicit remainder bounds, so an enclosure is always valid, only
//! its width depends on the precision.

use std::cmp::Ordering;
use std::fmt;

use num_bigint::{BigInt, Sign};
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};

/// Precision sentinel: no rounding at all.
pub const EXACT: u64 = u64::MAX;

/// Rounding direction for inexact operations.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Round {
    /// Toward negative infinity.
    Down,
    /// Toward positive infinity.
    Up,
}

/// Exact binary floating value `mant * 2^exp`, kept with an odd mantissa.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Dyadic {
    mant: BigInt,
    exp: i64,
}

fn floor_shr(m: &BigInt, s: u64) -> BigInt {
    if m.sign() == Sign::Minus {
        let mag = -m;
        let one = BigInt::one();
        -((mag + ((&one << s) - &one)) >> s)
    } else {
        m >> s
    }
}

fn ceil_shr(m: &BigInt, s: u64) -> BigInt {
    -floor_shr(&-m, s)
}

fn ldexp(mut x: f64, mut e: i64) -> f64 {
    let big = 2f64.powi(1000);
    let small = 2f64.powi(-1000);
    while e > 1000 {
        x *= big;
        e -= 1000;
        if x.is_infinite() {
            return x;
        }
    }
    while e < -1000 {
        x *= small;
        e += 1000;
        if x == 0.0 {
            return x;
        }
    }
    x * 2f64.powi(e as i32)
}

impl Dyadic {
    pub fn zero() -> Self {
        Dyadic { mant: BigInt::zero(), exp: 0 }
    }

    pub fn one() -> Self {
        Dyadic { mant: BigInt::one(), exp: 0 }
    }

    pub fn new(mant: BigInt, exp: i64) -> Self {
        let mut d = Dyadic { mant, exp };
        d.normalize();
        d
    }

    fn normalize(&mut self) {
        if self.mant.is_zero() {
            self.exp = 0;
            return;
        }
        if let Some(tz) = self.mant.trailing_zeros() {
            if tz > 0 {
                self.mant >>= tz;
                self.exp += tz as i64;
            }
        }
    }

    pub fn from_int(v: i64) -> Self {
        Dyadic::new(BigInt::from(v), 0)
    }

    pub fn from_bigint(v: &BigInt) -> Self {
        Dyadic::new(v.clone(), 0)
    }

    /// Exact conversion; `None` for NaN and infinities.
    pub fn from_f64(x: f64) -> Option<Self> {
        if !x.is_finite() {
            return None;
        }
        if x == 0.0 {
            return Some(Dyadic::zero());
        }
        let bits = x.to_bits();
        let negative = bits >> 63 == 1;
        let biased = ((bits >> 52) & 0x7ff) as i64;
        let frac = bits & ((1u64 << 52) - 1);
        let (m, e) = if biased == 0 {
            (frac, -1074)
        } else {
            (frac | (1u64 << 52), biased - 1075)
        };
        let mut mant = BigInt::from(m);
        if negative {
            mant = -mant;
        }
        Some(Dyadic::new(mant, e))
    }

    pub fn mantissa(&self) -> &BigInt {
        &self.mant
    }

    pub fn exponent(&self) -> i64 {
        self.exp
    }

    pub fn is_zero(&self) -> bool {
        self.mant.is_zero()
    }

    pub fn is_negative(&self) -> bool {
        self.mant.sign() == Sign::Minus
    }

    pub fn is_positive(&self) -> bool {
        self.mant.sign() == Sign::Plus
    }

    /// Number of significant bits of the mantissa.
    pub fn bits(&self) -> u64 {
        self.mant.bits()
    }

    /// Upper bound on `log2 |self|` (exact for powers of two), `None` at zero.
    pub fn magnitude_exponent(&self) -> Option<i64> {
        if self.is_zero() {
            None
        } else {
            Some(self.mant.bits() as i64 + self.exp)
        }
    }

    pub fn neg(&self) -> Self {
        Dyadic { mant: -&self.mant, exp: self.exp }
    }

    pub fn abs(&self) -> Self {
        Dyadic { mant: self.mant.abs(), exp: self.exp }
    }

    /// Multiply by `2^k` (exact).
    pub fn mul_pow2(&self, k: i64) -> Self {
        if self.is_zero() {
            return self.clone();
        }
        Dyadic { mant: self.mant.clone(), exp: self.exp + k }
    }

    pub fn add(&self, other: &Dyadic) -> Dyadic {
        if self.is_zero() {
            return other.clone();
        }
        if other.is_zero() {
            return self.clone();
        }
        let e = self.exp.min(other.exp);
        let a = &self.mant << ((self.exp - e) as u64);
        let b = &other.mant << ((other.exp - e) as u64);
        Dyadic::new(a + b, e)
    }

    pub fn sub(&self, other: &Dyadic) -> Dyadic {
        self.add(&other.neg())
    }

    pub fn mul(&self, other: &Dyadic) -> Dyadic {
        if self.is_zero() || other.is_zero() {
            return Dyadic::zero();
        }
        Dyadic::new(&self.mant * &other.mant, self.exp + other.exp)
    }

    /// Round to at most `prec` significant bits in the given direction.
    pub fn round(&self, prec: u64, dir: Round) -> Dyadic {
        if prec == EXACT {
            return self.clone();
        }
        let bits = self.mant.bits();
        if bits <= prec {
            return self.clone();
        }
        let s = bits - prec;
        let m = match dir {
            Round::Down => floor_shr(&self.mant, s),
            Round::Up => ceil_shr(&self.mant, s),
        };
        Dyadic::new(m, self.exp + s as i64)
    }

    /// `self / other` rounded to `prec` bits in the given direction.
    pub fn div(&self, other: &Dyadic, prec: u64, dir: Round) -> Dyadic {
        assert!(!other.is_zero(), "division by zero");
        if self.is_zero() {
            return Dyadic::zero();
        }
        let prec = if prec == EXACT { 256 } else { prec };
        let want = prec + other.mant.bits() + 2;
        let k = want.saturating_sub(self.mant.bits());
        let num = &self.mant << k;
        let (q, r) = num.div_mod_floor(&other.mant);
        let q = match dir {
            Round::Down => q,
            Round::Up => {
                if r.is_zero() {
                    q
                } else {
                    q + 1
                }
            }
        };
        Dyadic::new(q, self.exp - other.exp - k as i64).round(prec, dir)
    }

    /// Nearest-ish `f64` (truncated to 53 bits, then scaled).
    pub fn to_f64(&self) -> f64 {
        if self.is_zero() {
            return 0.0;
        }
        let r = self.round(53, Round::Down);
        let m = r.mant.to_f64().unwrap_or(f64::NAN);
        ldexp(m, r.exp)
    }

    /// `f64` rounded in the requested direction (a true one-sided bound).
    pub fn to_f64_dir(&self, dir: Round) -> f64 {
        let mut v = self.to_f64();
        loop {
            let Some(d) = Dyadic::from_f64(v) else {
                return v;
            };
            match (dir, d.cmp(self)) {
                (Round::Up, Ordering::Less) => v = v.next_up(),
                (Round::Down, Ordering::Greater) => v = v.next_down(),
                _ => return v,
            }
        }
    }

    /// Approximate natural log of `|self|`, valid far outside the `f64` range.
    pub fn ln_abs_approx(&self) -> f64 {
        if self.is_zero() {
            return f64::NEG_INFINITY;
        }
        let bits = self.mant.bits() as i64;
        let shift = (bits - 60).max(0);
        let top = floor_shr(&self.mant.abs(), shift as u64).to_f64().unwrap_or(f64::NAN);
        top.ln() + ((shift + self.exp) as f64) * std::f64::consts::LN_2
    }
}

impl PartialOrd for Dyadic {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Dyadic {
    fn cmp(&self, other: &Self) -> Ordering {
        match self.sub(other).mant.sign() {
            Sign::Minus => Ordering::Less,
            Sign::NoSign => Ordering::Equal,
            Sign::Plus => Ordering::Greater,
        }
    }
}

impl fmt::Display for Dyadic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:e}", self.to_f64())
    }
}

/// Closed interval `[lo, hi]` with dyadic endpoints.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Interval {
    pub lo: Dyadic,
    pub hi: Dyadic,
}

impl Interval {
    pub fn point(d: Dyadic) -> Self {
        Interval { lo: d.clone(), hi: d }
    }

    pub fn new(lo: Dyadic, hi: Dyadic) -> Self {
        debug_assert!(lo <= hi, "inverted interval");
        Interval { lo, hi }
    }

    pub fn zero() -> Self {
        Interval::point(Dyadic::zero())
    }

    pub fn one() -> Self {
        Interval::point(Dyadic::one())
    }

    pub fn from_f64(x: f64) -> Option<Self> {
        Dyadic::from_f64(x).map(Interval::point)
    }

    pub fn from_int(v: i64) -> Self {
        Interval::point(Dyadic::from_int(v))
    }

    fn rounded(lo: Dyadic, hi: Dyadic, prec: u64) -> Self {
        Interval { lo: lo.round(prec, Round::Down), hi: hi.round(prec, Round::Up) }
    }

    pub fn add(&self, o: &Interval, prec: u64) -> Interval {
        Interval::rounded(self.lo.add(&o.lo), self.hi.add(&o.hi), prec)
    }

    pub fn sub(&self, o: &Interval, prec: u64) -> Interval {
        Interval::rounded(self.lo.sub(&o.hi), self.hi.sub(&o.lo), prec)
    }

    pub fn neg(&self) -> Interval {
        Interval { lo: self.hi.neg(), hi: self.lo.neg() }
    }

    pub fn mul(&self, o: &Interval, prec: u64) -> Interval {
        if self.lo == self.hi && o.lo == o.hi {
            let p = self.lo.mul(&o.lo);
            return Interval::rounded(p.clone(), p, prec);
        }
        let cands = [
            self.lo.mul(&o.lo),
            self.lo.mul(&o.hi),
            self.hi.mul(&o.lo),
            self.hi.mul(&o.hi),
        ];
        let lo = cands.iter().min().cloned().unwrap();
        let hi = cands.iter().max().cloned().unwrap();
        Interval::rounded(lo, hi, prec)
    }

    /// Square, tight when the interval straddles zero.
    pub fn sqr(&self, prec: u64) -> Interval {
        let a = self.lo.mul(&self.lo);
        let b = self.hi.mul(&self.hi);
        if self.contains_zero() {
            Interval::rounded(Dyadic::zero(), a.max(b), prec)
        } else {
            let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
            Interval::rounded(lo, hi, prec)
        }
    }

    pub fn mul_pow2(&self, k: i64) -> Interval {
        Interval { lo: self.lo.mul_pow2(k), hi: self.hi.mul_pow2(k) }
    }

    /// Divide by a positive integer.
    pub fn div_int(&self, k: u64, prec: u64) -> Interval {
        assert!(k > 0);
        let d = Dyadic::from_bigint(&BigInt::from(k));
        Interval { lo: self.lo.div(&d, prec, Round::Down), hi: self.hi.div(&d, prec, Round::Up) }
    }

    /// Divide by an interval that does not contain zero.
    pub fn div(&self, o: &Interval, prec: u64) -> Interval {
        assert!(!o.contains_zero(), "interval division by an interval containing zero");
        let prec = if prec == EXACT { 256 } else { prec };
        let cands_lo = [
            self.lo.div(&o.lo, prec, Round::Down),
            self.lo.div(&o.hi, prec, Round::Down),
            self.hi.div(&o.lo, prec, Round::Down),
            self.hi.div(&o.hi, prec, Round::Down),
        ];
        let cands_hi = [
            self.lo.div(&o.lo, prec, Round::Up),
            self.lo.div(&o.hi, prec, Round::Up),
            self.hi.div(&o.lo, prec, Round::Up),
            self.hi.div(&o.hi, prec, Round::Up),
        ];
        Interval {
            lo: cands_lo.iter().min().cloned().unwrap(),
            hi: cands_hi.iter().max().cloned().unwrap(),
        }
    }

    pub fn contains_zero(&self) -> bool {
        !self.lo.is_positive() && !self.hi.is_negative()
    }

    /// Upper bound of `|x|` over the interval.
    pub fn abs_upper(&self) -> Dyadic {
        self.lo.abs().max(self.hi.abs())
    }

    /// Lower bound of `|x|` over the interval.
    pub fn abs_lower(&self) -> Dyadic {
        if self.contains_zero() {
            Dyadic::zero()
        } else {
            self.lo.abs().min(self.hi.abs())
        }
    }

    pub fn width(&self) -> Dyadic {
        self.hi.sub(&self.lo)
    }

    pub fn midpoint_f64(&self) -> f64 {
        0.5 * (self.lo.to_f64() + self.hi.to_f64())
    }

    /// Hull with a symmetric error term `[-r, r]`.
    pub fn widen(&self, r: &Dyadic) -> Interval {
        Interval { lo: self.lo.sub(r), hi: self.hi.add(r) }
    }
}

/// Complex value enclosed by a rectangle of intervals.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ComplexInterval {
    pub re: Interval,
    pub im: Interval,
}

impl ComplexInterval {
    pub fn zero() -> Self {
        ComplexInterval { re: Interval::zero(), im: Interval::zero() }
    }

    pub fn one() -> Self {
        ComplexInterval { re: Interval::one(), im: Interval::zero() }
    }

    pub fn from_f64(re: f64, im: f64) -> Option<Self> {
        Some(ComplexInterval { re: Interval::from_f64(re)?, im: Interval::from_f64(im)? })
    }

    pub fn from_real(re: Interval) -> Self {
        ComplexInterval { re, im: Interval::zero() }
    }

    pub fn add(&self, o: &ComplexInterval, prec: u64) -> ComplexInterval {
        ComplexInterval { re: self.re.add(&o.re, prec), im: self.im.add(&o.im, prec) }
    }

    pub fn sub(&self, o: &ComplexInterval, prec: u64) -> ComplexInterval {
        ComplexInterval { re: self.re.sub(&o.re, prec), im: self.im.sub(&o.im, prec) }
    }

    pub fn mul(&self, o: &ComplexInterval, prec: u64) -> ComplexInterval {
        if self.im.lo.is_zero() && self.im.hi.is_zero() && o.im.lo.is_zero() && o.im.hi.is_zero() {
            return ComplexInterval::from_real(self.re.mul(&o.re, prec));
        }
        let re = self.re.mul(&o.re, EXACT).sub(&self.im.mul(&o.im, EXACT), prec);
        let im = self.re.mul(&o.im, EXACT).add(&self.im.mul(&o.re, EXACT), prec);
        ComplexInterval { re, im }
    }

    pub fn mul_real(&self, r: &Interval, prec: u64) -> ComplexInterval {
        ComplexInterval { re: self.re.mul(r, prec), im: self.im.mul(r, prec) }
    }

    /// Upper bound on `|z|^2`.
    pub fn norm_sqr_upper(&self) -> Dyadic {
        let a = self.re.abs_upper();
        let b = self.im.abs_upper();
        a.mul(&a).add(&b.mul(&b))
    }

    /// Lower bound on `|z|^2`.
    pub fn norm_sqr_lower(&self) -> Dyadic {
        let a = self.re.abs_lower();
        let b = self.im.abs_lower();
        a.mul(&a).add(&b.mul(&b))
    }

    pub fn is_exact_zero(&self) -> bool {
        self.re.lo.is_zero() && self.re.hi.is_zero() && self.im.lo.is_zero() && self.im.hi.is_zero()
    }
}

/// Enclosure of `exp(x)` for a single dyadic `x`.
fn exp_point(x: &Dyadic, prec: u64) -> Interval {
    if x.is_zero() {
        return Interval::one();
    }
    let mag = x.magnitude_exponent().unwrap();
    let halvings = (mag + 8).max(0);
    let wp = prec + 32 + halvings as u64;
    let t = Interval::point(x.mul_pow2(-halvings));
    let mut term = Interval::one();
    let mut sum = Interval::one();
    let stop = Dyadic::one().mul_pow2(-(wp as i64) - 2);
    let mut i = 1u64;
    loop {
        term = term.mul(&t, wp).div_int(i, wp);
        sum = sum.add(&term, wp);
        if term.abs_upper() < stop && i >= 2 {
            break;
        }
        i += 1;
    }
    // |t| <= 2^-8, so the remaining tail is below the last term.
    sum = sum.widen(&term.abs_upper());
    for _ in 0..halvings {
        sum = sum.sqr(wp);
    }
    Interval::rounded(sum.lo, sum.hi, prec)
}

/// Enclosure of `exp` over an interval (monotone, so endpoints suffice).
pub fn exp(x: &Interval, prec: u64) -> Interval {
    let lo = exp_point(&x.lo, prec).lo;
    let hi = exp_point(&x.hi, prec).hi;
    Interval { lo, hi }
}

/// `2 * atanh(u)` for an enclosure `u` of a value in `[0, 1/2]`.
fn two_atanh(u: &Interval, wp: u64) -> Interval {
    let u2 = u.sqr(wp);
    let mut power = u.clone();
    let mut sum = u.clone();
    let stop = Dyadic::one().mul_pow2(-(wp as i64) - 2);
    let mut k = 1u64;
    loop {
        power = power.mul(&u2, wp);
        let term = power.div_int(2 * k + 1, wp);
        sum = sum.add(&term, wp);
        if power.abs_upper() < stop {
            break;
        }
        k += 1;
    }
    // remaining terms are positive and bounded by power * u^2 / (1 - u^2) <= power
    let tail = power.abs_upper();
    let sum = Interval { lo: sum.lo, hi: sum.hi.add(&tail) };
    sum.mul_pow2(1)
}

/// Enclosure of `ln 2`.
pub fn ln2(prec: u64) -> Interval {
    let wp = prec + 16;
    let third = Interval::one().div_int(3, wp);
    let r = two_atanh(&third, wp);
    Interval::rounded(r.lo, r.hi, prec)
}

fn ln_point(x: &Dyadic, prec: u64) -> Interval {
    assert!(x.is_positive(), "ln of a non-positive value");
    let wp = prec + 32;
    let k = x.bits() as i64 + x.exponent() - 1;
    let y = Interval::point(x.mul_pow2(-k));
    let one = Interval::one();
    let u = y.sub(&one, wp).div(&y.add(&one, wp), wp);
    let mut r = two_atanh(&u, wp);
    if k != 0 {
        let l2 = ln2(wp);
        r = r.add(&l2.mul(&Interval::from_int(k), wp), wp);
    }
    Interval::rounded(r.lo, r.hi, prec)
}

/// Enclosure of `ln` over a positive interval.
pub fn ln(x: &Interval, prec: u64) -> Interval {
    Interval { lo: ln_point(&x.lo, prec).lo, hi: ln_point(&x.hi, prec).hi }
}

/// Enclosure of `base^h` for a positive integer base.
pub fn pow_int_base(base: u64, h: &Interval, prec: u64) -> Interval {
    assert!(base > 0);
    if base == 1 {
        return Interval::one();
    }
    let wp = prec + 16;
    let lb = ln(&Interval::from_int(base as i64), wp);
    let e = lb.mul(h, wp);
    let r = exp(&e, wp);
    Interval::rounded(r.lo, r.hi, prec)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn f64_roundtrip_is_exact() {
        for &x in &[0.0, 1.0, -0.5, 0.1, 1e-300, 5e-324, 1.7e308, -3.25] {
            let d = Dyadic::from_f64(x).unwrap();
            assert_eq!(d.to_f64(), x);
        }
    }

    #[test]
    fn directed_rounding_brackets() {
        let third = Dyadic::one().div(&Dyadic::from_int(3), 100, Round::Down);
        let third_up = Dyadic::one().div(&Dyadic::from_int(3), 100, Round::Up);
        assert!(third < third_up);
        let three = Dyadic::from_int(3);
        assert!(third.mul(&three) < Dyadic::one());
        assert!(third_up.mul(&three) > Dyadic::one());
        let neg = Dyadic::from_int(-7);
        assert_eq!(neg.round(2, Round::Down), Dyadic::from_int(-8));
        assert_eq!(neg.round(2, Round::Up), Dyadic::from_int(-6));
    }

    #[test]
    fn directed_f64_conversion() {
        let third = Dyadic::one().div(&Dyadic::from_int(3), 200, Round::Down);
        let up = third.to_f64_dir(Round::Up);
        let down = third.to_f64_dir(Round::Down);
        assert!(Dyadic::from_f64(up).unwrap() >= third);
        assert!(Dyadic::from_f64(down).unwrap() <= third);
        assert!(up > down);
    }

    #[test]
    fn exp_and_ln_enclose_reference_values() {
        let e = exp(&Interval::one(), 128);
        assert!(e.lo.to_f64() <= std::f64::consts::E && std::f64::consts::E <= e.hi.to_f64());
        assert!(e.width().to_f64() < 1e-35);
        let l = ln2(128);
        assert!(l.lo.to_f64() <= std::f64::consts::LN_2 && std::f64::consts::LN_2 <= l.hi.to_f64());
        let l10 = ln(&Interval::from_int(10), 128);
        assert!((l10.midpoint_f64() - 10f64.ln()).abs() < 1e-15);
        let m = exp(&Interval::from_int(-64), 128);
        assert!((m.midpoint_f64() / (-64f64).exp() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn integer_power_matches_float() {
        let h = Interval::from_f64(1.5).unwrap();
        let p = pow_int_base(16, &h, 128);
        assert!(p.lo.to_f64() <= 64.0 && 64.0 <= p.hi.to_f64());
        assert!(p.width().to_f64() < 1e-30);
    }

    #[test]
    fn complex_product() {
        let i = ComplexInterval::from_f64(0.0, 1.0).unwrap();
        let m = i.mul(&i, EXACT);
        assert_eq!(m.re, Interval::from_int(-1));
        assert!(m.im.lo.is_zero() && m.im.hi.is_zero());
    }
}
