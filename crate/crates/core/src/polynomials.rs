//! Multivariate polynomials with complex or exact integer coefficients.
//!
//! Polynomials are sparse maps from [`MultiIndex`] to coefficients. Complex
//! polynomials evaluate in `f64`; integer polynomials additionally evaluate in
//! exact rational or interval arithmetic, which is what small-value
//! certificates rely on.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::{BigInt, BigUint};
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::dyadic::{ComplexInterval, Dyadic, Interval, EXACT};
use crate::error::{invalid, Error, Result};

/// Exponent vector of a monomial.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct MultiIndex(pub Vec<u32>);

impl MultiIndex {
    pub fn zero(nvars: usize) -> Self {
        MultiIndex(vec![0; nvars])
    }

    pub fn unit(nvars: usize, j: usize) -> Self {
        let mut e = vec![0; nvars];
        e[j] = 1;
        MultiIndex(e)
    }

    pub fn nvars(&self) -> usize {
        self.0.len()
    }

    /// Total degree `|α|`.
    pub fn degree(&self) -> u32 {
        self.0.iter().sum()
    }

    /// `α! = Π α_j!`.
    pub fn factorial(&self) -> BigUint {
        self.0.iter().map(|&a| factorial(a as u64)).product()
    }

    /// `binom(α, β) = Π binom(α_j, β_j)`; zero unless `β ≤ α`.
    pub fn binom(&self, beta: &MultiIndex) -> BigUint {
        self.0
            .iter()
            .zip(&beta.0)
            .map(|(&a, &b)| binomial(a as u64, b as u64))
            .product()
    }

    /// `binom(α + k − 1, α) = Π binom(α_j + k − 1, α_j)`, the number of ways to
    /// split `α` among `k` ordered factors.
    pub fn binom_shift(&self, k: u64) -> BigUint {
        assert!(k >= 1);
        self.0
            .iter()
            .map(|&a| binomial(a as u64 + k - 1, a as u64))
            .product()
    }

    pub fn add(&self, other: &MultiIndex) -> MultiIndex {
        MultiIndex(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }

    pub fn le(&self, other: &MultiIndex) -> bool {
        self.0.iter().zip(&other.0).all(|(a, b)| a <= b)
    }

    /// All multi-indices in `nvars` variables with `|α| ≤ k`, graded by degree.
    pub fn up_to_degree(nvars: usize, k: u32) -> Vec<MultiIndex> {
        let mut out = Vec::new();
        for d in 0..=k {
            out.extend(MultiIndex::of_degree(nvars, d));
        }
        out
    }

    /// All multi-indices with `|α| = d`, in lexicographically decreasing order.
    pub fn of_degree(nvars: usize, d: u32) -> Vec<MultiIndex> {
        fn rec(nvars: usize, d: u32, prefix: &mut Vec<u32>, out: &mut Vec<MultiIndex>) {
            if prefix.len() + 1 == nvars {
                prefix.push(d);
                out.push(MultiIndex(prefix.clone()));
                prefix.pop();
                return;
            }
            for a in (0..=d).rev() {
                prefix.push(a);
                rec(nvars, d - a, prefix, out);
                prefix.pop();
            }
        }
        let mut out = Vec::new();
        if nvars == 0 {
            if d == 0 {
                out.push(MultiIndex(Vec::new()));
            }
            return out;
        }
        rec(nvars, d, &mut Vec::with_capacity(nvars), &mut out);
        out
    }
}

pub fn factorial(n: u64) -> BigUint {
    (1..=n).map(BigUint::from).product()
}

pub fn binomial(n: u64, k: u64) -> BigUint {
    if k > n {
        return BigUint::zero();
    }
    let k = k.min(n - k);
    let mut acc = BigUint::one();
    for i in 0..k {
        acc = acc * BigUint::from(n - i) / BigUint::from(i + 1);
    }
    acc
}

/// `binom(N + n, n)`: the number of monomials of total degree at most `N` in
/// `n` variables.
pub fn monomial_count(big_n: u64, n: u64) -> BigUint {
    binomial(big_n + n, n)
}

/// Cauchy estimate `R^{-|α|}` for Taylor coefficients of functions bounded by
/// one on a polydisk of radius `R`.
pub fn cauchy_coeff_bound(radius: f64, alpha: &MultiIndex) -> Result<f64> {
    if !(radius > 0.0) {
        return Err(invalid("radius must be positive"));
    }
    Ok(radius.powi(-(alpha.degree() as i32)))
}

/// Error bound `(1/(R−r)) (r/R)^k sup|f|` for the degree-`k` Taylor
/// approximant on the smaller polydisk.
pub fn taylor_truncation_bound(big_r: f64, r: f64, k: u32, supf: f64) -> Result<f64> {
    if !(big_r > r && r > 0.0) {
        return Err(Error::RadiusOrder { big: big_r, small: r });
    }
    if supf < 0.0 {
        return Err(invalid("supf must be nonnegative"));
    }
    if supf == 0.0 {
        return Ok(0.0);
    }
    Ok(supf / (big_r - r) * (r / big_r).powi(k as i32))
}

/// Coefficient types a [`Poly`] can carry.
pub trait Coeff:
    Clone + PartialEq + Zero + One + Add<Output = Self> + Sub<Output = Self> + Mul<Output = Self> + Neg<Output = Self>
{
}

impl Coeff for Complex64 {}
impl Coeff for BigInt {}

/// Sparse multivariate polynomial.
#[derive(Clone, Debug, PartialEq)]
pub struct Poly<C: Coeff> {
    nvars: usize,
    terms: BTreeMap<MultiIndex, C>,
}

pub type ComplexPoly = Poly<Complex64>;
pub type IntPoly = Poly<BigInt>;

impl<C: Coeff> Poly<C> {
    pub fn zero(nvars: usize) -> Self {
        Poly { nvars, terms: BTreeMap::new() }
    }

    pub fn constant(nvars: usize, c: C) -> Self {
        Poly::monomial(MultiIndex::zero(nvars), c)
    }

    pub fn monomial(alpha: MultiIndex, c: C) -> Self {
        let nvars = alpha.nvars();
        let mut terms = BTreeMap::new();
        if !c.is_zero() {
            terms.insert(alpha, c);
        }
        Poly { nvars, terms }
    }

    /// The coordinate function `z_j`.
    pub fn var(nvars: usize, j: usize) -> Self {
        Poly::monomial(MultiIndex::unit(nvars, j), C::one())
    }

    /// Builds a polynomial, summing repeated indices and dropping zeros.
    pub fn from_terms(nvars: usize, terms: impl IntoIterator<Item = (MultiIndex, C)>) -> Result<Self> {
        let mut p = Poly::zero(nvars);
        for (alpha, c) in terms {
            if alpha.nvars() != nvars {
                return Err(Error::DimensionMismatch { expected: nvars, got: alpha.nvars() });
            }
            p.add_term(alpha, c);
        }
        Ok(p)
    }

    fn add_term(&mut self, alpha: MultiIndex, c: C) {
        if c.is_zero() {
            return;
        }
        let entry = self.terms.entry(alpha.clone()).or_insert_with(C::zero);
        *entry = entry.clone() + c;
        if entry.is_zero() {
            self.terms.remove(&alpha);
        }
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn terms(&self) -> &BTreeMap<MultiIndex, C> {
        &self.terms
    }

    pub fn coeff(&self, alpha: &MultiIndex) -> C {
        self.terms.get(alpha).cloned().unwrap_or_else(C::zero)
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Total degree; zero for the zero polynomial.
    pub fn degree(&self) -> u32 {
        self.terms.keys().map(MultiIndex::degree).max().unwrap_or(0)
    }

    /// Degree in each variable separately.
    pub fn partial_degrees(&self) -> Vec<u32> {
        let mut d = vec![0; self.nvars];
        for alpha in self.terms.keys() {
            for (dj, &a) in d.iter_mut().zip(&alpha.0) {
                *dj = (*dj).max(a);
            }
        }
        d
    }

    pub fn is_constant(&self) -> bool {
        self.degree() == 0
    }

    pub fn add(&self, other: &Poly<C>) -> Result<Poly<C>> {
        self.check_same(other)?;
        let mut out = self.clone();
        for (a, c) in &other.terms {
            out.add_term(a.clone(), c.clone());
        }
        Ok(out)
    }

    pub fn sub(&self, other: &Poly<C>) -> Result<Poly<C>> {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> Poly<C> {
        Poly {
            nvars: self.nvars,
            terms: self.terms.iter().map(|(a, c)| (a.clone(), -c.clone())).collect(),
        }
    }

    pub fn mul(&self, other: &Poly<C>) -> Result<Poly<C>> {
        self.check_same(other)?;
        let mut out = Poly::zero(self.nvars);
        for (a, c) in &self.terms {
            for (b, d) in &other.terms {
                out.add_term(a.add(b), c.clone() * d.clone());
            }
        }
        Ok(out)
    }

    pub fn scale(&self, s: &C) -> Poly<C> {
        let mut out = Poly::zero(self.nvars);
        for (a, c) in &self.terms {
            out.add_term(a.clone(), c.clone() * s.clone());
        }
        out
    }

    pub fn pow(&self, k: u32) -> Poly<C> {
        let mut result = Poly::constant(self.nvars, C::one());
        let mut base = self.clone();
        let mut e = k;
        while e > 0 {
            if e & 1 == 1 {
                result = result.mul(&base).expect("same nvars");
            }
            e >>= 1;
            if e > 0 {
                base = base.mul(&base).expect("same nvars");
            }
        }
        result
    }

    /// Composition `P(φ_1, …, φ_n)` with polynomial components.
    pub fn compose(&self, phi: &[Poly<C>]) -> Result<Poly<C>> {
        if phi.len() != self.nvars {
            return Err(Error::DimensionMismatch { expected: self.nvars, got: phi.len() });
        }
        let m = phi.first().map(|p| p.nvars).unwrap_or(0);
        if let Some(bad) = phi.iter().find(|p| p.nvars != m) {
            return Err(Error::DimensionMismatch { expected: m, got: bad.nvars });
        }
        let degs = self.partial_degrees();
        let powers: Vec<Vec<Poly<C>>> = phi
            .iter()
            .zip(&degs)
            .map(|(p, &d)| {
                let mut v = vec![Poly::constant(m, C::one())];
                for i in 1..=d as usize {
                    v.push(v[i - 1].mul(p).expect("same nvars"));
                }
                v
            })
            .collect();
        let mut out = Poly::zero(m);
        for (alpha, c) in &self.terms {
            let mut t = Poly::constant(m, c.clone());
            for (j, &a) in alpha.0.iter().enumerate() {
                if a > 0 {
                    t = t.mul(&powers[j][a as usize])?;
                }
            }
            out = out.add(&t)?;
        }
        Ok(out)
    }

    fn check_same(&self, other: &Poly<C>) -> Result<()> {
        if self.nvars != other.nvars {
            return Err(Error::DimensionMismatch { expected: self.nvars, got: other.nvars });
        }
        Ok(())
    }
}

fn power_table<T: Clone>(z: &[T], degs: &[u32], one: T, mul: impl Fn(&T, &T) -> T) -> Vec<Vec<T>> {
    z.iter()
        .zip(degs)
        .map(|(zj, &d)| {
            let mut v = Vec::with_capacity(d as usize + 1);
            v.push(one.clone());
            for i in 1..=d as usize {
                let next = mul(&v[i - 1], zj);
                v.push(next);
            }
            v
        })
        .collect()
}

impl Poly<Complex64> {
    pub fn evaluate(&self, z: &[Complex64]) -> Result<Complex64> {
        if z.len() != self.nvars {
            return Err(Error::DimensionMismatch { expected: self.nvars, got: z.len() });
        }
        Ok(self.evaluate_unchecked(z, &self.partial_degrees()))
    }

    fn evaluate_unchecked(&self, z: &[Complex64], degs: &[u32]) -> Complex64 {
        let pw = power_table(z, degs, Complex64::new(1.0, 0.0), |a, b| a * b);
        let mut acc = Complex64::new(0.0, 0.0);
        for (alpha, c) in &self.terms {
            let mut t = *c;
            for (j, &a) in alpha.0.iter().enumerate() {
                t *= pw[j][a as usize];
            }
            acc += t;
        }
        acc
    }

    /// Re-expands around `a`: returns `Q` with `Q(ζ) = P(a + ζ)`.
    pub fn recenter(&self, a: &[Complex64]) -> Result<ComplexPoly> {
        if a.len() != self.nvars {
            return Err(Error::DimensionMismatch { expected: self.nvars, got: a.len() });
        }
        if a.iter().all(|c| c.norm() == 0.0) {
            return Ok(self.clone());
        }
        let shifted: Vec<ComplexPoly> = (0..self.nvars)
            .map(|j| {
                Poly::var(self.nvars, j)
                    .add(&Poly::constant(self.nvars, a[j]))
                    .expect("same nvars")
            })
            .collect();
        self.compose(&shifted)
    }

    /// `Σ |c_α| R^{|α|}` after recentering at the disk center.
    pub fn coefficient_sum_bound(&self, disk: &Polydisk) -> Result<f64> {
        let q = self.recenter(&disk.center)?;
        Ok(q.terms.iter().map(|(a, c)| c.norm() * disk.radius.powi(a.degree() as i32)).sum())
    }
}

impl Poly<BigInt> {
    pub fn to_complex(&self) -> ComplexPoly {
        Poly {
            nvars: self.nvars,
            terms: self
                .terms
                .iter()
                .map(|(a, c)| (a.clone(), Complex64::new(c.to_f64().unwrap_or(f64::NAN), 0.0)))
                .collect(),
        }
    }

    /// Largest absolute coefficient.
    pub fn coeff_max(&self) -> BigInt {
        self.terms.values().map(|c| c.abs()).max().unwrap_or_else(BigInt::zero)
    }

    /// Exact evaluation at a real rational point.
    pub fn evaluate_rational(&self, x: &[BigRational]) -> Result<BigRational> {
        if x.len() != self.nvars {
            return Err(Error::DimensionMismatch { expected: self.nvars, got: x.len() });
        }
        let pw = power_table(x, &self.partial_degrees(), BigRational::one(), |a, b| a * b);
        let mut acc = BigRational::zero();
        for (alpha, c) in &self.terms {
            let mut t = BigRational::from_integer(c.clone());
            for (j, &a) in alpha.0.iter().enumerate() {
                t *= &pw[j][a as usize];
            }
            acc += t;
        }
        Ok(acc)
    }

    /// Enclosure of `P(z)` over a box of complex intervals, with outward
    /// rounding at `prec` bits ([`EXACT`] for no rounding).
    pub fn evaluate_interval(&self, z: &[ComplexInterval], prec: u64) -> Result<ComplexInterval> {
        if z.len() != self.nvars {
            return Err(Error::DimensionMismatch { expected: self.nvars, got: z.len() });
        }
        let pw = power_table(z, &self.partial_degrees(), ComplexInterval::one(), |a, b| a.mul(b, prec));
        let mut acc = ComplexInterval::zero();
        for (alpha, c) in &self.terms {
            let mut t = ComplexInterval::from_real(Interval::point(Dyadic::from_bigint(c)));
            for (j, &a) in alpha.0.iter().enumerate() {
                if a > 0 {
                    t = t.mul(&pw[j][a as usize], prec);
                }
            }
            acc = acc.add(&t, prec);
        }
        Ok(acc)
    }

    /// Exact value at a point with `f64` coordinates (every `f64` is dyadic).
    pub fn evaluate_exact(&self, z: &[Complex64]) -> Result<ComplexInterval> {
        let zi = lift_point(z)?;
        self.evaluate_interval(&zi, EXACT)
    }

    /// Evaluates with escalating working precision until the enclosure width
    /// is below `1e-3 * tol`. Returns the midpoint and the precision used.
    pub fn evaluate_to_tolerance(&self, z: &[Complex64], tol: f64) -> Result<(Complex64, u64)> {
        if !(tol > 0.0) {
            return Err(invalid("tolerance must be positive"));
        }
        let zi = lift_point(z)?;
        let mut prec = 64;
        loop {
            let v = self.evaluate_interval(&zi, prec)?;
            let w = v.re.width().to_f64().max(v.im.width().to_f64());
            if w <= 1e-3 * tol {
                return Ok((Complex64::new(v.re.midpoint_f64(), v.im.midpoint_f64()), prec));
            }
            if prec >= 1 << 16 {
                return Err(Error::InsufficientPrecision(format!(
                    "enclosure width {w:e} above {:e} at {prec} bits",
                    1e-3 * tol
                )));
            }
            prec *= 2;
        }
    }
}

pub(crate) fn lift_point(z: &[Complex64]) -> Result<Vec<ComplexInterval>> {
    z.iter()
        .map(|c| ComplexInterval::from_f64(c.re, c.im).ok_or_else(|| invalid("non-finite coordinate")))
        .collect()
}

/// Polydisk `Δ(a, R)` with equal radius in every coordinate.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Polydisk {
    pub center: Vec<Complex64>,
    pub radius: f64,
}

impl Polydisk {
    pub fn new(center: Vec<Complex64>, radius: f64) -> Result<Self> {
        if !(radius > 0.0 && radius.is_finite()) {
            return Err(invalid("polydisk radius must be positive"));
        }
        Ok(Polydisk { center, radius })
    }

    pub fn origin(n: usize, radius: f64) -> Result<Self> {
        Polydisk::new(vec![Complex64::new(0.0, 0.0); n], radius)
    }

    pub fn dim(&self) -> usize {
        self.center.len()
    }

    /// Sup-distance from the center.
    pub fn deviation(&self, z: &[Complex64]) -> f64 {
        z.iter().zip(&self.center).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max)
    }

    pub fn contains(&self, z: &[Complex64]) -> bool {
        self.deviation(z) < self.radius
    }

    /// Point of the distinguished-boundary torus at the given angles.
    pub fn torus_point(&self, angles: &[f64]) -> Vec<Complex64> {
        self.center
            .iter()
            .zip(angles)
            .map(|(c, &t)| c + Complex64::from_polar(self.radius, t))
            .collect()
    }
}

/// Two-sided bound on the sup of `|P|` over a polydisk.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SupBound {
    pub lo: f64,
    pub hi: f64,
}

/// Iterates over all `grid^n` torus angle tuples in odometer order.
pub(crate) fn for_each_torus_angle(n: usize, grid: usize, mut f: impl FnMut(&[f64])) {
    let step = 2.0 * PI / grid as f64;
    let mut idx = vec![0usize; n];
    let mut angles = vec![0.0; n];
    loop {
        for (a, &i) in angles.iter_mut().zip(&idx) {
            *a = step * i as f64;
        }
        f(&angles);
        let mut j = 0;
        loop {
            if j == n {
                return;
            }
            idx[j] += 1;
            if idx[j] < grid {
                break;
            }
            idx[j] = 0;
            j += 1;
        }
    }
}

/// Sup of `|P|` on a polydisk, bracketed from the distinguished-boundary torus.
///
/// `lo` is the maximum over a `grid^n` torus sample. Along any line on the
/// torus, `P` restricted to the torus is a trigonometric polynomial of
/// exponential type at most `deg P * |Δθ|_∞`, so at a maximizer the real part
/// in the direction of the maximum drops by at most `σ²/2` times the sup
/// within distance `σ = deg P * π / grid`. Hence `sup ≤ lo / (1 − σ²/2)`. The
/// coefficient bound `Σ |c_α| R^{|α|}` caps `hi` as well.
pub fn sup_on_polydisk(p: &ComplexPoly, disk: &Polydisk, grid: usize) -> Result<SupBound> {
    if grid < 8 {
        return Err(Error::GridTooCoarse { required: 8, got: grid });
    }
    if disk.dim() != p.nvars() {
        return Err(Error::DimensionMismatch { expected: p.nvars(), got: disk.dim() });
    }
    let n = p.nvars();
    let coeff_bound = p.coefficient_sum_bound(disk)?;
    if p.is_zero() {
        return Ok(SupBound { lo: 0.0, hi: 0.0 });
    }
    if p.is_constant() || n == 0 {
        let v = p.coeff(&MultiIndex::zero(n)).norm();
        return Ok(SupBound { lo: v, hi: v });
    }
    let degs = p.partial_degrees();
    let mut lo: f64 = 0.0;
    for_each_torus_angle(n, grid, |angles| {
        let z = disk.torus_point(angles);
        lo = lo.max(p.evaluate_unchecked(&z, &degs).norm());
    });
    let sigma = p.degree() as f64 * PI / grid as f64;
    let shrink = 1.0 - 0.5 * sigma * sigma;
    let sampled_hi = if shrink > 0.0 { lo / shrink } else { f64::INFINITY };
    // guard against the rounding of the sampled evaluations
    let sampled_hi = sampled_hi * (1.0 + 1e-12);
    let hi = sampled_hi.min(coeff_bound * (1.0 + 1e-12)).max(lo);
    Ok(SupBound { lo, hi })
}

/// Bernstein–Walsh growth bound `A (R/r)^{deg P}` on the larger polydisk.
pub fn bernstein_extend(p: &ComplexPoly, small: &Polydisk, big: &Polydisk, a: f64) -> Result<f64> {
    if small.center != big.center {
        return Err(Error::CenterMismatch);
    }
    if !(big.radius > small.radius) {
        return Err(Error::RadiusOrder { big: big.radius, small: small.radius });
    }
    if a < 0.0 {
        return Err(invalid("A must be nonnegative"));
    }
    Ok(a * (big.radius / small.radius).powi(p.degree() as i32))
}

/// Scales `P` by `(r/R)^{deg P}`, mapping sup ≤ 1 on `Δ(a,r)` to sup ≤ 1 on
/// `Δ(a,R)`.
pub fn rescale_into_unit_ball(p: &ComplexPoly, r: f64, big_r: f64) -> Result<ComplexPoly> {
    if !(big_r > r && r > 0.0) {
        return Err(Error::RadiusOrder { big: big_r, small: r });
    }
    let s = (r / big_r).powi(p.degree() as i32);
    Ok(p.scale(&Complex64::new(s, 0.0)))
}

#[derive(Serialize, Deserialize)]
struct TermJson {
    alpha: Vec<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    re: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    im: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    coeff: Option<String>,
}

#[derive(Serialize, Deserialize)]
struct PolyJson {
    nvars: usize,
    terms: Vec<TermJson>,
}

impl ComplexPoly {
    pub fn to_json(&self) -> serde_json::Value {
        let doc = PolyJson {
            nvars: self.nvars,
            terms: self
                .terms
                .iter()
                .map(|(a, c)| TermJson { alpha: a.0.clone(), re: Some(c.re), im: Some(c.im), coeff: None })
                .collect(),
        };
        serde_json::to_value(doc).expect("serializable")
    }

    /// Parses `{"nvars", "terms": [{"alpha", "re", "im"}]}`; integer
    /// `"coeff"` strings are accepted too.
    pub fn from_json(v: &serde_json::Value) -> Result<Self> {
        let doc: PolyJson = serde_json::from_value(v.clone())?;
        let mut terms = Vec::with_capacity(doc.terms.len());
        for t in doc.terms {
            let c = match (&t.coeff, t.re, t.im) {
                (Some(s), _, _) => {
                    let b: BigInt = s.parse().map_err(|_| invalid(format!("bad integer coefficient {s:?}")))?;
                    Complex64::new(b.to_f64().unwrap_or(f64::NAN), 0.0)
                }
                (None, re, im) => Complex64::new(re.unwrap_or(0.0), im.unwrap_or(0.0)),
            };
            terms.push((MultiIndex(t.alpha), c));
        }
        Poly::from_terms(doc.nvars, terms)
    }
}

impl IntPoly {
    pub fn to_json(&self) -> serde_json::Value {
        let doc = PolyJson {
            nvars: self.nvars,
            terms: self
                .terms
                .iter()
                .map(|(a, c)| TermJson { alpha: a.0.clone(), re: None, im: None, coeff: Some(c.to_string()) })
                .collect(),
        };
        serde_json::to_value(doc).expect("serializable")
    }

    pub fn from_json(v: &serde_json::Value) -> Result<Self> {
        let doc: PolyJson = serde_json::from_value(v.clone())?;
        let mut terms = Vec::with_capacity(doc.terms.len());
        for t in doc.terms {
            let s = t.coeff.ok_or_else(|| invalid("integer polynomial term without \"coeff\""))?;
            let b: BigInt = s.parse().map_err(|_| invalid(format!("bad integer coefficient {s:?}")))?;
            terms.push((MultiIndex(t.alpha), b));
        }
        Poly::from_terms(doc.nvars, terms)
    }
}
