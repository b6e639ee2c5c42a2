//! Truncated Taylor jets, Gevrey constants, and graph-form samples.
//!
//! A function `f` on a box `K ⊂ R^m` is Gevrey of order `s` when
//! `|∂^α f| ≤ C^{|α|+1} (α!)^s` on `K`. Powers then satisfy
//! `|∂^α f^k| ≤ C'^{|α|} binom(α+k−1, α) (α!)^s` whenever `|f| ≤ 1` and
//! `|∂^α f| ≤ C'^{|α|} (α!)^s` for `α ≠ 0`. Both constants are computed here
//! from jets on a sample grid of `K`; rational families use exact rational
//! jets so the comparisons are exact.

use std::collections::HashMap;
use std::sync::Arc;

use num_bigint::{BigInt, BigUint};
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{Num, One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::dyadic::Dyadic;
use crate::error::{invalid, Error, Result};
use crate::polynomials::{factorial, ComplexPoly, IntPoly, MultiIndex, Poly};
use crate::trace_space::PointCloud;

/// Scalars a jet can carry.
pub trait JetScalar: Clone + Num + std::ops::Neg<Output = Self> + std::fmt::Debug {}
impl JetScalar for BigRational {}
impl JetScalar for f64 {}
impl JetScalar for Complex64 {}

/// Monomial layout shared by all jets of the same shape.
#[derive(Debug)]
pub struct JetLayout {
    nvars: usize,
    order: u32,
    monomials: Vec<MultiIndex>,
    index: HashMap<MultiIndex, usize>,
    /// `(i, j, k)` with `monomials[i] + monomials[j] = monomials[k]`.
    products: Vec<(usize, usize, usize)>,
}

impl JetLayout {
    pub fn new(nvars: usize, order: u32) -> Arc<Self> {
        let monomials = MultiIndex::up_to_degree(nvars, order);
        let index: HashMap<MultiIndex, usize> = monomials.iter().cloned().enumerate().map(|(i, a)| (a, i)).collect();
        let mut products = Vec::new();
        for (i, a) in monomials.iter().enumerate() {
            for (j, b) in monomials.iter().enumerate() {
                if a.degree() + b.degree() <= order {
                    products.push((i, j, index[&a.add(b)]));
                }
            }
        }
        Arc::new(JetLayout { nvars, order, monomials, index, products })
    }

    pub fn monomials(&self) -> &[MultiIndex] {
        &self.monomials
    }
}

/// Taylor coefficients `∂^α f(x₀) / α!` for `|α| ≤ order`.
#[derive(Clone, Debug)]
pub struct Jet<T: JetScalar> {
    layout: Arc<JetLayout>,
    coeffs: Vec<T>,
}

impl<T: JetScalar> Jet<T> {
    pub fn zero(layout: &Arc<JetLayout>) -> Self {
        Jet { layout: layout.clone(), coeffs: vec![T::zero(); layout.monomials.len()] }
    }

    pub fn constant(layout: &Arc<JetLayout>, c: T) -> Self {
        let mut j = Jet::zero(layout);
        j.coeffs[0] = c;
        j
    }

    /// The jet of `x₀_j + u_j`.
    pub fn variable(layout: &Arc<JetLayout>, j: usize, base: T) -> Self {
        let mut out = Jet::constant(layout, base);
        if layout.order >= 1 {
            out.coeffs[layout.index[&MultiIndex::unit(layout.nvars, j)]] = T::one();
        }
        out
    }

    pub fn from_coeffs(layout: &Arc<JetLayout>, coeffs: Vec<T>) -> Result<Self> {
        if coeffs.len() != layout.monomials.len() {
            return Err(Error::DimensionMismatch { expected: layout.monomials.len(), got: coeffs.len() });
        }
        Ok(Jet { layout: layout.clone(), coeffs })
    }

    pub fn layout(&self) -> &Arc<JetLayout> {
        &self.layout
    }

    pub fn order(&self) -> u32 {
        self.layout.order
    }

    pub fn nvars(&self) -> usize {
        self.layout.nvars
    }

    pub fn coeffs(&self) -> &[T] {
        &self.coeffs
    }

    pub fn coeff(&self, alpha: &MultiIndex) -> T {
        self.layout.index.get(alpha).map(|&i| self.coeffs[i].clone()).unwrap_or_else(T::zero)
    }

    pub fn value(&self) -> T {
        self.coeffs[0].clone()
    }

    fn check(&self, other: &Jet<T>) -> Result<()> {
        if self.layout.order != other.layout.order {
            return Err(Error::OrderMismatch(self.layout.order as usize, other.layout.order as usize));
        }
        if self.layout.nvars != other.layout.nvars {
            return Err(Error::DimensionMismatch { expected: self.layout.nvars, got: other.layout.nvars });
        }
        Ok(())
    }

    pub fn add(&self, other: &Jet<T>) -> Result<Jet<T>> {
        self.check(other)?;
        let coeffs = self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| a.clone() + b.clone()).collect();
        Ok(Jet { layout: self.layout.clone(), coeffs })
    }

    pub fn sub(&self, other: &Jet<T>) -> Result<Jet<T>> {
        self.add(&other.scale(&-T::one()))
    }

    pub fn scale(&self, s: &T) -> Jet<T> {
        Jet { layout: self.layout.clone(), coeffs: self.coeffs.iter().map(|a| a.clone() * s.clone()).collect() }
    }

    /// Truncated product.
    pub fn mul(&self, other: &Jet<T>) -> Result<Jet<T>> {
        self.check(other)?;
        let mut out = vec![T::zero(); self.coeffs.len()];
        for &(i, j, k) in &self.layout.products {
            if self.coeffs[i].is_zero() || other.coeffs[j].is_zero() {
                continue;
            }
            out[k] = out[k].clone() + self.coeffs[i].clone() * other.coeffs[j].clone();
        }
        Ok(Jet { layout: self.layout.clone(), coeffs: out })
    }

    /// `self^k` by binary powering of truncated products.
    pub fn power(&self, k: u32) -> Jet<T> {
        let mut result = Jet::constant(&self.layout, T::one());
        let mut base = self.clone();
        let mut e = k;
        while e > 0 {
            if e & 1 == 1 {
                result = result.mul(&base).expect("same layout");
            }
            e >>= 1;
            if e > 0 {
                base = base.mul(&base).expect("same layout");
            }
        }
        result
    }

    /// `1 / self`; the constant term must be nonzero.
    pub fn reciprocal(&self) -> Result<Jet<T>> {
        let c0 = self.value();
        if c0.is_zero() {
            return Err(invalid("reciprocal of a jet with zero constant term"));
        }
        let inv0 = T::one() / c0;
        // 1/f = inv0 Σ (−u)^j with u = f inv0 − 1 having no constant term
        let mut u = self.scale(&inv0);
        u.coeffs[0] = T::zero();
        let neg_u = u.scale(&-T::one());
        let mut term = Jet::constant(&self.layout, T::one());
        let mut sum = term.clone();
        for _ in 0..self.layout.order {
            term = term.mul(&neg_u)?;
            sum = sum.add(&term)?;
        }
        Ok(sum.scale(&inv0))
    }

    /// `F ∘ G` where `self` is the jet of `F` taken at the point `G(x₀)`.
    ///
    /// Inner jets are shifted by their constant terms before substitution, so
    /// the outer expansion point must equal those constants.
    pub fn compose(&self, inner: &[Jet<T>]) -> Result<Jet<T>> {
        if inner.len() != self.layout.nvars {
            return Err(Error::DimensionMismatch { expected: self.layout.nvars, got: inner.len() });
        }
        let first = inner.first().ok_or_else(|| invalid("composition needs at least one inner jet"))?;
        for g in inner {
            first.check(g)?;
        }
        if first.layout.order != self.layout.order {
            return Err(Error::OrderMismatch(self.layout.order as usize, first.layout.order as usize));
        }
        let lay = first.layout.clone();
        let shifted: Vec<Jet<T>> = inner
            .iter()
            .map(|g| {
                let mut s = g.clone();
                s.coeffs[0] = T::zero();
                s
            })
            .collect();
        let powers: Vec<Vec<Jet<T>>> = shifted
            .iter()
            .map(|g| {
                let mut v = vec![Jet::constant(&lay, T::one())];
                for i in 1..=self.layout.order as usize {
                    v.push(v[i - 1].mul(g).expect("same layout"));
                }
                v
            })
            .collect();
        let mut out = Jet::zero(&lay);
        for (beta, c) in self.layout.monomials.iter().zip(&self.coeffs) {
            if c.is_zero() {
                continue;
            }
            let mut t = Jet::constant(&lay, c.clone());
            for (i, &b) in beta.0.iter().enumerate() {
                if b > 0 {
                    t = t.mul(&powers[i][b as usize])?;
                }
            }
            out = out.add(&t)?;
        }
        Ok(out)
    }
}

impl Jet<BigRational> {
    /// Jet of an integer polynomial at a rational point.
    pub fn of_poly(layout: &Arc<JetLayout>, p: &IntPoly, x0: &[BigRational]) -> Result<Self> {
        if p.nvars() != layout.nvars || x0.len() != layout.nvars {
            return Err(Error::DimensionMismatch { expected: layout.nvars, got: p.nvars() });
        }
        let vars: Vec<Jet<BigRational>> = (0..layout.nvars).map(|j| Jet::variable(layout, j, x0[j].clone())).collect();
        let mut out = Jet::zero(layout);
        for (alpha, c) in p.terms() {
            let mut t = Jet::constant(layout, BigRational::from_integer(c.clone()));
            for (j, &a) in alpha.0.iter().enumerate() {
                if a > 0 {
                    t = t.mul(&vars[j].power(a))?;
                }
            }
            out = out.add(&t)?;
        }
        Ok(out)
    }

    pub fn to_f64(&self) -> Jet<f64> {
        Jet { layout: self.layout.clone(), coeffs: self.coeffs.iter().map(rat_to_f64).collect() }
    }
}

impl Jet<f64> {
    pub fn to_complex(&self) -> Jet<Complex64> {
        Jet { layout: self.layout.clone(), coeffs: self.coeffs.iter().map(|&c| Complex64::new(c, 0.0)).collect() }
    }
}

fn rat_to_f64(r: &BigRational) -> f64 {
    r.to_f64().unwrap_or_else(|| (ln_abs_rat(r)).exp() * if r.is_negative() { -1.0 } else { 1.0 })
}

/// `ln |r|` for a nonzero rational, valid beyond the `f64` range.
fn ln_abs_rat(r: &BigRational) -> f64 {
    Dyadic::from_bigint(r.numer()).ln_abs_approx() - Dyadic::from_bigint(r.denom()).ln_abs_approx()
}

fn ln_factorial_multi(alpha: &MultiIndex) -> f64 {
    alpha.0.iter().map(|&a| (2..=a).map(|k| (k as f64).ln()).sum::<f64>()).sum()
}

fn f64_to_rat(x: f64) -> Result<BigRational> {
    BigRational::from_float(x).ok_or_else(|| invalid(format!("non-finite value {x}")))
}

/// The concrete function behind a Gevrey family.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum FamilyKind {
    /// `num / den` with integer polynomial numerator and denominator.
    AnalyticRational {
        #[serde(with = "int_poly_json")]
        num: IntPoly,
        #[serde(with = "int_poly_json")]
        den: IntPoly,
    },
    /// `exp(rate · x)`.
    Exponential { rate: Vec<f64> },
    /// `Σ_{j<terms} exp(−2^{j/s_gen}) cos(2^j x)` in one variable.
    LacunaryCosine { s_gen: f64, terms: u32 },
}

mod int_poly_json {
    use super::IntPoly;
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(p: &IntPoly, s: S) -> Result<S::Ok, S::Error> {
        p.to_json().serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<IntPoly, D::Error> {
        let v = serde_json::Value::deserialize(d)?;
        IntPoly::from_json(&v).map_err(serde::de::Error::custom)
    }
}

impl FamilyKind {
    pub fn nvars(&self) -> usize {
        match self {
            FamilyKind::AnalyticRational { num, .. } => num.nvars(),
            FamilyKind::Exponential { rate } => rate.len(),
            FamilyKind::LacunaryCosine { .. } => 1,
        }
    }

    /// Exact rational jet (rational families only).
    pub fn jet_exact(&self, x0: &[BigRational], order: u32) -> Result<Option<Jet<BigRational>>> {
        match self {
            FamilyKind::AnalyticRational { num, den } => {
                let lay = JetLayout::new(num.nvars(), order);
                let n = Jet::of_poly(&lay, num, x0)?;
                let d = Jet::of_poly(&lay, den, x0)?;
                if d.value().is_zero() {
                    return Err(Error::PoleInside);
                }
                Ok(Some(n.mul(&d.reciprocal()?)?))
            }
            _ => Ok(None),
        }
    }

    /// Floating jet at `x0`.
    pub fn jet_f64(&self, x0: &[f64], order: u32) -> Result<Jet<f64>> {
        if x0.len() != self.nvars() {
            return Err(Error::DimensionMismatch { expected: self.nvars(), got: x0.len() });
        }
        match self {
            FamilyKind::AnalyticRational { .. } => {
                let xr = x0.iter().map(|&v| f64_to_rat(v)).collect::<Result<Vec<_>>>()?;
                Ok(self.jet_exact(&xr, order)?.expect("rational family").to_f64())
            }
            FamilyKind::Exponential { rate } => {
                let lay = JetLayout::new(rate.len(), order);
                let base: f64 = rate.iter().zip(x0).map(|(a, b)| a * b).sum::<f64>().exp();
                let coeffs = lay
                    .monomials
                    .iter()
                    .map(|a| {
                        let mut c = base;
                        for (j, &e) in a.0.iter().enumerate() {
                            c *= rate[j].powi(e as i32) / factorial(e as u64).to_f64().unwrap_or(f64::INFINITY);
                        }
                        c
                    })
                    .collect();
                Jet::from_coeffs(&lay, coeffs)
            }
            FamilyKind::LacunaryCosine { s_gen, terms } => {
                let lay = JetLayout::new(1, order);
                let coeffs = (0..=order)
                    .map(|k| {
                        let sum: f64 = (0..*terms)
                            .map(|j| {
                                let freq = 2f64.powi(j as i32);
                                let amp = (-(2f64.powf(j as f64 / s_gen))).exp();
                                amp * freq.powi(k as i32) * (freq * x0[0] + k as f64 * std::f64::consts::FRAC_PI_2).cos()
                            })
                            .sum();
                        sum / factorial(k as u64).to_f64().unwrap_or(f64::INFINITY)
                    })
                    .collect();
                Jet::from_coeffs(&lay, coeffs)
            }
        }
    }

    /// `f(x)`.
    pub fn value(&self, x: &[f64]) -> Result<f64> {
        Ok(self.jet_f64(x, 0)?.value())
    }

    /// `ln |∂^α f(x)|` for every `|α| ≤ order` (`None` for a zero derivative),
    /// from exact jets where available.
    pub fn derivative_logs(&self, x: &[f64], order: u32) -> Result<Vec<(MultiIndex, Option<f64>)>> {
        let xr = x.iter().map(|&v| f64_to_rat(v)).collect::<Result<Vec<_>>>()?;
        if let Some(j) = self.jet_exact(&xr, order)? {
            return Ok(j
                .layout
                .monomials
                .iter()
                .zip(&j.coeffs)
                .map(|(a, c)| {
                    let v = if c.is_zero() { None } else { Some(ln_abs_rat(c) + ln_factorial_multi(a)) };
                    (a.clone(), v)
                })
                .collect());
        }
        let j = self.jet_f64(x, order)?;
        Ok(j
            .layout
            .monomials
            .iter()
            .zip(&j.coeffs)
            .map(|(a, &c)| {
                let v = if c == 0.0 { None } else { Some(c.abs().ln() + ln_factorial_multi(a)) };
                (a.clone(), v)
            })
            .collect())
    }
}

/// Closed-form bound `Σ_j a_j λ_j^k` on the `k`-th derivative of the
/// lacunary cosine family (attained at `x = 0` for even `k`).
pub fn lacunary_derivative_bound(s_gen: f64, terms: u32, k: u32) -> f64 {
    (0..terms)
        .map(|j| (-(2f64.powf(j as f64 / s_gen)) + (j * k) as f64 * std::f64::consts::LN_2).exp())
        .sum()
}

/// Number of lacunary terms so that, for every order `≤ maxorder`, the
/// omitted tail is below `1e-30` of the derivative bound.
pub fn lacunary_terms_for(s_gen: f64, maxorder: u32) -> u32 {
    let mut j = 1u32;
    loop {
        let ok = (0..=maxorder).all(|k| {
            let tail_term = -(2f64.powf(j as f64 / s_gen)) + (j * k) as f64 * std::f64::consts::LN_2;
            let next = -(2f64.powf((j + 1) as f64 / s_gen)) + ((j + 1) * k) as f64 * std::f64::consts::LN_2;
            let bound = lacunary_derivative_bound(s_gen, j, k).ln();
            // terms beyond j decrease at least geometrically once next < tail_term - 1
            next < tail_term - 1.0 && tail_term + 1.0 < bound - 69.1
        });
        if ok || j > 2000 {
            return j;
        }
        j += 1;
    }
}

/// Box `K` as per-axis `[lo, hi]` intervals.
pub type Domain = Vec<[f64; 2]>;

/// Grid of `samples` points per axis over a box.
pub fn box_grid(domain: &Domain, samples: usize) -> Vec<Vec<f64>> {
    let samples = samples.max(1);
    let mut out = vec![Vec::new()];
    for &[lo, hi] in domain {
        let axis: Vec<f64> = (0..samples)
            .map(|i| if samples == 1 { 0.5 * (lo + hi) } else { lo + (hi - lo) * i as f64 / (samples - 1) as f64 })
            .collect();
        out = out
            .into_iter()
            .flat_map(|p| {
                axis.iter().map(move |&v| {
                    let mut q = p.clone();
                    q.push(v);
                    q
                })
            })
            .collect();
    }
    out
}

/// Result of [`calibrate_constant`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Calibration {
    pub s: f64,
    /// Smallest `C` with `|∂^α f| ≤ C^{|α|+1} (α!)^s` on the samples.
    pub c: f64,
    pub attained_x: Vec<f64>,
    pub attained_alpha: Vec<u32>,
    /// Smallest `C'` with `|∂^α f| ≤ C'^{|α|} (α!)^s` for `1 ≤ |α|`.
    pub c_direct: f64,
    pub max_order: u32,
    /// Per total order `k`: `max (|∂^α f| / (α!)^s)^{1/(k+1)}`.
    pub per_order: Vec<f64>,
    /// Largest sampled `|f|`.
    pub sup_abs: f64,
}

const CALIBRATION_MARGIN: f64 = 1.0 + 1e-12;

/// Calibrates the Gevrey constants of `f` on a sample grid of `K`.
pub fn calibrate_constant(f: &FamilyKind, s: f64, domain: &Domain, maxorder: u32, samples: usize) -> Result<Calibration> {
    if maxorder < 2 {
        return Err(invalid("calibration needs maxorder >= 2"));
    }
    if domain.len() != f.nvars() {
        return Err(Error::DimensionMismatch { expected: f.nvars(), got: domain.len() });
    }
    let mut best_log = f64::NEG_INFINITY;
    let mut attained = (Vec::new(), Vec::new());
    let mut direct_log = f64::NEG_INFINITY;
    let mut per_order = vec![f64::NEG_INFINITY; maxorder as usize + 1];
    let mut sup_abs: f64 = 0.0;
    for x in box_grid(domain, samples) {
        for (alpha, lg) in f.derivative_logs(&x, maxorder)? {
            let Some(lg) = lg else { continue };
            let d = alpha.degree();
            if d == 0 {
                sup_abs = sup_abs.max(lg.exp());
            }
            let scaled = lg - s * ln_factorial_multi(&alpha);
            let c_log = scaled / (d as f64 + 1.0);
            if c_log > best_log {
                best_log = c_log;
                attained = (x.clone(), alpha.0.clone());
            }
            per_order[d as usize] = per_order[d as usize].max(c_log);
            if d >= 1 {
                direct_log = direct_log.max(scaled / d as f64);
            }
        }
    }
    let c = if best_log.is_finite() { best_log.exp() * CALIBRATION_MARGIN } else { f64::MIN_POSITIVE };
    let c_direct = if direct_log.is_finite() { direct_log.exp() * CALIBRATION_MARGIN } else { 0.0 };
    Ok(Calibration {
        s,
        c,
        attained_x: attained.0,
        attained_alpha: attained.1,
        c_direct,
        max_order: maxorder,
        per_order: per_order.iter().map(|v| if v.is_finite() { v.exp() } else { 0.0 }).collect(),
        sup_abs,
    })
}

/// A calibrated Gevrey family on a box.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GevreyFamily {
    pub s: f64,
    pub function: FamilyKind,
    pub domain: Domain,
    pub calibration: Calibration,
}

impl GevreyFamily {
    pub fn calibrated_c(&self) -> f64 {
        self.calibration.c
    }

    pub fn max_order_validated(&self) -> u32 {
        self.calibration.max_order
    }

    pub fn nvars(&self) -> usize {
        self.function.nvars()
    }
}

/// Default samples per axis used by [`make_gevrey_family`].
pub const DEFAULT_CALIBRATION_SAMPLES: usize = 33;

/// Builds and calibrates a family on `domain`.
///
/// Rational families must have no pole on the box (certified with a
/// Lipschitz bound on the denominator over a refined grid). Lacunary families
/// get their number of terms from [`lacunary_terms_for`] when `terms == 0`.
pub fn make_gevrey_family(s: f64, function: FamilyKind, domain: Domain, maxorder: u32) -> Result<GevreyFamily> {
    if !(s >= 1.0) {
        return Err(invalid("Gevrey order s must be at least 1"));
    }
    if domain.iter().any(|&[lo, hi]| !(lo <= hi)) {
        return Err(invalid("box intervals must satisfy lo <= hi"));
    }
    let function = match function {
        FamilyKind::AnalyticRational { num, den } => {
            if num.nvars() != den.nvars() {
                return Err(Error::DimensionMismatch { expected: num.nvars(), got: den.nvars() });
            }
            certify_no_pole(&den, &domain)?;
            FamilyKind::AnalyticRational { num, den }
        }
        FamilyKind::LacunaryCosine { s_gen, terms } => {
            if !(s_gen >= 1.0) {
                return Err(invalid("lacunary generation order must be at least 1"));
            }
            let terms = if terms == 0 { lacunary_terms_for(s_gen, maxorder) } else { terms };
            FamilyKind::LacunaryCosine { s_gen, terms }
        }
        other => other,
    };
    let calibration = calibrate_constant(&function, s, &domain, maxorder, DEFAULT_CALIBRATION_SAMPLES)?;
    Ok(GevreyFamily { s, function, domain, calibration })
}

fn certify_no_pole(den: &IntPoly, domain: &Domain) -> Result<()> {
    if domain.len() != den.nvars() {
        return Err(Error::DimensionMismatch { expected: den.nvars(), got: domain.len() });
    }
    let m = domain.iter().map(|&[lo, hi]| lo.abs().max(hi.abs())).fold(0.0, f64::max);
    // |∂_j den| ≤ Σ |c_α| α_j M^{|α|−1}
    let lip: f64 = (0..den.nvars())
        .map(|j| {
            den.terms()
                .iter()
                .map(|(a, c)| {
                    let aj = a.0[j] as f64;
                    if aj == 0.0 {
                        0.0
                    } else {
                        c.abs().to_f64().unwrap_or(f64::INFINITY) * aj * m.powi(a.degree() as i32 - 1)
                    }
                })
                .sum::<f64>()
        })
        .sum();
    let width = domain.iter().map(|&[lo, hi]| hi - lo).fold(0.0, f64::max);
    let dc = den.to_complex();
    let mut samples = 17usize;
    while samples <= 1 << 14 {
        let mut min_abs = f64::INFINITY;
        for x in box_grid(domain, samples) {
            let z: Vec<Complex64> = x.iter().map(|&v| Complex64::new(v, 0.0)).collect();
            min_abs = min_abs.min(dc.evaluate(&z)?.norm());
        }
        if min_abs == 0.0 {
            return Err(Error::PoleInside);
        }
        let h = if samples > 1 { width / (samples - 1) as f64 } else { width };
        if min_abs > lip * h / 2.0 * (1.0 + 1e-9) + 1e-12 {
            return Ok(());
        }
        samples = 2 * samples - 1;
    }
    Err(Error::PoleInside)
}

/// One violation found by [`check_power_bound`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PowerViolation {
    pub x: Vec<f64>,
    pub alpha: Vec<u32>,
    pub k: u32,
    pub value: String,
    pub bound: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PowerBoundReport {
    /// Constant of the `C^{|α|+1}` convention.
    pub c_calibrated: f64,
    /// Constant used in the `C^{|α|}` convention: `max(c_calibrated, 1, c_direct)`.
    pub c_used: f64,
    pub exact: bool,
    pub checked: u64,
    pub violations: Vec<PowerViolation>,
}

/// Verifies `|∂^α f^p| ≤ C^{|α|} binom(α+p−1, α) (α!)^s` for `p = 1..=k` and
/// `|α| ≤ maxorder` on the calibration grid, using jet powers.
///
/// The constant is `max(C_calibrated, 1, C_direct)`. `max(C_calibrated, 1)`
/// alone is not enough in general; `C_direct` is the smallest constant for which the
/// per-derivative hypothesis of the power bound holds on the samples. Rational
/// families with integer `s` are compared exactly.
pub fn check_power_bound(f: &GevreyFamily, k: u32, maxorder: u32) -> Result<PowerBoundReport> {
    if k < 1 {
        return Err(invalid("power k must be at least 1"));
    }
    if f.calibration.sup_abs > 1.0 {
        return Err(Error::Precondition(format!("|f| reaches {} > 1 on the box", f.calibration.sup_abs)));
    }
    let cal = if maxorder <= f.calibration.max_order {
        f.calibration.clone()
    } else {
        calibrate_constant(&f.function, f.s, &f.domain, maxorder, DEFAULT_CALIBRATION_SAMPLES)?
    };
    let c_used = cal.c.max(1.0).max(cal.c_direct);
    let integer_s = f.s.fract() == 0.0;
    let exact = integer_s && matches!(f.function, FamilyKind::AnalyticRational { .. });
    let mut report = PowerBoundReport { c_calibrated: cal.c, c_used, exact, checked: 0, violations: Vec::new() };
    let c_rat = f64_to_rat(c_used)?;
    for x in box_grid(&f.domain, DEFAULT_CALIBRATION_SAMPLES) {
        if exact {
            let xr = x.iter().map(|&v| f64_to_rat(v)).collect::<Result<Vec<_>>>()?;
            let jet = f.function.jet_exact(&xr, maxorder)?.expect("rational family");
            if jet.value().abs() > BigRational::one() {
                return Err(Error::Precondition(format!("|f| > 1 at {x:?}")));
            }
            let s_int = f.s as u32;
            for p in 1..=k {
                let jp = jet.power(p);
                for (alpha, c) in jp.layout.monomials.iter().zip(&jp.coeffs) {
                    let fact = BigRational::from_integer(BigInt::from(alpha.factorial()));
                    let value = c.abs() * fact.clone();
                    let mut bound = BigRational::from_integer(BigInt::from(alpha.binom_shift(p as u64)));
                    for _ in 0..alpha.degree() {
                        bound *= &c_rat;
                    }
                    for _ in 0..s_int {
                        bound *= &fact;
                    }
                    report.checked += 1;
                    if value > bound {
                        report.violations.push(PowerViolation {
                            x: x.clone(),
                            alpha: alpha.0.clone(),
                            k: p,
                            value: value.to_string(),
                            bound: bound.to_string(),
                        });
                    }
                }
            }
        } else {
            let jet = f.function.jet_f64(&x, maxorder)?;
            if jet.value().abs() > 1.0 {
                return Err(Error::Precondition(format!("|f| > 1 at {x:?}")));
            }
            for p in 1..=k {
                let jp = jet.power(p);
                for (alpha, &c) in jp.layout.monomials.iter().zip(&jp.coeffs) {
                    if c == 0.0 {
                        report.checked += 1;
                        continue;
                    }
                    let lf = ln_factorial_multi(alpha);
                    let lv = c.abs().ln() + lf;
                    let lb = alpha.degree() as f64 * c_used.ln()
                        + big_ln(&alpha.binom_shift(p as u64))
                        + f.s * lf;
                    report.checked += 1;
                    // relative slack for the floating jet arithmetic
                    if lv > lb + 1e-9 {
                        report.violations.push(PowerViolation {
                            x: x.clone(),
                            alpha: alpha.0.clone(),
                            k: p,
                            value: format!("{:e}", lv.exp()),
                            bound: format!("{:e}", lb.exp()),
                        });
                    }
                }
            }
        }
    }
    Ok(report)
}

fn big_ln(v: &BigUint) -> f64 {
    Dyadic::from_bigint(&BigInt::from(v.clone())).ln_abs_approx()
}

/// Finite-order growth check of a family against a claimed order `s`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GrowthValidation {
    pub s_claimed: f64,
    pub per_order: Vec<f64>,
    /// `log2(C_K / C_{K/2})`: the local power-law exponent of the per-order
    /// constants over the upper half of the orders.
    pub growth_exponent: f64,
    pub passes: bool,
}

/// Largest growth exponent still accepted by [`validate_growth`].
pub const GROWTH_EXPONENT_LIMIT: f64 = 0.5;

/// Checks whether the per-order constants `(sup|f^{(k)}| / (k!)^s)^{1/(k+1)}`
/// settle. For a family of true order `s′ > s` they grow like `k^{s′−s}`; for
/// `s′ ≤ s` they converge. Finite-order evidence only.
pub fn validate_growth(per_order: &[f64], s_claimed: f64) -> Result<GrowthValidation> {
    let k = per_order.len().checked_sub(1).ok_or_else(|| invalid("no orders"))?;
    if k < 4 {
        return Err(invalid("growth validation needs maxorder >= 4"));
    }
    let half = k / 2;
    let g = (per_order[k] / per_order[half]).log2() / ((k as f64) / half as f64).log2();
    Ok(GrowthValidation { s_claimed, per_order: per_order.to_vec(), growth_exponent: g, passes: g <= GROWTH_EXPONENT_LIMIT })
}

/// Per-order constants of the lacunary family from the closed-form bound.
pub fn lacunary_per_order(s_gen: f64, terms: u32, s_claimed: f64, maxorder: u32) -> Vec<f64> {
    (0..=maxorder)
        .map(|k| {
            let lb = lacunary_derivative_bound(s_gen, terms, k).ln();
            let lf: f64 = (2..=k).map(|i| (i as f64).ln()).sum();
            ((lb - s_claimed * lf) / (k as f64 + 1.0)).exp()
        })
        .collect()
}

/// Local graph `y = h(x)`, `w = H(x)` over a box of `R^m`, embedded in `C^n`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GevreyGraph {
    pub m: usize,
    pub n: usize,
    pub s: f64,
    pub h: Vec<GevreyFamily>,
    #[serde(rename = "H")]
    pub big_h: Vec<GevreyFamily>,
    pub base: Vec<f64>,
    #[serde(rename = "box")]
    pub domain: Domain,
}

impl GevreyGraph {
    pub fn new(m: usize, n: usize, s: f64, h: Vec<GevreyFamily>, big_h: Vec<GevreyFamily>, base: Vec<f64>, domain: Domain) -> Result<Self> {
        if m == 0 || n < m {
            return Err(invalid("graph needs 1 <= m <= n"));
        }
        if h.len() != m || big_h.len() != n - m {
            return Err(invalid(format!("graph needs {m} h-functions and {} H-functions", n - m)));
        }
        if base.len() != m || domain.len() != m {
            return Err(Error::DimensionMismatch { expected: m, got: base.len().min(domain.len()) });
        }
        for f in h.iter().chain(&big_h) {
            if f.nvars() != m {
                return Err(Error::DimensionMismatch { expected: m, got: f.nvars() });
            }
        }
        Ok(GevreyGraph { m, n, s, h, big_h, base, domain })
    }

    fn functions(&self) -> impl Iterator<Item = &GevreyFamily> {
        self.h.iter().chain(&self.big_h)
    }

    /// Largest calibrated constant over the graph functions.
    pub fn calibrated_c(&self) -> f64 {
        self.functions().map(|f| f.calibrated_c()).fold(0.0, f64::max)
    }

    /// Whether all first derivatives vanish at the base point (the normalized
    /// graph coordinates). Diagnostic only.
    pub fn first_order_vanishes(&self, tol: f64) -> Result<bool> {
        for f in self.functions() {
            let j = f.function.jet_f64(&self.base, 1)?;
            if j.coeffs()[1..].iter().any(|c| c.abs() > tol) {
                return Ok(false);
            }
        }
        Ok(true)
    }

    /// The point `(x + i h(x), H(x)) ∈ C^n`.
    pub fn point(&self, x: &[f64]) -> Result<Vec<Complex64>> {
        let mut z = Vec::with_capacity(self.n);
        for (j, f) in self.h.iter().enumerate() {
            z.push(Complex64::new(x[j], f.function.value(x)?));
        }
        for f in &self.big_h {
            z.push(Complex64::new(f.function.value(x)?, 0.0));
        }
        Ok(z)
    }
}

/// Samples the graph on a uniform grid with `density` points per axis.
///
/// The cloud is centered at the bounding-box midpoint with inner radius 1.05
/// times the sampled deviation and `R` four times that.
pub fn sample_graph(g: &GevreyGraph, density: usize) -> Result<PointCloud> {
    if density < 2 {
        return Err(invalid("density must be at least 2"));
    }
    let pts = box_grid(&g.domain, density)
        .iter()
        .map(|x| g.point(x))
        .collect::<Result<Vec<_>>>()?;
    let fitted = PointCloud::fit(pts.clone(), crate::trace_space::DEFAULT_RADIUS_RATIO)?;
    let inner = 1.05 * fitted.inner_radius();
    let inner = if inner > 0.0 { inner } else { 0.0 };
    let radius = if inner > 0.0 { crate::trace_space::DEFAULT_RADIUS_RATIO * inner } else { 1.0 };
    let d = crate::polynomials::Polydisk::new(fitted.enclosing().center.clone(), radius)?;
    PointCloud::with_inner_radius(pts, d, inner)
}

/// Polynomial in `x` obtained from `P(x, y, w)` on the graph, with the bound
/// on `|P(x, h(x), H(x)) − Q(x)|` for `|x − center|_∞ ≤ δ`.
#[derive(Clone, Debug, PartialEq)]
pub struct ReducedPoly {
    pub poly: ComplexPoly,
    pub remainder_bound: f64,
}

/// Substitutes degree-`N` Taylor jets of `h` and `H` at `center` into `P`.
///
/// `P` has `2m + (n − m)` variables ordered `(x, y, w)` and coefficients of
/// modulus at most one. Each monomial `x^λ y^μ w^ν` is a product of
/// `L = |λ|+|μ|+|ν|` factors bounded by `M` on the box with
/// `|∂^α g| ≤ M Ĉ^{|α|} (α!)^s`; its Taylor remainder on the δ-box is at most
/// `M^L Ĉ^{N+1} δ^{N+1} Σ_{|α|=N+1} binom(α+L−1, α) (α!)^{s−1}`.
/// Monomials in `x` alone of degree `≤ N` are reproduced exactly.
pub fn reduce_on_graph(p: &ComplexPoly, g: &GevreyGraph, center: &[f64], big_n: u32, delta: f64) -> Result<ReducedPoly> {
    let m = g.m;
    let nv = 2 * m + (g.n - m);
    if p.nvars() != nv {
        return Err(Error::DimensionMismatch { expected: nv, got: p.nvars() });
    }
    if center.len() != m {
        return Err(Error::DimensionMismatch { expected: m, got: center.len() });
    }
    if !(delta > 0.0) {
        return Err(invalid("delta must be positive"));
    }
    if let Some((a, c)) = p.terms().iter().find(|(_, c)| c.norm() > 1.0) {
        return Err(Error::Precondition(format!("coefficient {c} of {:?} exceeds 1 in modulus", a.0)));
    }
    let lay = JetLayout::new(m, big_n);
    let mut factors: Vec<Jet<Complex64>> = (0..m).map(|j| Jet::variable(&lay, j, Complex64::new(center[j], 0.0))).collect();
    for f in g.functions() {
        factors.push(f.function.jet_f64(center, big_n)?.to_complex());
    }
    let mut jet = Jet::zero(&lay);
    for (alpha, c) in p.terms() {
        let mut t = Jet::constant(&lay, *c);
        for (v, &e) in alpha.0.iter().enumerate() {
            if e > 0 {
                t = t.mul(&factors[v].power(e))?;
            }
        }
        jet = jet.add(&t)?;
    }
    let u_poly = ComplexPoly::from_terms(m, lay.monomials.iter().cloned().zip(jet.coeffs.iter().copied()))?;
    let shift: Vec<ComplexPoly> = (0..m)
        .map(|j| ComplexPoly::var(m, j).sub(&ComplexPoly::constant(m, Complex64::new(center[j], 0.0))).expect("same nvars"))
        .collect();
    let poly = u_poly.compose(&shift)?;

    // remainder
    let needs = p.terms().iter().any(|(a, _)| a.0[m..].iter().any(|&e| e > 0) || a.degree() > big_n);
    let remainder_bound = if !needs {
        0.0
    } else {
        let order = big_n + 1;
        let samples = box_grid(&g.domain, DEFAULT_CALIBRATION_SAMPLES);
        // per variable: sup |g| and the smallest Ĉ with |∂^α g| ≤ M Ĉ^{|α|} (α!)^s
        let mut bounds: Vec<(f64, f64)> = g
            .domain
            .iter()
            .map(|&[lo, hi]| {
                let mx = lo.abs().max(hi.abs());
                (mx, if mx > 0.0 { 1.0 / mx } else { 0.0 })
            })
            .collect();
        for f in g.functions() {
            let mut mx: f64 = 0.0;
            let mut logs = Vec::with_capacity(samples.len());
            for x in &samples {
                let l = f.function.derivative_logs(x, order)?;
                if let Some(v) = l[0].1 {
                    mx = mx.max(v.exp());
                }
                logs.push(l);
            }
            let mut c_hat: f64 = 0.0;
            if mx > 0.0 {
                for (alpha, lg) in logs.iter().flatten() {
                    let d = alpha.degree();
                    if let (true, Some(lg)) = (d > 0, lg) {
                        let v = ((lg - mx.ln() - g.s * ln_factorial_multi(alpha)) / d as f64).exp();
                        c_hat = c_hat.max(v * CALIBRATION_MARGIN);
                    }
                }
            }
            bounds.push((mx, c_hat));
        }
        let alphas = MultiIndex::of_degree(m, order);
        let mut total = 0.0;
        for (a, c) in p.terms() {
            let l = a.degree() as u64;
            if l == 0 {
                continue;
            }
            let pure_x = a.0[m..].iter().all(|&e| e == 0);
            if pure_x && a.degree() <= big_n {
                continue;
            }
            let mut log_m = 0.0;
            let mut c_hat: f64 = 0.0;
            let mut zero = false;
            for (v, &e) in a.0.iter().enumerate() {
                if e == 0 {
                    continue;
                }
                let (mx, ch) = bounds[v];
                if mx == 0.0 {
                    zero = true;
                    break;
                }
                log_m += e as f64 * mx.ln();
                c_hat = c_hat.max(ch);
            }
            if zero || c_hat == 0.0 {
                continue;
            }
            let sum: f64 = alphas
                .iter()
                .map(|al| (big_ln(&al.binom_shift(l)) + (g.s - 1.0) * ln_factorial_multi(al)).exp())
                .sum();
            total += c.norm() * (log_m + order as f64 * (c_hat * delta).ln()).exp() * sum;
        }
        total
    };
    Ok(ReducedPoly { poly, remainder_bound })
}

/// `log(C^{N+1} δ^N Σ_{|α|=N+1} binom(α+N−1, α) (α!)^{s−1})` over multi-indices
/// in `m` variables, with `δ = N^{1−t}`.
///
/// The sum is exact in big integers when `s` is an integer. Behaves like
/// `(s − t) N log N` as `N` grows.
pub fn remainder_log_estimate(s: f64, t: f64, big_n: u32, c: f64, delta: f64, m: usize) -> Result<f64> {
    if !(t > s && s >= 1.0) {
        return Err(invalid("requires t > s >= 1"));
    }
    if big_n < 1 || m < 1 {
        return Err(invalid("requires N >= 1 and m >= 1"));
    }
    let expected = (big_n as f64).powf(1.0 - t);
    if (delta - expected).abs() > 1e-9 * expected {
        return Err(invalid(format!("delta must equal N^(1-t) = {expected}")));
    }
    if c == 0.0 {
        return Ok(f64::NEG_INFINITY);
    }
    if !(c > 0.0) {
        return Err(invalid("C must be nonnegative"));
    }
    let alphas = MultiIndex::of_degree(m, big_n + 1);
    let log_sum = if s.fract() == 0.0 {
        let e = s as u32 - 1;
        let mut sum = BigUint::zero();
        for a in &alphas {
            let mut term = a.binom_shift(big_n as u64);
            let f = a.factorial();
            for _ in 0..e {
                term *= &f;
            }
            sum += term;
        }
        big_ln(&sum)
    } else {
        let logs: Vec<f64> = alphas
            .iter()
            .map(|a| big_ln(&a.binom_shift(big_n as u64)) + (s - 1.0) * ln_factorial_multi(a))
            .collect();
        let mx = logs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        mx + logs.iter().map(|l| (l - mx).exp()).sum::<f64>().ln()
    };
    Ok((big_n as f64 + 1.0) * c.ln() + big_n as f64 * delta.ln() + log_sum)
}

/// `1/(1 + x²)` as a rational family description.
pub fn one_over_one_plus_x2() -> FamilyKind {
    let num = IntPoly::constant(1, BigInt::one());
    let den = Poly::from_terms(1, vec![(MultiIndex(vec![0]), BigInt::one()), (MultiIndex(vec![2]), BigInt::one())]).expect("valid");
    FamilyKind::AnalyticRational { num, den }
}

/// The zero function of `m` variables.
pub fn zero_family(m: usize) -> FamilyKind {
    FamilyKind::AnalyticRational { num: IntPoly::zero(m), den: IntPoly::constant(m, BigInt::one()) }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rat(n: i64, d: i64) -> BigRational {
        BigRational::new(BigInt::from(n), BigInt::from(d))
    }

    #[test]
    fn product_of_conjugates() {
        let lay = JetLayout::new(1, 4);
        let x = Jet::variable(&lay, 0, rat(0, 1));
        let one = Jet::constant(&lay, rat(1, 1));
        let p = one.add(&x).unwrap().mul(&one.sub(&x).unwrap()).unwrap();
        assert_eq!(p.coeffs(), &[rat(1, 1), rat(0, 1), rat(-1, 1), rat(0, 1), rat(0, 1)]);
    }

    #[test]
    fn geometric_series_square() {
        let lay = JetLayout::new(1, 10);
        let x = Jet::variable(&lay, 0, rat(0, 1));
        let g = Jet::constant(&lay, rat(1, 1)).sub(&x).unwrap().reciprocal().unwrap();
        let sq = g.power(2);
        for (k, c) in sq.coeffs().iter().enumerate() {
            assert_eq!(*c, rat(k as i64 + 1, 1));
        }
    }

    #[test]
    fn order_mismatch_is_reported() {
        let a = Jet::constant(&JetLayout::new(1, 3), 1.0);
        let b = Jet::constant(&JetLayout::new(1, 4), 1.0);
        assert!(matches!(a.mul(&b), Err(Error::OrderMismatch(3, 4))));
    }

    #[test]
    fn constant_function_calibrates_to_one() {
        let f = FamilyKind::AnalyticRational { num: IntPoly::constant(1, BigInt::one()), den: IntPoly::constant(1, BigInt::one()) };
        let cal = calibrate_constant(&f, 1.0, &vec![[-1.0, 1.0]], 6, 9).unwrap();
        assert!((cal.c - 1.0).abs() < 1e-9);
    }

    #[test]
    fn pole_detection() {
        let bad = FamilyKind::AnalyticRational {
            num: IntPoly::constant(1, BigInt::one()),
            den: IntPoly::var(1, 0),
        };
        assert!(matches!(make_gevrey_family(1.0, bad, vec![[-1.0, 1.0]], 4), Err(Error::PoleInside)));
    }

    #[test]
    fn sin_composed_with_square() {
        // sin(u) at 0 composed with x^2: sin(x^2) = x^2 - x^6/6 + ...
        let lay = JetLayout::new(1, 8);
        let sin_coeffs: Vec<BigRational> = (0..=8u64)
            .map(|k| match k % 4 {
                1 => BigRational::new(BigInt::one(), BigInt::from(factorial(k))),
                3 => -BigRational::new(BigInt::one(), BigInt::from(factorial(k))),
                _ => rat(0, 1),
            })
            .collect();
        let sin = Jet::from_coeffs(&lay, sin_coeffs).unwrap();
        let x = Jet::variable(&lay, 0, rat(0, 1));
        let out = sin.compose(&[x.power(2)]).unwrap();
        let expect = [rat(0, 1), rat(0, 1), rat(1, 1), rat(0, 1), rat(0, 1), rat(0, 1), rat(-1, 6), rat(0, 1), rat(0, 1)];
        assert_eq!(out.coeffs(), &expect);
    }

    #[test]
    fn rational_power_bound_holds_exactly() {
        let f = make_gevrey_family(1.0, one_over_one_plus_x2(), vec![[-1.0, 1.0]], 8).unwrap();
        let r = check_power_bound(&f, 5, 8).unwrap();
        assert!(r.exact);
        assert!(r.violations.is_empty(), "{:?}", r.violations.first());
        assert!(r.c_used >= 1.0 && r.c_used >= r.c_calibrated);
    }

    #[test]
    fn power_bound_rejects_large_values() {
        let two = FamilyKind::AnalyticRational { num: IntPoly::constant(1, BigInt::from(2)), den: IntPoly::constant(1, BigInt::one()) };
        let f = make_gevrey_family(1.0, two, vec![[0.0, 1.0]], 4).unwrap();
        assert!(matches!(check_power_bound(&f, 2, 4), Err(Error::Precondition(_))));
    }

    #[test]
    fn lacunary_bound_matches_jet_at_zero() {
        let terms = lacunary_terms_for(2.0, 12);
        let f = FamilyKind::LacunaryCosine { s_gen: 2.0, terms };
        let j = f.jet_f64(&[0.0], 12).unwrap();
        for k in [0u32, 2, 4, 8, 12] {
            let d = j.coeffs()[k as usize].abs() * factorial(k as u64).to_f64().unwrap();
            let b = lacunary_derivative_bound(2.0, terms, k);
            assert!((d - b).abs() <= 1e-12 * b, "k={k} {d} {b}");
        }
    }

    #[test]
    fn lacunary_growth_separates_orders() {
        let terms = lacunary_terms_for(2.0, 12);
        let ok = validate_growth(&lacunary_per_order(2.0, terms, 2.0, 12), 2.0).unwrap();
        let bad = validate_growth(&lacunary_per_order(2.0, terms, 1.0, 12), 1.0).unwrap();
        assert!(ok.passes, "{}", ok.growth_exponent);
        assert!(!bad.passes, "{}", bad.growth_exponent);
    }

    #[test]
    fn sampled_growth_agrees_with_closed_form() {
        let f = make_gevrey_family(2.0, FamilyKind::LacunaryCosine { s_gen: 2.0, terms: 0 }, vec![[-0.5, 0.5]], 12).unwrap();
        let FamilyKind::LacunaryCosine { terms, .. } = f.function else { unreachable!() };
        let closed = lacunary_per_order(2.0, terms, 2.0, 12);
        // the grid contains x = 0 where even orders attain the bound
        assert!((f.calibration.per_order[12] / closed[12] - 1.0).abs() < 1e-9);
    }

    fn flat_graph() -> GevreyGraph {
        let h = make_gevrey_family(1.0, zero_family(1), vec![[-0.25, 0.25]], 6).unwrap();
        let big_h = make_gevrey_family(1.0, zero_family(1), vec![[-0.25, 0.25]], 6).unwrap();
        GevreyGraph::new(1, 2, 1.0, vec![h], vec![big_h], vec![0.0], vec![[-0.25, 0.25]]).unwrap()
    }

    fn exp_graph() -> GevreyGraph {
        let d = vec![[0.0, 0.25]];
        let h = make_gevrey_family(1.0, zero_family(1), d.clone(), 12).unwrap();
        let e = make_gevrey_family(1.0, FamilyKind::Exponential { rate: vec![1.0] }, d.clone(), 12).unwrap();
        GevreyGraph::new(1, 2, 1.0, vec![h], vec![e], vec![0.0], d).unwrap()
    }

    #[test]
    fn reduce_keeps_x_polynomials() {
        let g = flat_graph();
        // variables (x, y, w)
        let p = ComplexPoly::var(3, 0).pow(3).scale(&Complex64::new(0.5, 0.0));
        let r = reduce_on_graph(&p, &g, &[0.1], 5, 0.1).unwrap();
        assert_eq!(r.remainder_bound, 0.0);
        let want = ComplexPoly::var(1, 0).pow(3).scale(&Complex64::new(0.5, 0.0));
        for (a, c) in want.terms() {
            assert!((r.poly.coeff(a) - c).norm() < 1e-12);
        }
    }

    #[test]
    fn reduce_on_flat_graph_kills_y() {
        let g = flat_graph();
        let r = reduce_on_graph(&ComplexPoly::var(3, 1), &g, &[0.0], 4, 0.1).unwrap();
        assert!(r.poly.terms().values().all(|c| c.norm() < 1e-15));
        assert_eq!(r.remainder_bound, 0.0);
    }

    #[test]
    fn reduce_w_gives_taylor_polynomial_of_exp() {
        let g = exp_graph();
        let n = 6;
        let delta = 0.125;
        let c = 0.125;
        let r = reduce_on_graph(&ComplexPoly::var(3, 2), &g, &[c], n, delta).unwrap();
        let mut worst: f64 = 0.0;
        for i in 0..=20 {
            let x = c - delta + 2.0 * delta * i as f64 / 20.0;
            let q = r.poly.evaluate(&[Complex64::new(x, 0.0)]).unwrap();
            worst = worst.max((q.re - x.exp()).abs());
        }
        assert!(worst > 0.0);
        assert!(worst <= r.remainder_bound, "{worst} > {}", r.remainder_bound);
        assert!(r.remainder_bound < 1e-3);
    }

    #[test]
    fn reduce_rejects_large_coefficients() {
        let g = flat_graph();
        let p = ComplexPoly::var(3, 0).scale(&Complex64::new(2.0, 0.0));
        assert!(matches!(reduce_on_graph(&p, &g, &[0.0], 3, 0.1), Err(Error::Precondition(_))));
    }

    #[test]
    fn remainder_estimate_one_variable_closed_form() {
        // m = 1, s = 1: the sum is binom(2N, N+1)
        let n = 10u32;
        let delta = (n as f64).powf(-1.0);
        let got = remainder_log_estimate(1.0, 2.0, n, 1.0, delta, 1).unwrap();
        let want = -(n as f64) * (n as f64).ln() + crate::polynomials::binomial(20, 11).to_f64().unwrap().ln();
        assert!((got - want).abs() < 1e-9);
    }

    #[test]
    fn remainder_estimate_rate() {
        let r: Vec<f64> = [20u32, 40, 80, 160]
            .iter()
            .map(|&n| {
                let nf = n as f64;
                remainder_log_estimate(1.0, 2.0, n, 1.0, nf.powf(-1.0), 1).unwrap() / (nf * nf.ln())
            })
            .collect();
        for w in r.windows(2) {
            assert!(w[1] < w[0]);
        }
        // -1 + 2 ln 2 / ln N up to O(1/(N log N)) terms
        for (&n, v) in [20u32, 40, 80, 160].iter().zip(&r) {
            let approx = -1.0 + 2.0 * std::f64::consts::LN_2 / (n as f64).ln();
            assert!((v - approx).abs() < 0.05, "{n}: {v} vs {approx}");
        }
    }

    #[test]
    fn remainder_estimate_zero_constant() {
        assert_eq!(remainder_log_estimate(1.0, 2.0, 5, 0.0, 5f64.powf(-1.0), 1).unwrap(), f64::NEG_INFINITY);
        assert!(remainder_log_estimate(2.0, 2.0, 5, 1.0, 1.0, 1).is_err());
    }

    #[test]
    fn graph_json_round_trip() {
        let g = exp_graph();
        let v = serde_json::to_value(&g).unwrap();
        let back: GevreyGraph = serde_json::from_value(v).unwrap();
        assert_eq!(back, g);
    }

    #[test]
    fn sampled_graph_has_expected_shape() {
        let g = exp_graph();
        let cloud = sample_graph(&g, 9).unwrap();
        assert_eq!(cloud.len(), 9);
        assert_eq!(cloud.ambient_dim(), 2);
        assert!(g.first_order_vanishes(1e-12).unwrap() == false);
        assert!(flat_graph().first_order_vanishes(1e-12).unwrap());
    }
}
