//! Integer polynomials that are exponentially small on a point cloud.
//!
//! A certificate is an integer polynomial `P` of degree at most `N` with
//! `max |coeff| ≤ exp(N^h)` and `sup_X |P| < exp(−N^h)`, normalized by
//! `sup_D |P| ≥ 1` on a reference polydisk. Verification uses directed
//! rounding only, so a certificate never passes by rounding luck.

use std::collections::HashMap;
use std::time::{Duration, Instant};

use num_bigint::{BigInt, BigUint, Sign};
use num_complex::Complex64;
use num_traits::{One, ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::dyadic::{self, ComplexInterval, Dyadic, Interval, Round, EXACT};
use crate::error::{invalid, Error, Result};
use crate::lattice::{lll_reduce, DEFAULT_DELTA};
use crate::polynomials::{binomial, IntPoly, MultiIndex, Polydisk};
use crate::trace_space::PointCloud;

/// Parameters of the counting argument at degree `N`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PigeonholeParams {
    /// `T = ⌊exp(N^h)⌋`, the top of the coefficient alphabet `{1, …, T}`.
    pub t: String,
    pub ln_t: f64,
    /// Number of monomials `binom(N+n, n)`.
    pub monomials: u64,
    /// `ln M` with `M = T^{binom(N+n, n)}` candidates.
    pub ln_m: f64,
    /// `M` in decimal when it has at most `EXACT_M_DIGITS_LIMIT` bits.
    pub m_exact: Option<String>,
    /// `ε = ½ exp(−2N^h − N ln R − n ln N)`.
    pub eps: f64,
    pub ln_eps: f64,
    /// `1 / (N^n R^N exp(N^h))`.
    pub normalizer: f64,
    pub ln_normalizer: f64,
}

/// Largest `M` (in bits) that [`pigeonhole_params`] writes out exactly.
pub const EXACT_M_BITS_LIMIT: u64 = 1 << 16;

fn interval_n_pow_h(big_n: u32, h: f64, prec: u64) -> Result<Interval> {
    let hi = Interval::from_f64(h).ok_or_else(|| invalid("h must be finite"))?;
    if big_n == 0 {
        return Err(invalid("degree must be at least 1"));
    }
    Ok(dyadic::pow_int_base(big_n as u64, &hi, prec))
}

fn floor_int(d: &Dyadic) -> BigInt {
    let e = d.exponent();
    if e >= 0 {
        d.mantissa() << (e as usize)
    } else {
        d.mantissa() >> ((-e) as usize)
    }
}

/// `⌊exp(N^h)⌋`, with the enclosure refined until the floor is decided.
pub fn coefficient_ceiling(big_n: u32, h: f64) -> Result<BigInt> {
    let mut prec = 128;
    while prec <= 1 << 14 {
        let nh = interval_n_pow_h(big_n, h, prec)?;
        let e = dyadic::exp(&nh, prec);
        let (a, b) = (floor_int(&e.lo), floor_int(&e.hi));
        if a == b {
            return Ok(a);
        }
        prec *= 2;
    }
    Err(Error::InsufficientPrecision("exp(N^h) too close to an integer".into()))
}

fn ln_big(v: &BigInt) -> f64 {
    Dyadic::from_bigint(v).ln_abs_approx()
}

/// Parameters `T`, `M`, `ε` and the normalizer of the counting argument.
pub fn pigeonhole_params(big_n: u32, h: f64, n: usize, big_r: f64) -> Result<PigeonholeParams> {
    if !(h > 1.0) {
        return Err(invalid("requires h > 1"));
    }
    if !(big_r > 1.0) {
        return Err(invalid("requires R > 1"));
    }
    if n == 0 {
        return Err(invalid("requires n >= 1"));
    }
    let t = coefficient_ceiling(big_n, h)?;
    let ln_t = ln_big(&t);
    let monomials = binomial(big_n as u64 + n as u64, n as u64)
        .to_u64()
        .ok_or_else(|| invalid("too many monomials"))?;
    let ln_m = monomials as f64 * ln_t;
    let m_exact = if t.bits() * monomials <= EXACT_M_BITS_LIMIT {
        Some(num_traits::pow(t.clone(), monomials as usize).to_string())
    } else {
        None
    };
    let nh = (big_n as f64).powf(h);
    let ln_n = (big_n as f64).ln();
    let ln_eps = -std::f64::consts::LN_2 - 2.0 * nh - big_n as f64 * big_r.ln() - n as f64 * ln_n;
    let ln_normalizer = -(n as f64 * ln_n + big_n as f64 * big_r.ln() + nh);
    Ok(PigeonholeParams {
        t: t.to_string(),
        ln_t,
        monomials,
        ln_m,
        m_exact,
        eps: ln_eps.exp(),
        ln_eps,
        normalizer: ln_normalizer.exp(),
        ln_normalizer,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Strategy {
    Exhaustive,
    PigeonholeMeet,
    LatticeReduce,
}

/// A verified small integer polynomial.
#[derive(Clone, Debug, PartialEq)]
pub struct SmallPolyCertificate {
    pub poly: IntPoly,
    /// Degree bound `N`.
    pub degree_bound: u32,
    pub h: f64,
    pub coeff_max: BigInt,
    /// Directed upper bound on `sup_X |P|`.
    pub sup_x_upper: f64,
    /// Directed lower bound on `sup_D |P|`.
    pub sup_d_lower: f64,
    /// `−N^h`, the log of the target `exp(−N^h)`.
    pub ln_target: f64,
    pub precision_bits: u64,
    pub strategy: Strategy,
}

impl SmallPolyCertificate {
    /// `−ln sup_X |P|` rounded down, so that `exp(−decay)` still bounds the
    /// certified supremum (infinite when `P` vanishes on `X`).
    pub fn decay(&self) -> f64 {
        let a = -self.sup_x_upper.ln();
        a - 1e-12 * a.abs().max(1.0)
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "poly": self.poly.to_json(),
            "N": self.degree_bound,
            "h": self.h,
            "coeff_max": self.coeff_max.to_string(),
            "sup_x_upper": self.sup_x_upper,
            "sup_d_lower": self.sup_d_lower,
            "ln_target": self.ln_target,
            "precision_bits": self.precision_bits,
            "strategy": self.strategy,
        })
    }

    pub fn from_json(v: &serde_json::Value) -> Result<Self> {
        let get = |k: &str| v.get(k).ok_or_else(|| invalid(format!("certificate missing {k:?}")));
        let num = |k: &str| -> Result<f64> { get(k)?.as_f64().ok_or_else(|| invalid(format!("{k:?} must be a number"))) };
        let coeff_max: BigInt = get("coeff_max")?
            .as_str()
            .ok_or_else(|| invalid("coeff_max must be a decimal string"))?
            .parse()
            .map_err(|_| invalid("bad coeff_max"))?;
        Ok(SmallPolyCertificate {
            poly: IntPoly::from_json(get("poly")?)?,
            degree_bound: get("N")?.as_u64().ok_or_else(|| invalid("N must be an integer"))? as u32,
            h: num("h")?,
            coeff_max,
            sup_x_upper: num("sup_x_upper")?,
            sup_d_lower: num("sup_d_lower")?,
            ln_target: num("ln_target")?,
            precision_bits: get("precision_bits")?.as_u64().ok_or_else(|| invalid("precision_bits must be an integer"))?,
            strategy: serde_json::from_value(get("strategy")?.clone())?,
        })
    }
}

/// Outcome of [`verify_report`].
#[derive(Clone, Debug, PartialEq)]
pub struct Verification {
    pub passed: bool,
    pub failures: Vec<String>,
    pub coeff_max: BigInt,
    pub sup_x_upper: f64,
    pub sup_d_lower: f64,
}

/// Smallest precision accepted for degree `N` and exponent `h`.
pub fn required_precision(big_n: u32, h: f64) -> u64 {
    (2.0 * (big_n as f64).powf(h) / std::f64::consts::LN_2).ceil() as u64
}

/// Directed bounds on `sup_X |P|²`.
fn sup_sqr_on_cloud(p: &IntPoly, x: &PointCloud, prec: u64) -> Result<(Dyadic, Dyadic)> {
    let mut hi = Dyadic::zero();
    let mut lo = Dyadic::zero();
    for z in x.points() {
        let zi: Vec<ComplexInterval> = z
            .iter()
            .map(|c| ComplexInterval::from_f64(c.re, c.im).ok_or_else(|| invalid("non-finite point")))
            .collect::<Result<_>>()?;
        let v = p.evaluate_interval(&zi, prec)?;
        hi = hi.max(v.norm_sqr_upper());
        lo = lo.max(v.norm_sqr_lower());
    }
    Ok((lo, hi))
}

/// Directed lower bound on `sup_D |P|`: Parseval when `D` is centered at the
/// origin, otherwise interval values on a torus grid.
fn sup_on_reference_lower(p: &IntPoly, d: &Polydisk, prec: u64) -> Result<Dyadic> {
    if p.nvars() != d.dim() {
        return Err(Error::DimensionMismatch { expected: d.dim(), got: p.nvars() });
    }
    let mut best = Dyadic::zero();
    if d.center.iter().all(|c| *c == Complex64::new(0.0, 0.0)) {
        // mean of |P|² over the torus
        let r2 = Dyadic::from_f64(d.radius * d.radius).ok_or_else(|| invalid("radius"))?;
        let r2 = r2.round(prec, Round::Down);
        let mut s = Dyadic::zero();
        for (a, c) in p.terms() {
            let mut t = Dyadic::from_bigint(&(c * c));
            for _ in 0..a.degree() {
                t = t.mul(&r2).round(prec, Round::Down);
            }
            s = s.add(&t);
        }
        best = s;
    } else {
        let shrink = d.radius * (1.0 - 2f64.powi(-40));
        let inner = Polydisk::new(d.center.clone(), shrink)?;
        let per = (64.0f64).powf(1.0 / d.dim() as f64).ceil().max(4.0) as usize;
        let mut angles = vec![0usize; d.dim()];
        loop {
            let th: Vec<f64> = angles.iter().map(|&k| 2.0 * std::f64::consts::PI * k as f64 / per as f64).collect();
            let z = inner.torus_point(&th);
            let zi: Vec<ComplexInterval> = z.iter().map(|c| ComplexInterval::from_f64(c.re, c.im).expect("finite")).collect();
            best = best.max(p.evaluate_interval(&zi, prec)?.norm_sqr_lower());
            let mut i = 0;
            loop {
                if i == angles.len() {
                    return Ok(best);
                }
                angles[i] += 1;
                if angles[i] < per {
                    break;
                }
                angles[i] = 0;
                i += 1;
            }
        }
    }
    Ok(best)
}

/// Checks every certificate condition with directed rounding at `prec` bits.
///
/// Returns `InsufficientPrecision` when an enclosure straddles a threshold.
pub fn verify_report(p: &IntPoly, big_n: u32, h: f64, x: &PointCloud, d: &Polydisk, prec: u64) -> Result<Verification> {
    if x.is_empty() {
        return Err(Error::EmptySpace);
    }
    if p.nvars() != x.ambient_dim() {
        return Err(Error::DimensionMismatch { expected: x.ambient_dim(), got: p.nvars() });
    }
    let mut failures = Vec::new();
    if p.is_zero() || p.is_constant() {
        failures.push("non-constant polynomial required".to_string());
    }
    if p.degree() > big_n {
        failures.push(format!("degree {} exceeds N = {big_n}", p.degree()));
    }
    let nh = interval_n_pow_h(big_n, h, prec)?;
    let coeff_max = p.coeff_max();
    let bound = dyadic::exp(&nh, prec);
    let cm = Dyadic::from_bigint(&coeff_max);
    if cm > bound.hi {
        failures.push(format!("max |coeff| = {coeff_max} exceeds exp(N^h)"));
    } else if cm > bound.lo {
        return Err(Error::InsufficientPrecision("coefficient bound undecided".into()));
    }
    let target_sqr = dyadic::exp(&nh.mul_pow2(1).neg(), prec);
    let (s_lo, s_hi) = sup_sqr_on_cloud(p, x, prec)?;
    if s_hi >= target_sqr.lo {
        if s_lo >= target_sqr.hi {
            failures.push("sup over X is not below exp(-N^h)".to_string());
        } else {
            return Err(Error::InsufficientPrecision(format!("sup over X undecided at {prec} bits")));
        }
    }
    let d_sqr = sup_on_reference_lower(p, d, prec)?;
    if d_sqr < Dyadic::one() {
        failures.push("sup over the reference polydisk below 1".to_string());
    }
    let sup_x_upper = if s_hi.is_zero() { 0.0 } else { s_hi.to_f64_dir(Round::Up).sqrt().next_up() };
    let sup_d_lower = if d_sqr.is_zero() { 0.0 } else { d_sqr.to_f64_dir(Round::Down).sqrt().next_down().max(0.0) };
    Ok(Verification { passed: failures.is_empty(), failures, coeff_max, sup_x_upper, sup_d_lower })
}

/// Re-verifies a certificate against `X` and `D` at `prec` bits.
pub fn verify_certificate(cert: &SmallPolyCertificate, x: &PointCloud, d: &Polydisk, prec: u64) -> Result<bool> {
    let v = verify_report(&cert.poly, cert.degree_bound, cert.h, x, d, prec)?;
    Ok(v.passed && v.coeff_max == cert.coeff_max)
}

#[derive(Clone, Debug, PartialEq)]
pub struct SearchConfig {
    pub strategy: Strategy,
    /// Degree bound `N`.
    pub degree: u32,
    pub h: f64,
    /// Coefficient range `{−B..B}` for the exhaustive strategy.
    pub coeff_bound: u64,
    pub precision_bits: u64,
    pub max_candidates: u64,
    pub time_budget: Option<Duration>,
    pub seed: u64,
    /// Reference polydisk `D`; the unit polydisk at the origin when absent.
    pub reference: Option<Polydisk>,
    pub threads: usize,
    /// Lattice strategy: keep reducing past the balance point while the
    /// coefficient bound allows, returning the certificate of largest decay.
    pub maximize_decay: bool,
}

impl SearchConfig {
    pub fn new(strategy: Strategy, degree: u32, h: f64) -> Self {
        SearchConfig {
            strategy,
            degree,
            h,
            coeff_bound: 1,
            precision_bits: required_precision(degree, h).max(128),
            max_candidates: 10_000_000,
            time_budget: None,
            seed: 0,
            reference: None,
            threads: std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1),
            maximize_decay: true,
        }
    }
}

/// Why a search returned nothing.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NotFound {
    pub strategy: Strategy,
    pub degree: u32,
    pub h: f64,
    pub candidates_tried: u64,
    /// Smallest `ln sup_X |P|` seen among non-constant candidates.
    pub best_ln_sup: Option<f64>,
    /// `ln M` against `ln` of the number of ε-boxes covering the traces.
    pub ln_candidates: f64,
    pub ln_boxes: f64,
    /// The counting argument guarantees a solution on this cloud.
    pub existence_guaranteed: bool,
    pub diagnosis: String,
}

#[derive(Clone, Debug, PartialEq)]
pub enum SearchOutcome {
    Found(SmallPolyCertificate),
    NotFound(NotFound),
}

impl SearchOutcome {
    pub fn certificate(&self) -> Option<&SmallPolyCertificate> {
        match self {
            SearchOutcome::Found(c) => Some(c),
            SearchOutcome::NotFound(_) => None,
        }
    }
}

/// Exact values of every monomial at every point of `X`.
fn monomial_values(x: &PointCloud, monomials: &[MultiIndex]) -> Result<Vec<Vec<ComplexInterval>>> {
    let deg = monomials.iter().map(|a| a.degree()).max().unwrap_or(0) as usize;
    x.points()
        .iter()
        .map(|z| {
            let pw: Vec<Vec<ComplexInterval>> = z
                .iter()
                .map(|c| {
                    let base = ComplexInterval::from_f64(c.re, c.im).expect("finite");
                    let mut v = vec![ComplexInterval::one()];
                    for k in 1..=deg {
                        let next = v[k - 1].mul(&base, EXACT);
                        v.push(next);
                    }
                    v
                })
                .collect();
            Ok(monomials
                .iter()
                .map(|a| {
                    let mut t = ComplexInterval::one();
                    for (j, &e) in a.0.iter().enumerate() {
                        if e > 0 {
                            t = t.mul(&pw[j][e as usize], EXACT);
                        }
                    }
                    t
                })
                .collect())
        })
        .collect()
}

fn diagnose(x: &PointCloud, cfg: &SearchConfig, tried: u64, best: Option<f64>) -> Result<NotFound> {
    let n = x.ambient_dim();
    let r = cfg.reference.as_ref().map(|d| d.radius).unwrap_or(1.0).max(1.0 + 1e-9);
    let params = pigeonhole_params(cfg.degree, cfg.h.max(1.0 + 1e-9), n, r)?;
    let monomials = MultiIndex::up_to_degree(n, cfg.degree);
    let t = params.ln_t.exp();
    // traces of normalized candidates lie in a box of half-side q_max per real coordinate
    let mut q_max: f64 = 0.0;
    for z in x.points() {
        let s: f64 = monomials
            .iter()
            .map(|a| a.0.iter().zip(z).map(|(&e, c)| c.norm().powi(e as i32)).product::<f64>())
            .sum();
        q_max = q_max.max(s * t * params.normalizer);
    }
    let ln_boxes = 2.0 * x.len() as f64 * (2.0 * q_max / params.eps + 1.0).ln();
    let guaranteed = params.ln_m > ln_boxes;
    let diagnosis = if guaranteed {
        "existence guaranteed by counting; search budget exhausted".to_string()
    } else {
        "counting does not guarantee existence; N may be below the threshold for h".to_string()
    };
    Ok(NotFound {
        strategy: cfg.strategy,
        degree: cfg.degree,
        h: cfg.h,
        candidates_tried: tried,
        best_ln_sup: best,
        ln_candidates: params.ln_m,
        ln_boxes,
        existence_guaranteed: guaranteed,
        diagnosis,
    })
}

fn certificate_from(p: IntPoly, x: &PointCloud, d: &Polydisk, cfg: &SearchConfig) -> Result<Option<SmallPolyCertificate>> {
    let v = match verify_report(&p, cfg.degree, cfg.h, x, d, cfg.precision_bits) {
        Ok(v) => v,
        Err(Error::InsufficientPrecision(_)) => verify_report(&p, cfg.degree, cfg.h, x, d, 4 * cfg.precision_bits)?,
        Err(e) => return Err(e),
    };
    if !v.passed {
        return Ok(None);
    }
    Ok(Some(SmallPolyCertificate {
        poly: p,
        degree_bound: cfg.degree,
        h: cfg.h,
        coeff_max: v.coeff_max,
        sup_x_upper: v.sup_x_upper,
        sup_d_lower: v.sup_d_lower,
        ln_target: -(cfg.degree as f64).powf(cfg.h),
        precision_bits: cfg.precision_bits,
        strategy: cfg.strategy,
    }))
}

/// Searches for a certificate on `X` with the configured strategy.
pub fn search_small_poly(x: &PointCloud, cfg: &SearchConfig) -> Result<SearchOutcome> {
    if x.is_empty() {
        return Err(Error::EmptySpace);
    }
    if cfg.degree < 1 {
        return Err(invalid("degree bound must be at least 1"));
    }
    let need = required_precision(cfg.degree, cfg.h);
    if cfg.precision_bits < need {
        return Err(Error::InsufficientPrecision(format!("need at least {need} bits, got {}", cfg.precision_bits)));
    }
    let d = match &cfg.reference {
        Some(d) => d.clone(),
        None => Polydisk::origin(x.ambient_dim(), 1.0)?,
    };
    match cfg.strategy {
        Strategy::Exhaustive => exhaustive(x, &d, cfg),
        Strategy::PigeonholeMeet => pigeonhole_meet(x, &d, cfg),
        Strategy::LatticeReduce => lattice_search(x, &d, cfg),
    }
}

/// Upper bound on `ln sup_X |P|` from interval evaluation.
fn ln_sup_upper(p: &IntPoly, x: &PointCloud, prec: u64) -> Result<f64> {
    let (_, hi) = sup_sqr_on_cloud(p, x, prec)?;
    Ok(if hi.is_zero() { f64::NEG_INFINITY } else { 0.5 * hi.ln_abs_approx() })
}

/// `ln sup_X |P|` when floating evaluation can resolve values near `exp(ln_target)`,
/// otherwise the interval bound. `None` when `P` is clearly too large.
fn screen_ln_sup(p: &IntPoly, x: &PointCloud, ln_target: f64, prec: u64) -> Result<Option<f64>> {
    let pc = p.to_complex();
    let mut value: f64 = 0.0;
    let mut noise: f64 = 0.0;
    for z in x.points() {
        value = value.max(pc.evaluate(z)?.norm());
        let mag: f64 = pc
            .terms()
            .iter()
            .map(|(a, c)| c.norm() * a.0.iter().zip(z).map(|(&e, w)| w.norm().powi(e as i32)).product::<f64>())
            .sum();
        noise = noise.max(mag * 1e-13);
    }
    if value - noise > ln_target.exp() {
        return Ok(None);
    }
    if noise < 1e-3 * ln_target.exp() {
        return Ok(Some(value.ln()));
    }
    ln_sup_upper(p, x, prec).map(Some)
}

/// Digit order `0, 1, −1, 2, −2, …`.
fn digit_value(k: u64) -> i64 {
    if k % 2 == 1 {
        k.div_ceil(2) as i64
    } else {
        -((k / 2) as i64)
    }
}

fn exhaustive(x: &PointCloud, d: &Polydisk, cfg: &SearchConfig) -> Result<SearchOutcome> {
    let n = x.ambient_dim();
    let monomials = MultiIndex::up_to_degree(n, cfg.degree);
    let base = 2 * cfg.coeff_bound + 1;
    let count = (base as f64).powi(monomials.len() as i32);
    if count > 1e7 {
        return Err(invalid(format!("exhaustive search over {count:e} candidates exceeds 1e7")));
    }
    let total = (count as u64).min(cfg.max_candidates);
    let ln_target = -(cfg.degree as f64).powf(cfg.h);
    let poly_of = |idx: u64| -> IntPoly {
        let mut rem = idx;
        let terms = monomials.iter().map(|a| {
            let dgt = rem % base;
            rem /= base;
            (a.clone(), BigInt::from(digit_value(dgt)))
        });
        IntPoly::from_terms(n, terms).expect("valid terms")
    };
    let threads = cfg.threads.max(1) as u64;
    let chunk = total.div_ceil(threads).max(1);
    // each worker screens in floating point; hits are verified exactly in index order
    let hits: Vec<(Vec<u64>, Option<f64>)> = std::thread::scope(|s| {
        let handles: Vec<_> = (0..threads)
            .map(|t| {
                let poly_of = &poly_of;
                s.spawn(move || {
                    let mut found = Vec::new();
                    let mut best: Option<f64> = None;
                    for idx in (t * chunk)..((t + 1) * chunk).min(total) {
                        let p = poly_of(idx);
                        if p.is_constant() {
                            continue;
                        }
                        let Ok(Some(l)) = screen_ln_sup(&p, x, ln_target, cfg.precision_bits) else { continue };
                        best = Some(best.map_or(l, |b: f64| b.min(l)));
                        if l < ln_target + 1e-6 {
                            found.push(idx);
                            if found.len() >= 16 {
                                break;
                            }
                        }
                    }
                    (found, best)
                })
            })
            .collect();
        handles.into_iter().map(|h| h.join().expect("worker panicked")).collect()
    });
    let best = hits.iter().filter_map(|h| h.1).reduce(f64::min);
    for idx in hits.iter().flat_map(|h| h.0.iter().copied()) {
        if let Some(c) = certificate_from(poly_of(idx), x, d, cfg)? {
            return Ok(SearchOutcome::Found(c));
        }
    }
    Ok(SearchOutcome::NotFound(diagnose(x, cfg, total, best)?))
}

fn random_below(rng: &mut ChaCha8Rng, t: &BigUint) -> BigUint {
    let words = (t.bits() as usize).div_ceil(32) + 1;
    let digits: Vec<u32> = (0..words).map(|_| rng.gen()).collect();
    BigUint::from_slice(&digits) % t
}

fn pigeonhole_meet(x: &PointCloud, d: &Polydisk, cfg: &SearchConfig) -> Result<SearchOutcome> {
    let n = x.ambient_dim();
    let r = d.radius.max(1.0 + 1e-9);
    let params = pigeonhole_params(cfg.degree, cfg.h.max(1.0 + 1e-9), n, r)?;
    let t: BigUint = params.t.parse().map_err(|_| invalid("bad T"))?;
    let monomials = MultiIndex::up_to_degree(n, cfg.degree);
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let start = Instant::now();
    let mut seen: HashMap<Vec<u64>, IntPoly> = HashMap::new();
    let mut best: Option<f64> = None;
    let mut tried = 0u64;
    while tried < cfg.max_candidates {
        if cfg.time_budget.is_some_and(|b| start.elapsed() > b) {
            break;
        }
        tried += 1;
        // alphabet {1, …, T}
        let terms = monomials
            .iter()
            .map(|a| (a.clone(), BigInt::from_biguint(Sign::Plus, random_below(&mut rng, &t) + 1u32)));
        let p = IntPoly::from_terms(n, terms)?;
        let pc = p.to_complex();
        let mut key = Vec::with_capacity(2 * x.len());
        for z in x.points() {
            let v = pc.evaluate(z)? * params.normalizer;
            key.push((v.re / params.eps).floor().to_bits());
            key.push((v.im / params.eps).floor().to_bits());
        }
        if let Some(q) = seen.get(&key) {
            if *q != p {
                let diff = q.sub(&p)?;
                let l = ln_sup_upper(&diff, x, cfg.precision_bits)?;
                best = Some(best.map_or(l, |b: f64| b.min(l)));
                if let Some(c) = certificate_from(diff, x, d, cfg)? {
                    return Ok(SearchOutcome::Found(c));
                }
            }
            continue;
        }
        seen.insert(key, p);
    }
    Ok(SearchOutcome::NotFound(diagnose(x, cfg, tried, best)?))
}

/// Guard bits kept below the balance point in the lattice columns.
const GUARD_BITS: i64 = 32;
/// Growth of the constraint weight between reduction passes, in bits.
const STAGE_BITS: i64 = 16;
/// Passes past the balance point allowed without improvement.
const PATIENCE: u32 = 3;
/// Reduced rows kept per pass for exact verification.
const PER_STAGE_KEPT: usize = 8;

fn scaled_int(v: &Interval, shift: i64) -> BigInt {
    // exact input, so lo == hi
    floor_int(&v.lo.mul_pow2(shift))
}

fn lattice_search(x: &PointCloud, d: &Polydisk, cfg: &SearchConfig) -> Result<SearchOutcome> {
    let n = x.ambient_dim();
    let monomials = MultiIndex::up_to_degree(n, cfg.degree);
    let dim = monomials.len();
    if dim > 400 {
        return Err(invalid(format!("lattice dimension {dim} too large")));
    }
    let values = monomial_values(x, &monomials)?;
    // constraint columns: real parts, then imaginary parts where present
    let mut columns: Vec<Vec<&Interval>> = Vec::new();
    for row in &values {
        columns.push(row.iter().map(|v| &v.re).collect());
        if row.iter().any(|v| !v.im.lo.is_zero() || !v.im.hi.is_zero()) {
            columns.push(row.iter().map(|v| &v.im).collect());
        }
    }
    let nh_bits = (cfg.degree as f64).powf(cfg.h) / std::f64::consts::LN_2;
    // balance |c| ≤ exp(N^h) against |Vc| < exp(−N^h)
    let final_shift = (2.0 * nh_bits).ceil() as i64 + 4;
    let mut coeffs: Vec<Vec<BigInt>> = (0..dim)
        .map(|i| (0..dim).map(|j| if i == j { BigInt::one() } else { BigInt::zero() }).collect())
        .collect();
    let ln_target = -(cfg.degree as f64).powf(cfg.h);
    let limit = (cfg.degree as f64).powf(cfg.h);
    let start = Instant::now();
    let mut shift = STAGE_BITS.min(final_shift);
    let mut pool: Vec<(f64, IntPoly)> = Vec::new();
    let mut best: Option<f64> = None;
    let mut stages = 0u64;
    let mut stale = 0u32;
    loop {
        let col_ints: Vec<Vec<BigInt>> = columns
            .iter()
            .map(|col| col.iter().map(|v| scaled_int(v, shift + GUARD_BITS)).collect())
            .collect();
        let mut rows: Vec<Vec<BigInt>> = coeffs
            .iter()
            .map(|c| {
                let mut row: Vec<BigInt> = c.iter().map(|v| v << (GUARD_BITS as usize)).collect();
                for col in &col_ints {
                    let mut s = BigInt::zero();
                    for (a, b) in c.iter().zip(col) {
                        if !a.is_zero() {
                            s += a * b;
                        }
                    }
                    row.push(s);
                }
                row
            })
            .collect();
        lll_reduce(&mut rows, DEFAULT_DELTA)?;
        stages += 1;
        coeffs = rows.iter().map(|r| r[..dim].iter().map(|v| v >> (GUARD_BITS as usize)).collect()).collect();
        let out_of_time = cfg.time_budget.is_some_and(|b| start.elapsed() > b);
        if shift >= final_shift {
            // past the balance point: keep raising the weight while rows within
            // the coefficient bound keep getting smaller on X
            let mut stage: Vec<(f64, IntPoly)> = Vec::new();
            for c in &coeffs {
                let p = IntPoly::from_terms(n, monomials.iter().cloned().zip(c.iter().cloned()))?;
                if p.is_constant() || ln_big(&p.coeff_max()) > limit {
                    continue;
                }
                stage.push((ln_sup_upper(&p, x, cfg.precision_bits)?, p));
            }
            stage.sort_by(|a, b| a.0.total_cmp(&b.0));
            stage.truncate(PER_STAGE_KEPT);
            let stage_best = stage.first().map(|c| c.0);
            let improved = match (stage_best, best) {
                (Some(s), Some(b)) => s < b,
                (Some(_), None) => true,
                _ => false,
            };
            if improved {
                best = stage_best;
                stale = 0;
            } else {
                stale += 1;
            }
            let exhausted = stage.is_empty();
            pool.extend(stage);
            if exhausted || stale >= PATIENCE || out_of_time || !cfg.maximize_decay {
                break;
            }
            shift += STAGE_BITS;
        } else {
            if out_of_time {
                break;
            }
            shift = (shift + STAGE_BITS).min(final_shift);
        }
    }
    pool.sort_by(|a, b| a.0.total_cmp(&b.0));
    for (l, p) in pool.iter().take(cfg.max_candidates.min(pool.len() as u64) as usize) {
        if *l > ln_target + 1.0 {
            break;
        }
        if let Some(c) = certificate_from(p.clone(), x, d, cfg)? {
            return Ok(SearchOutcome::Found(c));
        }
    }
    Ok(SearchOutcome::NotFound(diagnose(x, cfg, stages * dim as u64, best)?))
}

/// One member `(k, P_k, a_k)` of a family tested for pluripolarity evidence.
#[derive(Clone, Debug, PartialEq)]
pub struct EvidenceMember {
    pub k: u32,
    pub poly: IntPoly,
    pub a: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EvidenceVerdict {
    /// True iff every bound holds and `a_k/k` is strictly increasing with
    /// last/first ratio at least [`EVIDENCE_RATIO`].
    pub evidence: bool,
    pub ks: Vec<u32>,
    pub ratios: Vec<f64>,
    pub increasing: bool,
    pub growth: f64,
    /// Degrees `k` for which `sup_X |P_k| ≤ exp(−a_k)` failed.
    pub bound_failures: Vec<u32>,
    pub note: String,
}

pub const EVIDENCE_RATIO: f64 = 4.0;

/// Checks `sup_X |P_k| ≤ exp(−a_k)` for each member and the growth of `a_k/k`.
///
/// Each `P_k` must satisfy `sup |P_k| ≥ 1` on the unit polydisk at the origin.
/// The verdict covers the observed range of `k` only.
pub fn certify_pluripolarity_evidence(family: &[EvidenceMember], x: &PointCloud, prec: u64) -> Result<EvidenceVerdict> {
    if family.is_empty() {
        return Err(invalid("empty family"));
    }
    if family.windows(2).any(|w| w[1].k <= w[0].k) {
        return Err(invalid("k values must be strictly increasing"));
    }
    let unit = Polydisk::origin(x.ambient_dim(), 1.0)?;
    let mut bound_failures = Vec::new();
    for m in family {
        if m.k == 0 {
            return Err(invalid("k must be positive"));
        }
        if sup_on_reference_lower(&m.poly, &unit, prec)? < Dyadic::one() {
            return Err(Error::Precondition(format!("P_{} is not normalized on the unit polydisk", m.k)));
        }
        let (lo, hi) = sup_sqr_on_cloud(&m.poly, x, prec)?;
        let target = dyadic::exp(&Interval::from_f64(-2.0 * m.a).ok_or_else(|| invalid("a_k must be finite"))?, prec);
        if hi <= target.lo {
            continue;
        }
        if lo > target.hi {
            bound_failures.push(m.k);
        } else {
            return Err(Error::InsufficientPrecision(format!("bound for k = {} undecided at {prec} bits", m.k)));
        }
    }
    let ratios: Vec<f64> = family.iter().map(|m| m.a / m.k as f64).collect();
    let increasing = ratios.windows(2).all(|w| w[1] > w[0]);
    let growth = ratios[ratios.len() - 1] / ratios[0];
    Ok(EvidenceVerdict {
        evidence: bound_failures.is_empty() && increasing && growth >= EVIDENCE_RATIO,
        ks: family.iter().map(|m| m.k).collect(),
        ratios,
        increasing,
        growth,
        bound_failures,
        note: "finite-range evidence over the listed k, not a limit".to_string(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::polynomials::Poly;

    fn single(z: Vec<Complex64>) -> PointCloud {
        PointCloud::fit(vec![z], 4.0).unwrap()
    }

    fn two_z_minus_one_pow(k: u32) -> IntPoly {
        let p = Poly::from_terms(1, vec![(MultiIndex(vec![1]), BigInt::from(2)), (MultiIndex(vec![0]), BigInt::from(-1))]).unwrap();
        p.pow(k)
    }

    #[test]
    fn params_small_case() {
        let p = pigeonhole_params(2, 1.1, 1, 2.0).unwrap();
        assert_eq!(p.t, "8");
        assert_eq!(p.monomials, 3);
        assert_eq!(p.m_exact.as_deref(), Some("512"));
    }

    #[test]
    fn params_log_matches_exact() {
        for big_n in 1..=6u32 {
            for n in 1..=2usize {
                let p = pigeonhole_params(big_n, 1.5, n, 2.0).unwrap();
                let m: BigInt = p.m_exact.as_ref().unwrap().parse().unwrap();
                assert!((ln_big(&m) - p.ln_m).abs() <= 1e-9 * p.ln_m.max(1.0));
            }
        }
    }

    #[test]
    fn params_eps_decreases() {
        let e: Vec<f64> = (1..=10).map(|k| pigeonhole_params(k, 1.5, 2, 2.0).unwrap().ln_eps).collect();
        assert!(e.windows(2).all(|w| w[1] < w[0]));
        assert!(pigeonhole_params(3, 1.0, 1, 2.0).is_err());
        assert!(pigeonhole_params(3, 1.5, 1, 1.0).is_err());
    }

    #[test]
    fn binomial_power_certificate() {
        let x = single(vec![Complex64::new(0.5, 0.0)]);
        let p = two_z_minus_one_pow(10);
        assert_eq!(p.coeff_max(), BigInt::from(15360));
        let d = Polydisk::origin(1, 1.0).unwrap();
        let v = verify_report(&p, 10, 2.0, &x, &d, 256).unwrap();
        assert!(v.passed, "{:?}", v.failures);
        assert_eq!(v.sup_x_upper, 0.0);
    }

    #[test]
    fn corrupted_coefficient_fails() {
        let x = single(vec![Complex64::new(0.5, 0.0)]);
        let p = two_z_minus_one_pow(10).add(&IntPoly::monomial(MultiIndex(vec![3]), BigInt::one())).unwrap();
        let d = Polydisk::origin(1, 1.0).unwrap();
        let v = verify_report(&p, 10, 2.0, &x, &d, 256).unwrap();
        assert!(!v.passed);
        assert!(v.failures.iter().any(|f| f.contains("sup over X")));
    }

    #[test]
    fn constant_rejected() {
        let x = single(vec![Complex64::new(0.5, 0.0)]);
        let d = Polydisk::origin(1, 1.0).unwrap();
        let v = verify_report(&IntPoly::constant(1, BigInt::from(3)), 4, 2.0, &x, &d, 256).unwrap();
        assert!(v.failures.iter().any(|f| f.contains("non-constant")));
    }

    #[test]
    fn exhaustive_finds_coordinate_at_origin() {
        let x = single(vec![Complex64::new(0.0, 0.0)]);
        let cfg = SearchConfig { threads: 2, ..SearchConfig::new(Strategy::Exhaustive, 1, 2.0) };
        let c = search_small_poly(&x, &cfg).unwrap();
        let cert = c.certificate().expect("found");
        assert_eq!(cert.poly, IntPoly::var(1, 0));
        let d = Polydisk::origin(1, 1.0).unwrap();
        assert!(verify_certificate(cert, &x, &d, 2 * cert.precision_bits).unwrap());
    }

    #[test]
    fn exhaustive_refuses_huge_spaces() {
        let x = single(vec![Complex64::new(0.0, 0.0)]);
        let cfg = SearchConfig { coeff_bound: 10, ..SearchConfig::new(Strategy::Exhaustive, 6, 2.0) };
        assert!(search_small_poly(&x, &cfg).is_err());
    }

    #[test]
    fn precision_floor_enforced() {
        let x = single(vec![Complex64::new(0.0, 0.0)]);
        let cfg = SearchConfig { precision_bits: 8, ..SearchConfig::new(Strategy::Exhaustive, 4, 2.0) };
        assert!(matches!(search_small_poly(&x, &cfg), Err(Error::InsufficientPrecision(_))));
    }

    #[test]
    fn pigeonhole_returns_nonzero_difference() {
        // three points on a line: differences of degree-2 candidates
        let pts = vec![vec![Complex64::new(0.5, 0.0)]];
        let x = PointCloud::fit(pts, 4.0).unwrap();
        let cfg = SearchConfig { max_candidates: 20_000, seed: 3, ..SearchConfig::new(Strategy::PigeonholeMeet, 2, 1.1) };
        match search_small_poly(&x, &cfg).unwrap() {
            SearchOutcome::Found(c) => {
                assert!(!c.poly.is_zero());
                assert!(c.poly.coeff_max() < BigInt::from(8));
            }
            SearchOutcome::NotFound(nf) => panic!("{nf:?}"),
        }
    }

    #[test]
    fn lattice_finds_relation_for_rational_point() {
        let x = single(vec![Complex64::new(0.5, 0.0), Complex64::new(0.25, 0.0)]);
        let cfg = SearchConfig::new(Strategy::LatticeReduce, 2, 1.5);
        let c = search_small_poly(&x, &cfg).unwrap();
        let cert = c.certificate().expect("found");
        let d = Polydisk::origin(2, 1.0).unwrap();
        assert!(verify_certificate(cert, &x, &d, 2 * cert.precision_bits).unwrap());
    }

    #[test]
    fn evidence_verdicts() {
        let x = single(vec![Complex64::new(0.5, 0.0)]);
        let fam = |a: &dyn Fn(u32) -> f64| -> Vec<EvidenceMember> {
            (4..=16).map(|k| EvidenceMember { k, poly: two_z_minus_one_pow(k), a: a(k) }).collect()
        };
        let yes = certify_pluripolarity_evidence(&fam(&|k| (k * k) as f64), &x, 128).unwrap();
        assert!(yes.evidence);
        let no = certify_pluripolarity_evidence(&fam(&|k| 2.0 * k as f64), &x, 128).unwrap();
        assert!(!no.evidence);
        assert!(certify_pluripolarity_evidence(&[], &x, 128).is_err());
    }

    #[test]
    fn certificate_json_round_trip() {
        let x = single(vec![Complex64::new(0.0, 0.0)]);
        let cfg = SearchConfig { threads: 1, ..SearchConfig::new(Strategy::Exhaustive, 1, 2.0) };
        let cert = search_small_poly(&x, &cfg).unwrap().certificate().unwrap().clone();
        let back = SmallPolyCertificate::from_json(&cert.to_json()).unwrap();
        assert_eq!(back, cert);
    }
}
