//! Estimation of the entropy growth exponent Ψ and the predicted bounds for
//! Gevrey graphs.
//!
//! Ψ is the upper limit of `log H_ε / log log(1/ε) − 1` as ε → 0. Over a
//! finite schedule it is estimated by a weighted fit of `log H` against
//! `log(log(1/ε) + c)` (see [`crate::fit::shifted_log_fit`]); the three
//! smallest scales carry double weight. These are finite-range estimates.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::fit::{shifted_log_fit, weighted_line_fit};
use crate::metric_entropy::EntropyReport;
use crate::polynomials::{ComplexPoly, MultiIndex};
use crate::trace_space::{entropy_lower, PointCloud};

/// Scales at which entropies are computed, plus the sampler settings of the
/// lower bound.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EpsSchedule {
    pub eps: Vec<f64>,
    #[serde(default = "default_samples")]
    pub samples: usize,
    #[serde(default)]
    pub seed: u64,
}

fn default_samples() -> usize {
    256
}

impl EpsSchedule {
    /// `count` scales from `eps_max` down to `eps_min`, equally spaced in
    /// `log log(1/ε)`.
    pub fn log_log(eps_max: f64, eps_min: f64, count: usize, samples: usize, seed: u64) -> Result<Self> {
        if !(0.0 < eps_min && eps_min < eps_max && eps_max < 1.0) || count < 2 {
            return Err(invalid("log-log schedule needs 0 < eps_min < eps_max < 1 and count >= 2"));
        }
        let a = (1.0 / eps_max).ln().ln();
        let b = (1.0 / eps_min).ln().ln();
        let eps = (0..count)
            .map(|i| {
                let t = a + (b - a) * i as f64 / (count - 1) as f64;
                (-t.exp()).exp()
            })
            .collect();
        let s = EpsSchedule { eps, samples, seed };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        if self.eps.len() < 4 {
            return Err(Error::InsufficientSchedule { usable: self.eps.len() });
        }
        if self.eps.windows(2).any(|w| !(w[1] < w[0])) {
            return Err(invalid("schedule eps must be strictly decreasing"));
        }
        // the trace space has sup-diameter at most 2
        if !(self.eps[0] < 2.0) || !(self.eps[self.eps.len() - 1] > 0.0) {
            return Err(invalid("schedule eps must lie in (0, 2)"));
        }
        if self.samples == 0 {
            return Err(invalid("samples must be at least 1"));
        }
        Ok(())
    }
}

/// Fit diagnostics for one side of the estimate.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FitDiagnostics {
    /// Fitted exponent `p`; Ψ = p − 1.
    pub exponent: f64,
    pub intercept: f64,
    pub shift: f64,
    pub residuals: Vec<f64>,
    pub rss: f64,
    /// Plain weighted slope of `log H` against `log log(1/ε)`.
    pub raw_slope: f64,
    pub points_used: usize,
}

/// Finite-range estimate of Ψ.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PsiEstimate {
    pub psi_upper: f64,
    pub psi_lower: f64,
    pub fit_upper: FitDiagnostics,
    pub fit_lower: Option<FitDiagnostics>,
    pub eps_range: [f64; 2],
    pub points_used: usize,
    pub rows: Vec<EntropyReport>,
    /// Always true: the estimate is a fit over a finite range of scales.
    pub finite_range: bool,
}

fn fit_side(rows: &[(f64, f64)]) -> Result<FitDiagnostics> {
    let usable: Vec<(f64, f64)> = rows.iter().copied().filter(|&(_, h)| h > 0.0 && h.is_finite()).collect();
    if usable.len() < 4 {
        return Err(Error::InsufficientSchedule { usable: usable.len() });
    }
    let mut sorted = usable.clone();
    sorted.sort_by(|a, b| a.0.total_cmp(&b.0));
    let cutoff = sorted[2.min(sorted.len() - 1)].0;
    let l: Vec<f64> = usable.iter().map(|&(e, _)| (1.0 / e).ln()).collect();
    let y: Vec<f64> = usable.iter().map(|&(_, h)| h.ln()).collect();
    let w: Vec<f64> = usable.iter().map(|&(e, _)| if e <= cutoff { 2.0 } else { 1.0 }).collect();
    let shifted = shifted_log_fit(&l, &y, &w)?;
    let ll: Vec<f64> = l.iter().map(|v| v.ln()).collect();
    let raw = weighted_line_fit(&ll, &y, &w)?;
    Ok(FitDiagnostics {
        exponent: shifted.exponent,
        intercept: shifted.intercept,
        shift: shifted.shift,
        residuals: shifted.residuals,
        rss: shifted.rss,
        raw_slope: raw.slope,
        points_used: usable.len(),
    })
}

/// Ψ from precomputed entropy rows.
///
/// Rows with `h = 0` are dropped. Fewer than four usable upper rows is an
/// error; when the lower side has fewer than four, `psi_lower` is −1 (the
/// value for bounded entropy). `psi_lower` is clamped to `psi_upper`.
pub fn psi_from_reports(rows: Vec<EntropyReport>) -> Result<PsiEstimate> {
    let upper: Vec<(f64, f64)> = rows.iter().map(|r| (r.eps, r.h_upper)).collect();
    let lower: Vec<(f64, f64)> = rows.iter().map(|r| (r.eps, r.h_lower)).collect();
    let fit_upper = fit_side(&upper)?;
    let fit_lower = fit_side(&lower).ok();
    let psi_upper = fit_upper.exponent - 1.0;
    let psi_lower = fit_lower.as_ref().map(|f| f.exponent - 1.0).unwrap_or(-1.0).min(psi_upper);
    let eps_min = rows.iter().map(|r| r.eps).fold(f64::INFINITY, f64::min);
    let eps_max = rows.iter().map(|r| r.eps).fold(0.0, f64::max);
    Ok(PsiEstimate {
        psi_upper,
        psi_lower,
        points_used: fit_upper.points_used,
        fit_upper,
        fit_lower,
        eps_range: [eps_min, eps_max],
        rows,
        finite_range: true,
    })
}

/// Runs the two-sided entropy bounds along the schedule and fits Ψ.
pub fn estimate_psi(x: &PointCloud, sched: &EpsSchedule) -> Result<PsiEstimate> {
    sched.validate()?;
    let rows = entropy_rows(x, sched)?;
    psi_from_reports(rows)
}

/// Entropy reports for every scale of the schedule, computed in parallel
/// threads and returned in schedule order.
pub fn entropy_rows(x: &PointCloud, sched: &EpsSchedule) -> Result<Vec<EntropyReport>> {
    std::thread::scope(|scope| {
        let handles: Vec<_> = sched
            .eps
            .iter()
            .enumerate()
            .map(|(i, &eps)| {
                let seed = sched.seed.wrapping_add(i as u64);
                scope.spawn(move || entropy_lower(x, eps, sched.samples, seed))
            })
            .collect();
        handles.into_iter().map(|h| h.join().expect("entropy worker panicked")).collect()
    })
}

/// Upper bound `m s` on the dimension of an `m`-dimensional graph of
/// Gevrey-`s` functions.
pub fn kdim_gevrey_upper(m: u32, s: f64) -> Result<f64> {
    if m < 1 || !(s >= 1.0) {
        return Err(invalid("requires m >= 1 and s >= 1"));
    }
    Ok(m as f64 * s)
}

/// Whether the dimension bound forces pluripolarity in `C^n` (`m s < n`).
pub fn predicts_pluripolar(m: u32, s: f64, n: u32) -> Result<bool> {
    Ok(kdim_gevrey_upper(m, s)? < n as f64)
}

/// Explicit finite-`N` entropy bound for a Gevrey graph.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GraphEntropyBound {
    pub n: u64,
    pub m: u32,
    pub t: f64,
    pub s: f64,
    pub c: f64,
    /// `N^{1−t}`.
    pub delta: f64,
    /// `(t − s) / 2`.
    pub a: f64,
    /// `ln ε = −a N ln N`.
    pub log_eps: f64,
    /// `(1/δ)^m`.
    pub balls: f64,
    /// `(1/δ)^m · 2 binom(N+m, N) · log(C^N (N!)^{s−1} / ε + 1)`.
    pub h_bound: f64,
    /// `h_bound / (N^{mt+1} log N)`.
    pub normalization: f64,
}

fn ln_factorial(n: u64) -> f64 {
    (2..=n).map(|k| (k as f64).ln()).sum()
}

fn ln_binomial(n: u64, k: u64) -> f64 {
    ln_factorial(n) - ln_factorial(k) - ln_factorial(n - k)
}

/// `log(e^x + 1)` without overflow.
fn ln1p_exp(x: f64) -> f64 {
    if x > 0.0 {
        x + (-x).exp().ln_1p()
    } else {
        x.exp().ln_1p()
    }
}

pub fn graph_entropy_bound(big_n: u64, m: u32, t: f64, s: f64, c: f64) -> Result<GraphEntropyBound> {
    if !(t > s && s >= 1.0) {
        return Err(invalid("requires t > s >= 1"));
    }
    if big_n < 2 {
        return Err(invalid("requires N >= 2"));
    }
    if !(c > 0.0) {
        return Err(invalid("requires C > 0"));
    }
    let nf = big_n as f64;
    let a = (t - s) / 2.0;
    let delta = nf.powf(1.0 - t);
    let log_eps = -a * nf * nf.ln();
    let balls = (1.0 / delta).powi(m as i32);
    let inner = nf * c.ln() + (s - 1.0) * ln_factorial(big_n) - log_eps;
    let h_bound = balls * 2.0 * ln_binomial(big_n + m as u64, big_n).exp() * ln1p_exp(inner);
    let normalization = h_bound / (nf.powf(m as f64 * t + 1.0) * nf.ln());
    Ok(GraphEntropyBound { n: big_n, m, t, s, c, delta, a, log_eps, balls, h_bound, normalization })
}

/// The bound at the smallest `N` whose `ε = N^{−aN}` does not exceed `eps`.
pub fn graph_entropy_bound_for_eps(eps: f64, m: u32, t: f64, s: f64, c: f64) -> Result<GraphEntropyBound> {
    if !(eps > 0.0 && eps < 1.0) {
        return Err(invalid("eps must lie in (0, 1)"));
    }
    if !(t > s) {
        return Err(invalid("requires t > s >= 1"));
    }
    let a = (t - s) / 2.0;
    let target = (1.0 / eps).ln();
    let mut n = 2u64;
    while a * n as f64 * (n as f64).ln() < target {
        n += 1;
    }
    graph_entropy_bound(n, m, t, s, c)
}

/// Outcome of one property check.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PropertyCheck {
    pub name: String,
    pub passed: bool,
    /// Measured difference against the allowed side (positive means violated
    /// by that much before tolerance).
    pub gap: f64,
    pub detail: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HarnessReport {
    pub tolerance: f64,
    pub checks: Vec<PropertyCheck>,
}

impl HarnessReport {
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }
}

/// Default tolerance of the property harness.
pub const HARNESS_TOL: f64 = 0.2;

/// Default polynomial map of the image check: `z ↦ (z_1, …, z_n, z_1²)`.
pub fn default_image_map(n: usize) -> Vec<ComplexPoly> {
    let mut phi: Vec<ComplexPoly> = (0..n).map(|j| ComplexPoly::var(n, j)).collect();
    let mut sq = vec![0; n];
    sq[0] = 2;
    phi.push(ComplexPoly::monomial(MultiIndex(sq), Complex64::new(1.0, 0.0)));
    phi
}

/// Checks subset monotonicity, the union max-rule and the image bound at the
/// level of fitted Ψ.
///
/// The subset is every other point of `x1`; the union is `x1 ∪ x2` inside the
/// polydisk of `x1`; the image uses `phi` (default [`default_image_map`]).
pub fn property_harness(
    x1: &PointCloud,
    x2: &PointCloud,
    sched: &EpsSchedule,
    phi: Option<&[ComplexPoly]>,
) -> Result<HarnessReport> {
    if x1.ambient_dim() != x2.ambient_dim() {
        return Err(Error::DimensionMismatch { expected: x1.ambient_dim(), got: x2.ambient_dim() });
    }
    let tol = HARNESS_TOL;
    let psi1 = estimate_psi(x1, sched)?.psi_upper;
    let psi2 = estimate_psi(x2, sched)?.psi_upper;
    let mut checks = Vec::new();

    let every_other: Vec<usize> = (0..x1.len()).step_by(2).collect();
    let sub = x1.subset(&every_other)?;
    let psi_sub = estimate_psi(&sub, sched)?.psi_upper;
    let gap = psi_sub - psi1;
    checks.push(PropertyCheck {
        name: "subset_monotone".into(),
        passed: gap <= tol,
        gap,
        detail: format!("psi(subset) = {psi_sub:.4}, psi(X1) = {psi1:.4}"),
    });

    let x2_in = PointCloud::new(x2.points().to_vec(), x1.enclosing().clone())?;
    let inner = x1.inner_radius().max(x2_in.inner_radius());
    let union = PointCloud::with_inner_radius(x1.points().to_vec(), x1.enclosing().clone(), inner)?
        .union(&PointCloud::with_inner_radius(x2_in.points().to_vec(), x1.enclosing().clone(), inner)?)?;
    let psi_union = estimate_psi(&union, sched)?.psi_upper;
    let gap = (psi_union - psi1.max(psi2)).abs();
    checks.push(PropertyCheck {
        name: "union_max_rule".into(),
        passed: gap <= tol,
        gap,
        detail: format!("psi(union) = {psi_union:.4}, max(psi) = {:.4}", psi1.max(psi2)),
    });

    let default_phi;
    let phi = match phi {
        Some(p) => p,
        None => {
            default_phi = default_image_map(x1.ambient_dim());
            &default_phi
        }
    };
    let image = x1.apply_poly_map(phi)?;
    let psi_image = estimate_psi(&image, sched)?.psi_upper;
    let gap = psi_image - psi1;
    checks.push(PropertyCheck {
        name: "image_bound".into(),
        passed: gap <= tol,
        gap,
        detail: format!("psi(image) = {psi_image:.4}, psi(X1) = {psi1:.4}"),
    });
    Ok(HarnessReport { tolerance: tol, checks })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn schedule_is_log_log_spaced() {
        let s = EpsSchedule::log_log(1e-2, 1e-5, 6, 8, 1).unwrap();
        assert!((s.eps[0] - 1e-2).abs() < 1e-15 && (s.eps[5] - 1e-5).abs() < 1e-18);
        let ll: Vec<f64> = s.eps.iter().map(|e| (1.0 / e).ln().ln()).collect();
        for w in ll.windows(3) {
            assert!(((w[2] - w[1]) - (w[1] - w[0])).abs() < 1e-12);
        }
        assert!(EpsSchedule { eps: vec![0.1, 0.01, 0.001], samples: 1, seed: 0 }.validate().is_err());
    }

    #[test]
    fn gevrey_dimension_bound() {
        assert_eq!(kdim_gevrey_upper(1, 1.0).unwrap(), 1.0);
        assert!((kdim_gevrey_upper(2, 1.4).unwrap() - 2.8).abs() < 1e-15);
        assert!(predicts_pluripolar(1, 1.0, 2).unwrap());
        assert!(!predicts_pluripolar(2, 1.0, 2).unwrap());
    }

    #[test]
    fn graph_bound_rejects_bad_exponents() {
        assert!(graph_entropy_bound(10, 1, 1.0, 1.0, 2.0).is_err());
        let b = graph_entropy_bound(10, 1, 1.5, 1.0, 2.0).unwrap();
        assert!(b.h_bound.is_finite() && b.h_bound > 0.0);
        let flat = graph_entropy_bound(10, 0, 1.5, 1.0, 2.0).unwrap();
        assert_eq!(flat.balls, 1.0);
    }
}
