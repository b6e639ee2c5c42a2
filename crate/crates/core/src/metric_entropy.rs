//! Covering and packing counts of finite metric spaces.
//!
//! A covering at scale ε is a family of sets of diameter at most 2ε; an
//! ε-distinguishable (packing) set has pairwise distances strictly above ε.
//! Greedy counts give a certified upper bound on the minimal covering number
//! and a certified lower bound on the maximal packing number. Distances are
//! classified with an absolute tolerance of [`DIST_TOL`].
//!
//! The greedy covering count never exceeds the greedy packing count at the
//! same ε. On ℝ^d with the sup metric a set of diameter 2ε holds at most 2^d
//! points that are pairwise more than ε apart, so the greedy count is at most
//! 2^d times the minimal covering number.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

/// Absolute tolerance used when comparing a distance with a threshold.
pub const DIST_TOL: f64 = 1e-12;

type DistFn<P> = Box<dyn Fn(&P, &P) -> f64 + Send + Sync>;

/// Finite metric space given by its points and a distance oracle.
pub struct FiniteMetricSpace<P> {
    points: Vec<P>,
    dist: DistFn<P>,
    label: String,
}

impl<P> FiniteMetricSpace<P> {
    pub fn new(points: Vec<P>, dist: impl Fn(&P, &P) -> f64 + Send + Sync + 'static, label: impl Into<String>) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::EmptySpace);
        }
        Ok(FiniteMetricSpace { points, dist: Box::new(dist), label: label.into() })
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &[P] {
        &self.points
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn dist(&self, i: usize, j: usize) -> f64 {
        (self.dist)(&self.points[i], &self.points[j])
    }

    /// Largest pairwise distance.
    pub fn diameter(&self) -> f64 {
        let n = self.len();
        let mut d: f64 = 0.0;
        for i in 0..n {
            for j in i + 1..n {
                d = d.max(self.dist(i, j));
            }
        }
        d
    }

    /// Checks the metric axioms: zero diagonal, symmetry, distinct points, and
    /// the triangle inequality on every `stride`-th triple.
    pub fn validate(&self, stride: usize) -> Result<()> {
        let n = self.len();
        let stride = stride.max(1);
        for i in 0..n {
            if self.dist(i, i).abs() > DIST_TOL {
                return Err(invalid(format!("{}: d(x,x) != 0 at {i}", self.label)));
            }
            for j in i + 1..n {
                let dij = self.dist(i, j);
                if !(dij >= 0.0) || (dij - self.dist(j, i)).abs() > DIST_TOL {
                    return Err(invalid(format!("{}: asymmetric or negative distance at ({i},{j})", self.label)));
                }
                if dij == 0.0 {
                    return Err(invalid(format!("{}: duplicate points {i} and {j}", self.label)));
                }
            }
        }
        let mut t = 0usize;
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    t += 1;
                    if t % stride != 0 {
                        continue;
                    }
                    if self.dist(i, k) > self.dist(i, j) + self.dist(j, k) + DIST_TOL {
                        return Err(invalid(format!("{}: triangle inequality fails at ({i},{j},{k})", self.label)));
                    }
                }
            }
        }
        Ok(())
    }
}

fn sup_dist_real(a: &Vec<f64>, b: &Vec<f64>) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

fn euclid_dist_real(a: &Vec<f64>, b: &Vec<f64>) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

/// Sup-modulus distance `max_j |z_j − w_j|`.
pub fn sup_dist_complex(a: &[Complex64], b: &[Complex64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

impl FiniteMetricSpace<Vec<f64>> {
    pub fn real_sup(points: Vec<Vec<f64>>) -> Result<Self> {
        FiniteMetricSpace::new(points, sup_dist_real, "real-sup")
    }

    pub fn real_euclidean(points: Vec<Vec<f64>>) -> Result<Self> {
        FiniteMetricSpace::new(points, euclid_dist_real, "real-euclidean")
    }
}

impl FiniteMetricSpace<Vec<Complex64>> {
    pub fn complex_sup(points: Vec<Vec<Complex64>>) -> Result<Self> {
        FiniteMetricSpace::new(points, |a: &Vec<Complex64>, b: &Vec<Complex64>| sup_dist_complex(a, b), "complex-sup")
    }
}

fn check_eps(eps: f64) -> Result<()> {
    if eps > 0.0 && eps.is_finite() {
        Ok(())
    } else {
        Err(invalid(format!("eps must be positive and finite, got {eps}")))
    }
}

/// A covering: each cluster has diameter at most `2ε`; `centers[i]` is the
/// seed of `clusters[i]`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Cover {
    pub centers: Vec<usize>,
    pub clusters: Vec<Vec<usize>>,
}

impl Cover {
    pub fn len(&self) -> usize {
        self.centers.len()
    }

    pub fn is_empty(&self) -> bool {
        self.centers.is_empty()
    }
}

/// Greedy ε-covering by sets of diameter at most `2ε`.
///
/// Two constructions are run and the smaller one is returned:
/// clusters grown from the lowest uncovered index (a point joins when it is
/// within `2ε` of every member), and the ε-balls around a maximal ε-packing.
/// The second guarantees the count never exceeds the greedy packing count.
pub fn greedy_cover<P>(space: &FiniteMetricSpace<P>, eps: f64) -> Result<Cover> {
    check_eps(eps)?;
    if space.is_empty() {
        return Err(Error::EmptySpace);
    }
    let clustered = diameter_clusters(space, eps);
    let from_pack = packing_balls(space, eps);
    Ok(if clustered.len() <= from_pack.len() { clustered } else { from_pack })
}

fn diameter_clusters<P>(space: &FiniteMetricSpace<P>, eps: f64) -> Cover {
    let n = space.len();
    let limit = 2.0 * eps + DIST_TOL;
    let mut covered = vec![false; n];
    let mut cover = Cover { centers: Vec::new(), clusters: Vec::new() };
    for seed in 0..n {
        if covered[seed] {
            continue;
        }
        covered[seed] = true;
        let mut members = vec![seed];
        for j in seed + 1..n {
            if covered[j] || space.dist(seed, j) > limit {
                continue;
            }
            if members.iter().all(|&m| space.dist(m, j) <= limit) {
                members.push(j);
                covered[j] = true;
            }
        }
        cover.centers.push(seed);
        cover.clusters.push(members);
    }
    cover
}

fn packing_balls<P>(space: &FiniteMetricSpace<P>, eps: f64) -> Cover {
    let centers = pack_indices(space, eps);
    let mut clusters = vec![Vec::new(); centers.len()];
    for j in 0..space.len() {
        // maximality puts every point within ε of some center
        let slot = centers
            .iter()
            .position(|&c| space.dist(c, j) <= eps + DIST_TOL)
            .expect("maximal packing covers");
        clusters[slot].push(j);
    }
    Cover { centers, clusters }
}

fn pack_indices<P>(space: &FiniteMetricSpace<P>, eps: f64) -> Vec<usize> {
    let limit = eps + DIST_TOL;
    let mut kept: Vec<usize> = Vec::new();
    for j in 0..space.len() {
        if kept.iter().all(|&k| space.dist(k, j) > limit) {
            kept.push(j);
        }
    }
    kept
}

/// Greedy inclusion-maximal ε-distinguishable subset, scanned in index order.
pub fn greedy_pack<P>(space: &FiniteMetricSpace<P>, eps: f64) -> Result<Vec<usize>> {
    check_eps(eps)?;
    if space.is_empty() {
        return Err(Error::EmptySpace);
    }
    Ok(pack_indices(space, eps))
}

/// Consistency of the computed counts with `M_{2ε} ≤ N_ε ≤ M_ε`.
///
/// A `false` result means a bug in the greedy routines: the packing at `2ε`
/// must not exceed the covering at ε, and the covering must not exceed the
/// maximal packing at ε whose balls form a covering.
pub fn sandwich_check<P>(space: &FiniteMetricSpace<P>, eps: f64) -> Result<bool> {
    let pack2 = greedy_pack(space, 2.0 * eps)?.len();
    let cover = greedy_cover(space, eps)?;
    let pack1 = greedy_pack(space, eps)?.len();
    Ok(pack2 <= cover.len() && cover.len() <= pack1 && cover_is_valid(space, eps, &cover))
}

/// Every point belongs to exactly one cluster and clusters have diameter ≤ 2ε.
pub fn cover_is_valid<P>(space: &FiniteMetricSpace<P>, eps: f64, cover: &Cover) -> bool {
    let mut seen = vec![0u32; space.len()];
    for cl in &cover.clusters {
        for (a, &i) in cl.iter().enumerate() {
            seen[i] += 1;
            for &j in &cl[a + 1..] {
                if space.dist(i, j) > 2.0 * eps + DIST_TOL {
                    return false;
                }
            }
        }
    }
    seen.iter().all(|&s| s == 1)
}

/// How a bound in an [`EntropyReport`] was obtained.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Greedy,
    Grid,
    Spectral,
    Product,
    Union,
}

impl Method {
    pub fn as_str(self) -> &'static str {
        match self {
            Method::Greedy => "greedy",
            Method::Grid => "grid",
            Method::Spectral => "spectral",
            Method::Product => "product",
            Method::Union => "union",
        }
    }
}

/// Two-sided bounds on the ε-entropy at one scale (natural logarithms).
///
/// `cover_count` is an upper bound on `N_ε` when it fits in a `u64`.
/// `pack_count` counts a packing at `2ε`, hence a lower bound on `N_ε`, and
/// `h_lower = log(pack_count)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EntropyReport {
    pub eps: f64,
    pub h_upper: f64,
    pub h_lower: f64,
    pub cover_count: Option<u64>,
    pub pack_count: Option<u64>,
    pub method: Method,
    /// `log k + max h_upper` for union reports.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k_max_upper: Option<f64>,
}

impl EntropyReport {
    /// Report from a finite space: greedy cover at ε, greedy packing at `2ε`.
    pub fn from_space<P>(space: &FiniteMetricSpace<P>, eps: f64) -> Result<Self> {
        let cover = greedy_cover(space, eps)?.len() as u64;
        let pack = greedy_pack(space, 2.0 * eps)?.len() as u64;
        Ok(EntropyReport {
            eps,
            h_upper: (cover as f64).ln(),
            h_lower: (pack as f64).ln(),
            cover_count: Some(cover),
            pack_count: Some(pack),
            method: Method::Greedy,
            k_max_upper: None,
        })
    }

    pub fn csv_header() -> &'static str {
        "eps,h_lower,h_upper,method"
    }

    pub fn csv_row(&self) -> String {
        format!("{:.16e},{:.16e},{:.16e},{}", self.eps, self.h_lower, self.h_upper, self.method.as_str())
    }
}

fn same_eps(reports: &[EntropyReport]) -> Result<f64> {
    let first = reports.first().ok_or_else(|| invalid("no reports to combine"))?;
    for r in &reports[1..] {
        if r.eps != first.eps {
            return Err(Error::EpsMismatch(first.eps, r.eps));
        }
    }
    Ok(first.eps)
}

fn product_count(reports: &[EntropyReport], f: impl Fn(&EntropyReport) -> Option<u64>) -> Option<u64> {
    reports.iter().try_fold(1u64, |acc, r| acc.checked_mul(f(r)?))
}

/// Entropy of a sup-metric product: upper bounds add. Products of packings
/// are packings in the sup metric, so the lower bounds add as well.
pub fn product_entropy_bound(reports: &[EntropyReport]) -> Result<EntropyReport> {
    let eps = same_eps(reports)?;
    if reports.len() == 1 {
        return Ok(reports[0].clone());
    }
    Ok(EntropyReport {
        eps,
        h_upper: reports.iter().map(|r| r.h_upper).sum(),
        h_lower: reports.iter().map(|r| r.h_lower).sum(),
        cover_count: product_count(reports, |r| r.cover_count),
        pack_count: product_count(reports, |r| r.pack_count),
        method: Method::Product,
        k_max_upper: None,
    })
}

/// Entropy of the trace space over a union: the upper bound is the sum of the
/// parts (and at most `log k + max`), the lower bound is the largest part.
pub fn union_entropy_bound(reports: &[EntropyReport]) -> Result<EntropyReport> {
    let eps = same_eps(reports)?;
    if reports.len() == 1 {
        return Ok(reports[0].clone());
    }
    let max_upper = reports.iter().map(|r| r.h_upper).fold(f64::NEG_INFINITY, f64::max);
    let lower = reports
        .iter()
        .max_by(|a, b| a.h_lower.total_cmp(&b.h_lower))
        .expect("nonempty");
    Ok(EntropyReport {
        eps,
        h_upper: reports.iter().map(|r| r.h_upper).sum(),
        h_lower: lower.h_lower,
        cover_count: product_count(reports, |r| r.cover_count),
        pack_count: lower.pack_count,
        method: Method::Union,
        k_max_upper: Some((reports.len() as f64).ln() + max_upper),
    })
}

/// `n log(r/ε + 1)`, an upper bound on the ε-entropy of the radius-`r` ball
/// of `R^n` in the sup metric.
pub fn linf_ball_entropy_bound(n: u32, r: f64, eps: f64) -> Result<f64> {
    if n == 0 || !(r > 0.0) {
        return Err(invalid("requires n >= 1 and r > 0"));
    }
    check_eps(eps)?;
    Ok(n as f64 * (r / eps + 1.0).ln())
}

/// Explicit grid covering of `[-r, r]^n` by cubes of side `2ε`:
/// `ceil(r/ε)` cells per axis. Returns the cell count per axis and `H`.
pub fn grid_cover_linf_ball(n: u32, r: f64, eps: f64) -> Result<(u64, f64)> {
    if n == 0 || !(r > 0.0) {
        return Err(invalid("requires n >= 1 and r > 0"));
    }
    check_eps(eps)?;
    let per_axis = ((r / eps) * (1.0 - 1e-15)).ceil().max(1.0) as u64;
    Ok((per_axis, n as f64 * (per_axis as f64).ln()))
}
