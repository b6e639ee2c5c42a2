//! Point clouds and entropy bounds for their spaces of holomorphic traces.
//!
//! For a cloud `X` inside a polydisk `D = Δ(a, R)`, the trace space is the
//! set of restrictions to `X` of functions holomorphic on `D` with modulus at
//! most one, in the sup metric over `X`.
//!
//! The upper bound truncates Taylor series at degree `k` and grids the
//! remaining coefficients; the ε budget is split in thirds between the
//! truncation tail, the grid cells and slack. The lower bound is the larger
//! of a packing of traces of random normalized polynomials and a packing of
//! integer combinations of a low-degree monomial basis.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::metric_entropy::{sup_dist_complex, EntropyReport, FiniteMetricSpace, Method};
use crate::metric_entropy::greedy_pack;
use crate::polynomials::{
    binomial, cauchy_coeff_bound, sup_on_polydisk, taylor_truncation_bound, ComplexPoly, MultiIndex, Polydisk,
};
use num_traits::ToPrimitive;

/// Finite sample of a compact set together with its enclosing polydisk.
#[derive(Clone, Debug, PartialEq)]
pub struct PointCloud {
    ambient_dim: usize,
    points: Vec<Vec<Complex64>>,
    enclosing: Polydisk,
    inner_radius: f64,
}

/// Values of a function on the points of a cloud, in cloud order.
pub type TraceVector = Vec<Complex64>;

/// Default ratio `R / r′` for automatically fitted enclosing polydisks.
pub const DEFAULT_RADIUS_RATIO: f64 = 4.0;

impl PointCloud {
    /// Cloud inside a given polydisk; `r′` is the largest deviation from the
    /// center.
    pub fn new(points: Vec<Vec<Complex64>>, enclosing: Polydisk) -> Result<Self> {
        let r = max_deviation(&points, &enclosing)?;
        PointCloud::with_inner_radius(points, enclosing, r)
    }

    /// Cloud with an explicit inner radius `r′` (at least the largest deviation).
    pub fn with_inner_radius(points: Vec<Vec<Complex64>>, enclosing: Polydisk, inner_radius: f64) -> Result<Self> {
        let dev = max_deviation(&points, &enclosing)?;
        if inner_radius < dev {
            return Err(invalid(format!("inner radius {inner_radius} below cloud deviation {dev}")));
        }
        if !(inner_radius < enclosing.radius) {
            return Err(Error::RadiusOrder { big: enclosing.radius, small: inner_radius });
        }
        Ok(PointCloud { ambient_dim: enclosing.dim(), points, enclosing, inner_radius })
    }

    /// Fits the enclosing polydisk: center at the bounding-box midpoint,
    /// `R = ratio * r′` (or `R = 1` for a single point).
    pub fn fit(points: Vec<Vec<Complex64>>, ratio: f64) -> Result<Self> {
        if !(ratio > 1.0) {
            return Err(invalid("radius ratio must exceed 1"));
        }
        let first = points.first().ok_or(Error::EmptySpace)?;
        let n = first.len();
        let mut center = Vec::with_capacity(n);
        for j in 0..n {
            let (mut lo_re, mut hi_re, mut lo_im, mut hi_im) = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
            for p in &points {
                if p.len() != n {
                    return Err(Error::DimensionMismatch { expected: n, got: p.len() });
                }
                lo_re = lo_re.min(p[j].re);
                hi_re = hi_re.max(p[j].re);
                lo_im = lo_im.min(p[j].im);
                hi_im = hi_im.max(p[j].im);
            }
            center.push(Complex64::new(0.5 * (lo_re + hi_re), 0.5 * (lo_im + hi_im)));
        }
        let probe = Polydisk { center, radius: 1.0 };
        let r = points.iter().map(|p| probe.deviation(p)).fold(0.0, f64::max);
        let big = if r > 0.0 { ratio * r } else { 1.0 };
        PointCloud::with_inner_radius(points, Polydisk::new(probe.center, big)?, r)
    }

    pub fn ambient_dim(&self) -> usize {
        self.ambient_dim
    }

    pub fn points(&self) -> &[Vec<Complex64>] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn enclosing(&self) -> &Polydisk {
        &self.enclosing
    }

    pub fn inner_radius(&self) -> f64 {
        self.inner_radius
    }

    /// Same points inside a different polydisk with the same center.
    pub fn with_enclosing_radius(&self, radius: f64) -> Result<Self> {
        let d = Polydisk::new(self.enclosing.center.clone(), radius)?;
        PointCloud::with_inner_radius(self.points.clone(), d, self.inner_radius)
    }

    /// Sub-cloud; keeps the enclosing polydisk and inner radius.
    pub fn subset(&self, indices: &[usize]) -> Result<Self> {
        let pts = indices
            .iter()
            .map(|&i| self.points.get(i).cloned().ok_or_else(|| invalid(format!("index {i} out of range"))))
            .collect::<Result<Vec<_>>>()?;
        PointCloud::with_inner_radius(pts, self.enclosing.clone(), self.inner_radius)
    }

    /// Union of two clouds in the same polydisk, dropping exact duplicates.
    pub fn union(&self, other: &PointCloud) -> Result<Self> {
        if self.enclosing != other.enclosing {
            return Err(Error::CenterMismatch);
        }
        let mut pts = self.points.clone();
        for p in &other.points {
            if !pts.contains(p) {
                pts.push(p.clone());
            }
        }
        PointCloud::with_inner_radius(pts, self.enclosing.clone(), self.inner_radius.max(other.inner_radius))
    }

    /// Image under a polynomial map; the enclosing polydisk is refitted with
    /// the same `R / r′` ratio as the source.
    pub fn apply_poly_map(&self, phi: &[ComplexPoly]) -> Result<Self> {
        if phi.is_empty() {
            return Err(invalid("empty polynomial map"));
        }
        for p in phi {
            if p.nvars() != self.ambient_dim {
                return Err(Error::DimensionMismatch { expected: self.ambient_dim, got: p.nvars() });
            }
        }
        let pts = self
            .points
            .iter()
            .map(|z| phi.iter().map(|p| p.evaluate(z)).collect::<Result<Vec<_>>>())
            .collect::<Result<Vec<_>>>()?;
        let ratio = if self.inner_radius > 0.0 { self.enclosing.radius / self.inner_radius } else { DEFAULT_RADIUS_RATIO };
        PointCloud::fit(pts, ratio)
    }

    /// Sup-metric space of the points themselves.
    pub fn metric_space(&self) -> Result<FiniteMetricSpace<Vec<Complex64>>> {
        FiniteMetricSpace::complex_sup(self.points.clone())
    }

    /// Trace of a polynomial on the cloud.
    pub fn traces_of(&self, p: &ComplexPoly) -> Result<TraceVector> {
        self.points.iter().map(|z| p.evaluate(z)).collect()
    }

    /// Matrix of centered monomials `(z − a)^α`, rows indexed by points.
    pub fn monomial_matrix(&self, monomials: &[MultiIndex]) -> DMatrix<Complex64> {
        let a = &self.enclosing.center;
        let k = monomials.iter().map(MultiIndex::degree).max().unwrap_or(0) as usize;
        DMatrix::from_fn(self.points.len(), monomials.len(), |i, j| {
            let z = &self.points[i];
            let mut v = Complex64::new(1.0, 0.0);
            for (var, &e) in monomials[j].0.iter().enumerate() {
                if e > 0 {
                    v *= (z[var] - a[var]).powu(e);
                }
            }
            debug_assert!(monomials[j].degree() as usize <= k);
            v
        })
    }

    pub fn to_json(&self) -> serde_json::Value {
        let doc = CloudJson {
            ambient_dim: self.ambient_dim,
            points: self.points.iter().map(|p| flatten(p)).collect(),
            metric: "sup".into(),
            enclosing: Some(EnclosingJson { center: flatten(&self.enclosing.center), radius: self.enclosing.radius }),
            inner_radius: Some(self.inner_radius),
        };
        serde_json::to_value(doc).expect("serializable")
    }

    /// Parses the cloud document; without `"enclosing"` the polydisk is fitted
    /// with [`DEFAULT_RADIUS_RATIO`].
    pub fn from_json(v: &serde_json::Value) -> Result<Self> {
        let doc: CloudJson = serde_json::from_value(v.clone())?;
        if doc.metric != "sup" {
            return Err(invalid(format!("unsupported metric {:?}", doc.metric)));
        }
        let points = doc
            .points
            .iter()
            .map(|p| unflatten(p, doc.ambient_dim))
            .collect::<Result<Vec<_>>>()?;
        if points.is_empty() {
            return Err(Error::EmptySpace);
        }
        match doc.enclosing {
            None => PointCloud::fit(points, DEFAULT_RADIUS_RATIO),
            Some(e) => {
                let d = Polydisk::new(unflatten(&e.center, doc.ambient_dim)?, e.radius)?;
                match doc.inner_radius {
                    Some(r) => PointCloud::with_inner_radius(points, d, r),
                    None => PointCloud::new(points, d),
                }
            }
        }
    }
}

#[derive(Serialize, Deserialize)]
struct EnclosingJson {
    center: Vec<f64>,
    radius: f64,
}

#[derive(Serialize, Deserialize)]
struct CloudJson {
    ambient_dim: usize,
    points: Vec<Vec<f64>>,
    #[serde(default = "default_metric")]
    metric: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    enclosing: Option<EnclosingJson>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    inner_radius: Option<f64>,
}

fn default_metric() -> String {
    "sup".into()
}

fn flatten(p: &[Complex64]) -> Vec<f64> {
    p.iter().flat_map(|c| [c.re, c.im]).collect()
}

fn unflatten(v: &[f64], n: usize) -> Result<Vec<Complex64>> {
    if v.len() != 2 * n {
        return Err(Error::DimensionMismatch { expected: 2 * n, got: v.len() });
    }
    Ok(v.chunks(2).map(|c| Complex64::new(c[0], c[1])).collect())
}

fn max_deviation(points: &[Vec<Complex64>], d: &Polydisk) -> Result<f64> {
    if points.is_empty() {
        return Err(Error::EmptySpace);
    }
    let mut r: f64 = 0.0;
    for p in points {
        if p.len() != d.dim() {
            return Err(Error::DimensionMismatch { expected: d.dim(), got: p.len() });
        }
        r = r.max(d.deviation(p));
    }
    Ok(r)
}

/// Grid points of `[-r, r]^2` (as complex numbers) inside the closed disk of
/// radius `r`, with `per_axis` samples per axis.
pub fn disk_grid(center: Complex64, r: f64, per_axis: usize) -> Vec<Vec<Complex64>> {
    let mut out = Vec::new();
    let steps = per_axis.max(2) - 1;
    for i in 0..=steps {
        for j in 0..=steps {
            let x = -r + 2.0 * r * i as f64 / steps as f64;
            let y = -r + 2.0 * r * j as f64 / steps as f64;
            if x * x + y * y <= r * r * (1.0 + 1e-12) {
                out.push(vec![center + Complex64::new(x, y)]);
            }
        }
    }
    out
}

/// Degree and coefficient boxes of the Taylor surrogate at one scale.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SurrogateModel {
    pub eps: f64,
    pub degree: u32,
    /// `degree / log(1/ε)`.
    pub l_factor: f64,
    /// `r′ / R`.
    pub ratio: f64,
    /// `(1/(R − r′)) (r′/R)^k`.
    pub truncation_bound: f64,
    /// `Σ_{j>k} binom(j+n−1, n−1) (r′/R)^j`, the tail of the Cauchy estimate
    /// summed over all omitted monomials.
    pub tail_bound: f64,
    /// Budget split: truncation, grid, slack.
    pub eps_budget: [f64; 3],
    pub coeff_boxes: Vec<(MultiIndex, f64)>,
}

fn multivariate_tail(n: usize, q: f64, k: u32) -> f64 {
    if q == 0.0 {
        return 0.0;
    }
    let mut sum = 0.0;
    let mut j = k as u64 + 1;
    loop {
        let term = binomial(j + n as u64 - 1, n as u64 - 1).to_f64().unwrap_or(f64::INFINITY) * q.powi(j as i32);
        sum += term;
        let ratio = q * (j + n as u64) as f64 / (j + 1) as f64;
        if ratio <= 0.5 && term <= 1e-18 * sum.max(1e-300) {
            // geometric domination of the remainder by the last term
            return sum + term;
        }
        if !term.is_finite() || j > k as u64 + 100_000 {
            return f64::INFINITY;
        }
        j += 1;
    }
}

/// Chooses the truncation degree for `X` at scale ε.
///
/// `k` is the smallest degree for which both the one-variable truncation
/// bound and the multivariate tail of the Cauchy estimate are at most ε/3.
pub fn build_surrogate(x: &PointCloud, eps: f64) -> Result<SurrogateModel> {
    if !(eps > 0.0 && eps < 1.0) {
        return Err(invalid("build_surrogate requires 0 < eps < 1"));
    }
    let big = x.enclosing.radius;
    let r = x.inner_radius;
    let n = x.ambient_dim;
    let third = eps / 3.0;
    let (degree, truncation_bound, tail_bound) = if r == 0.0 {
        (0, 0.0, 0.0)
    } else {
        let mut k = 0u32;
        loop {
            let tb = taylor_truncation_bound(big, r, k, 1.0)?;
            let tail = multivariate_tail(n, r / big, k);
            if tb <= third && tail <= third {
                break (k, tb, tail);
            }
            k += 1;
            if k > 10_000 {
                return Err(invalid("truncation degree exceeds 10000"));
            }
        }
    };
    let coeff_boxes = MultiIndex::up_to_degree(n, degree)
        .into_iter()
        .map(|a| {
            let c = cauchy_coeff_bound(big, &a)?;
            Ok((a, c))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(SurrogateModel {
        eps,
        degree,
        l_factor: degree as f64 / (1.0 / eps).ln(),
        ratio: r / big,
        truncation_bound,
        tail_bound,
        eps_budget: [third, third, third],
        coeff_boxes,
    })
}

/// One coordinate of the coefficient grid: range `rho` and trace weight `w`.
#[derive(Clone, Copy, Debug)]
struct Direction {
    rho: f64,
    w: f64,
}

/// Log-count of a grid covering the coefficient ranges so that the traces of
/// each cell stay within `budget` of the cell center.
///
/// Directions with the smallest `w * rho` are dropped (a single cell) while
/// their total influence fits the budget; the rest of the budget is spread
/// evenly: half-side `δ = rem / (√2 T w)` per kept complex coordinate.
fn allocate(dirs: &[Direction], budget: f64) -> (f64, Option<u64>) {
    let mut order: Vec<usize> = (0..dirs.len()).collect();
    order.sort_by(|&i, &j| (dirs[i].w * dirs[i].rho).total_cmp(&(dirs[j].w * dirs[j].rho)));
    let mut best: Option<(f64, Option<u64>)> = None;
    let mut dropped = 0.0;
    for d in 0..=order.len() {
        if d > 0 {
            let dir = dirs[order[d - 1]];
            dropped += dir.w * dir.rho;
        }
        if dropped > budget {
            break;
        }
        let kept = &order[d..];
        let rem = budget - dropped;
        let (h, count) = if kept.is_empty() {
            (0.0, Some(1))
        } else {
            if rem <= 0.0 {
                continue;
            }
            let t = kept.len() as f64;
            let mut h = 0.0;
            let mut count: Option<u64> = Some(1);
            for &i in kept {
                let delta = rem / (std::f64::consts::SQRT_2 * t * dirs[i].w);
                let per_axis = (dirs[i].rho / delta).ceil().max(1.0);
                h += 2.0 * per_axis.ln();
                count = count.and_then(|c| {
                    let a = per_axis as u64;
                    c.checked_mul(a)?.checked_mul(a)
                });
            }
            (h, count)
        };
        if best.as_ref().is_none_or(|b| h < b.0) {
            best = Some((h, count));
        }
    }
    best.unwrap_or((f64::INFINITY, None))
}

fn trivial_report(eps: f64, method: Method) -> EntropyReport {
    EntropyReport { eps, h_upper: 0.0, h_lower: 0.0, cover_count: Some(1), pack_count: Some(1), method, k_max_upper: None }
}

/// Number of axis-aligned squares of side `√2 ε` (diameter `2ε`) meeting the
/// closed unit disk.
fn unit_disk_square_count(eps: f64) -> u64 {
    let s = std::f64::consts::SQRT_2 * eps;
    let m = (1.0 / s).ceil() as i64 + 1;
    let mut count: u64 = 0;
    for i in -m..m {
        let x0 = i as f64 * s;
        let x1 = x0 + s;
        let dx = if x0 > 0.0 { x0 } else if x1 < 0.0 { -x1 } else { 0.0 };
        if dx > 1.0 {
            continue;
        }
        let y = (1.0 - dx * dx).max(0.0).sqrt();
        let hi = (y / s).ceil() as i64;
        let lo = (-y / s).floor() as i64;
        count += (hi - lo).max(1) as u64;
    }
    count
}

/// Certified upper bound on the ε-entropy of the trace space.
pub fn entropy_upper(x: &PointCloud, eps: f64) -> Result<EntropyReport> {
    if !(eps > 0.0) {
        return Err(invalid("eps must be positive"));
    }
    // traces have modulus at most one, so one set of diameter 2 ≤ 2ε suffices
    if eps >= 1.0 {
        return Ok(trivial_report(eps, Method::Grid));
    }
    if x.inner_radius == 0.0 {
        // every trace is a single value in the closed unit disk
        let c = unit_disk_square_count(eps);
        return Ok(EntropyReport { h_upper: (c as f64).ln(), cover_count: Some(c), ..trivial_report(eps, Method::Grid) });
    }
    let model = build_surrogate(x, eps)?;
    let monomials: Vec<MultiIndex> = model.coeff_boxes.iter().map(|(a, _)| a.clone()).collect();
    let rho: Vec<f64> = model.coeff_boxes.iter().map(|(_, r)| *r).collect();
    let v = x.monomial_matrix(&monomials);
    let budget = model.eps_budget[1];

    let coordinate: Vec<Direction> = (0..monomials.len())
        .map(|j| Direction { rho: rho[j], w: v.column(j).iter().map(|c| c.norm()).fold(0.0, f64::max) })
        .collect();
    let (h_coord, c_coord) = allocate(&coordinate, budget);

    let (h_spec, c_spec) = match spectral_directions(&v, &rho) {
        Some((dirs, residual)) if residual < 0.5 * budget => allocate(&dirs, budget - residual),
        _ => (f64::INFINITY, None),
    };
    let (h, count, method) = if h_spec < h_coord { (h_spec, c_spec, Method::Spectral) } else { (h_coord, c_coord, Method::Grid) };
    Ok(EntropyReport { h_upper: h, cover_count: count, ..trivial_report(eps, method) })
}

/// Right singular directions of the monomial matrix with their coefficient
/// ranges and trace weights, plus the sup-norm residual of the change of basis
/// over the coefficient box.
fn spectral_directions(v: &DMatrix<Complex64>, rho: &[f64]) -> Option<(Vec<Direction>, f64)> {
    let svd = v.clone().svd(false, true);
    let vt = svd.v_t?;
    let w = vt.adjoint();
    let vw = v * &w;
    let proj = &vw * &vt;
    let residual = (0..v.nrows())
        .map(|i| (0..v.ncols()).map(|j| (v[(i, j)] - proj[(i, j)]).norm() * rho[j]).sum::<f64>())
        .fold(0.0, f64::max);
    let dirs = (0..w.ncols())
        .map(|c| Direction {
            rho: (0..w.nrows()).map(|r| w[(r, c)].norm() * rho[r]).sum(),
            w: vw.column(c).iter().map(|z| z.norm()).fold(0.0, f64::max),
        })
        .collect();
    if !residual.is_finite() {
        return None;
    }
    Some((dirs, residual))
}

/// Random normalized polynomials for the packing lower bound: coefficients
/// uniform in the Cauchy squares of the surrogate at scale ε, divided by
/// `max(1, hi)` where `hi` is the certified sup bound on `D`.
///
/// Returns centered coefficient vectors aligned with `monomials`.
pub fn sample_normalized_polys(
    x: &PointCloud,
    monomials: &[MultiIndex],
    samples: usize,
    seed: u64,
) -> Result<Vec<Vec<Complex64>>> {
    let n = x.ambient_dim;
    let big = x.enclosing.radius;
    let k = monomials.iter().map(MultiIndex::degree).max().unwrap_or(0) as usize;
    let grid = if n == 1 { 8 * k + 8 } else { 4 * k + 8 };
    let origin = Polydisk::origin(n, big)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(samples);
    for _ in 0..samples {
        let coeffs: Vec<Complex64> = monomials
            .iter()
            .map(|a| {
                let r = big.powi(-(a.degree() as i32));
                Complex64::new(rng.gen_range(-r..=r), rng.gen_range(-r..=r))
            })
            .collect();
        let p = ComplexPoly::from_terms(n, monomials.iter().cloned().zip(coeffs.iter().copied()))?;
        let hi = sup_on_polydisk(&p, &origin, grid)?.hi;
        let s = 1.0 / hi.max(1.0);
        out.push(coeffs.iter().map(|c| c * s).collect());
    }
    Ok(out)
}

/// Packing lower bound from given coefficient vectors (centered monomial
/// basis): traces on `X` packed at `2ε`.
pub fn entropy_lower_from_coeffs(x: &PointCloud, eps: f64, monomials: &[MultiIndex], coeffs: &[Vec<Complex64>]) -> Result<EntropyReport> {
    if coeffs.is_empty() {
        return Err(invalid("entropy_lower needs at least one sample"));
    }
    let v = x.monomial_matrix(monomials);
    let traces: Vec<Vec<Complex64>> = coeffs
        .iter()
        .map(|c| {
            let col = nalgebra::DVector::from_column_slice(c);
            (&v * col).iter().copied().collect()
        })
        .collect();
    let space = FiniteMetricSpace::new(traces, |a: &Vec<Complex64>, b: &Vec<Complex64>| sup_dist_complex(a, b), "traces")?;
    let pack = greedy_pack(&space, 2.0 * eps)?.len() as u64;
    Ok(EntropyReport {
        eps,
        h_upper: f64::INFINITY,
        h_lower: (pack as f64).ln(),
        cover_count: None,
        pack_count: Some(pack),
        method: Method::Greedy,
        k_max_upper: None,
    })
}

/// Structured packing: polynomials `Σ_{|α|≤d} τ R^{−|α|} g_α (z − a)^α` with
/// Gaussian-integer `g_α`, `|Re g_α|, |Im g_α| ≤ G`.
///
/// With `W` the matrix of `((z − a)/R)^α` on `X`, two distinct members differ
/// on `X` by at least `τ σ_min(W) / √m` in the sup norm (`m` points), so
/// `τ = 2ε√m / σ_min(W)` (plus a relative margin for the numerical SVD) makes
/// them `2ε`-distinguishable. `G = ⌊1/(√2 |S| τ)⌋` keeps the coefficient sum,
/// hence the sup on `D`, at most one. Returns the best `(log count, count)`
/// over the degrees `d`.
pub fn lattice_packing_lower(x: &PointCloud, eps: f64, max_degree: u32) -> (f64, Option<u64>) {
    let n = x.ambient_dim;
    let m = x.len();
    let big = x.enclosing.radius;
    let mut best = (0.0, Some(1u64));
    for d in 0..=max_degree {
        let monomials = MultiIndex::up_to_degree(n, d);
        let s = monomials.len();
        if s > m {
            break;
        }
        let mut w = x.monomial_matrix(&monomials);
        for (j, a) in monomials.iter().enumerate() {
            let scale = big.powi(-(a.degree() as i32));
            w.column_mut(j).iter_mut().for_each(|v| *v *= scale);
        }
        let sv = w.singular_values();
        let smax = sv.max();
        let smin = sv.min() - 1e-12 * smax;
        if !(smin > 0.0) {
            break;
        }
        let tau = 2.0 * eps * (m as f64).sqrt() / smin * (1.0 + 1e-9);
        let g = (1.0 / (std::f64::consts::SQRT_2 * s as f64 * tau)).floor();
        if g < 1.0 {
            break;
        }
        let per_axis = 2.0 * g + 1.0;
        let h = 2.0 * s as f64 * per_axis.ln();
        if h > best.0 {
            let count = (0..2 * s).try_fold(1u64, |acc, _| acc.checked_mul(per_axis as u64));
            best = (h, count);
        }
    }
    best
}

/// Packing lower bound merged with [`entropy_upper`] at the same ε.
///
/// Traces are packed at `2ε`, so `h_lower` bounds the ε-entropy itself. The
/// reported lower bound is the larger of the sampled packing and
/// [`lattice_packing_lower`].
pub fn entropy_lower(x: &PointCloud, eps: f64, samples: usize, seed: u64) -> Result<EntropyReport> {
    if samples == 0 {
        return Err(invalid("samples must be at least 1"));
    }
    let upper = entropy_upper(x, eps)?;
    if eps >= 1.0 {
        return Ok(upper);
    }
    let model = build_surrogate(x, eps)?;
    let monomials: Vec<MultiIndex> = model.coeff_boxes.iter().map(|(a, _)| a.clone()).collect();
    let coeffs = sample_normalized_polys(x, &monomials, samples, seed)?;
    let sampled = entropy_lower_from_coeffs(x, eps, &monomials, &coeffs)?;
    let (h_lattice, c_lattice) = lattice_packing_lower(x, eps, model.degree);
    let (h_lower, pack_count) = if h_lattice > sampled.h_lower { (h_lattice, c_lattice) } else { (sampled.h_lower, sampled.pack_count) };
    Ok(EntropyReport { h_lower: h_lower.min(upper.h_upper), pack_count, ..upper })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn surrogate_degree_for_quarter_radius() {
        let d = Polydisk::origin(1, 1.0).unwrap();
        let x = PointCloud::with_inner_radius(vec![vec![c(0.25, 0.0)]], d, 0.25).unwrap();
        let m = build_surrogate(&x, 1e-3).unwrap();
        // (4/3) 4^{-6} = 3.26e-4 <= 3.33e-4 while 4^{-5} * 4/3 = 1.3e-3
        assert_eq!(m.degree, 6);
        assert!(m.tail_bound <= 1e-3 / 3.0);
    }

    #[test]
    fn allocation_drops_negligible_directions() {
        let dirs = [Direction { rho: 1.0, w: 1.0 }, Direction { rho: 1e-9, w: 1e-9 }];
        let (h, count) = allocate(&dirs, 0.1);
        // one kept direction: δ = 0.1 / √2, ceil(1/δ) = 15 per axis
        assert_eq!(count, Some(225));
        assert!((h - 225f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn singleton_and_large_eps() {
        let x = PointCloud::new(vec![vec![c(0.1, 0.2)]], Polydisk::new(vec![c(0.1, 0.2)], 1.0).unwrap()).unwrap();
        assert_eq!(entropy_upper(&x, 2.5).unwrap().h_upper, 0.0);
        let r = entropy_upper(&x, 0.01).unwrap();
        let area_guess = (std::f64::consts::PI / (2.0 * 1e-4)).ln();
        assert!((r.h_upper - area_guess).abs() < 0.1);
    }

    #[test]
    fn json_roundtrip_and_fit() {
        let pts = vec![vec![c(0.0, 0.0), c(1.0, 0.5)], vec![c(0.5, 0.0), c(1.0, -0.5)]];
        let x = PointCloud::fit(pts, 4.0).unwrap();
        assert_eq!(x.enclosing().center, vec![c(0.25, 0.0), c(1.0, 0.0)]);
        assert!((x.inner_radius() - 0.5).abs() < 1e-15);
        let back = PointCloud::from_json(&x.to_json()).unwrap();
        assert_eq!(back, x);
    }
}
