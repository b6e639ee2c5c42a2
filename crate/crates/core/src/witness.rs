//! Witness sets: maximal ε-separated subsets of a small polydisk, and an LP
//! lower bound for `min_{P ∈ 𝒫_N} max_X |P|`.
//!
//! `𝒫_N` is the set of polynomials of degree at most `N` whose sup over the
//! closed unit polydisk is at least one.

use std::collections::{HashMap, HashSet};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::lp::{exact_basic_solution, exact_simplex_max, rational_to_f64_down, simplex_max, StandardLp};
use num_rational::BigRational;
use crate::polynomials::{binomial, MultiIndex, Polydisk};
use crate::trace_space::PointCloud;

/// Maximal packing of `Δ(0, r)^n` at `ε = (1 − r) r^N / (2N)`.
#[derive(Clone, Debug)]
pub struct WitnessSet {
    pub r: f64,
    pub degree: u32,
    pub n: usize,
    pub eps_used: f64,
    pub grid: usize,
    pub points: PointCloud,
}

/// `(1 − r) r^N / (2N)`.
pub fn witness_eps(r: f64, big_n: u32) -> f64 {
    (1.0 - r) / (2.0 * big_n as f64) * r.powi(big_n as i32)
}

/// Grid points per real axis needed for a step of at most `ε/4`.
pub fn required_grid(r: f64, big_n: u32) -> usize {
    (8.0 * r / witness_eps(r, big_n)).ceil() as usize + 1
}

fn sup_dist(a: &[Complex64], b: &[Complex64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

/// Greedy packing in grid order with spatial hashing.
struct Packer {
    eps: f64,
    cells: HashMap<Vec<i64>, Vec<usize>>,
    points: Vec<Vec<Complex64>>,
}

impl Packer {
    fn new(eps: f64) -> Self {
        Packer { eps, cells: HashMap::new(), points: Vec::new() }
    }

    fn cell(&self, z: &[Complex64]) -> Vec<i64> {
        z.iter()
            .flat_map(|c| [(c.re / self.eps).floor() as i64, (c.im / self.eps).floor() as i64])
            .collect()
    }

    fn try_insert(&mut self, z: Vec<Complex64>) -> bool {
        let base = self.cell(&z);
        let k = base.len();
        let mut offs = vec![-1i64; k];
        loop {
            let key: Vec<i64> = base.iter().zip(&offs).map(|(a, b)| a + b).collect();
            if let Some(ids) = self.cells.get(&key) {
                if ids.iter().any(|&i| sup_dist(&self.points[i], &z) <= self.eps) {
                    return false;
                }
            }
            let mut i = 0;
            loop {
                if i == k {
                    let id = self.points.len();
                    self.cells.entry(base).or_default().push(id);
                    self.points.push(z);
                    return true;
                }
                offs[i] += 1;
                if offs[i] <= 1 {
                    break;
                }
                offs[i] = -1;
                i += 1;
            }
        }
    }
}

/// Visits the grid points of `[−r, r]^{2n}` lying in `Δ(0, r)^n`, in
/// lexicographic order.
fn for_each_grid_point(r: f64, n: usize, grid: usize, mut f: impl FnMut(Vec<Complex64>)) {
    let axis: Vec<f64> = (0..grid).map(|i| -r + 2.0 * r * i as f64 / (grid - 1) as f64).collect();
    let mut idx = vec![0usize; 2 * n];
    loop {
        let z: Vec<Complex64> = (0..n).map(|j| Complex64::new(axis[idx[2 * j]], axis[idx[2 * j + 1]])).collect();
        if z.iter().all(|c| c.norm() <= r) {
            f(z);
        }
        let mut i = 2 * n;
        loop {
            if i == 0 {
                return;
            }
            i -= 1;
            idx[i] += 1;
            if idx[i] < grid {
                break;
            }
            idx[i] = 0;
        }
    }
}

/// Greedy maximal `ε`-separated subset of a grid of `Δ(0, r)^n` with `grid`
/// points per real axis.
pub fn build_witness(r: f64, big_n: u32, n: usize, grid: usize) -> Result<WitnessSet> {
    if !(r > 0.0 && r < 1.0) {
        return Err(invalid("requires 0 < r < 1"));
    }
    if big_n < 1 {
        return Err(invalid("requires N >= 1"));
    }
    if n < 1 {
        return Err(invalid("requires n >= 1"));
    }
    let eps = witness_eps(r, big_n);
    let required = required_grid(r, big_n);
    if grid < required {
        return Err(Error::GridTooCoarse { required, got: grid });
    }
    let mut packer = Packer::new(eps);
    for_each_grid_point(r, n, grid, |z| {
        packer.try_insert(z);
    });
    let points = PointCloud::with_inner_radius(packer.points, Polydisk::origin(n, 1.0)?, r)?;
    Ok(WitnessSet { r, degree: big_n, n, eps_used: eps, grid, points })
}

/// Union of `X_{1/k, k}` for `k = 2..=kmax`, each at its minimal grid,
/// without duplicate points.
pub fn build_union_witness(kmax: u32, n: usize) -> Result<PointCloud> {
    if kmax < 2 {
        return Err(invalid("requires kmax >= 2"));
    }
    let mut seen: HashSet<Vec<u64>> = HashSet::new();
    let mut pts = Vec::new();
    for k in 2..=kmax {
        let r = 1.0 / k as f64;
        let w = build_witness(r, k, n, required_grid(r, k))?;
        for z in w.points.points() {
            let key: Vec<u64> = z.iter().flat_map(|c| [c.re.to_bits(), c.im.to_bits()]).collect();
            if seen.insert(key) {
                pts.push(z.clone());
            }
        }
    }
    PointCloud::with_inner_radius(pts, Polydisk::origin(n, 1.0)?, 0.5)
}

/// Number of half-plane cuts approximating each modulus constraint.
pub const CUTS: usize = 16;

/// Result of [`cheb_lower_oracle`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OracleReport {
    /// Lower bound on `min_{P ∈ 𝒫_N} max_X |P|`.
    pub value: f64,
    /// Smallest LP lower bound over the normalization samples.
    pub lp_min: f64,
    /// Loss factor `1 − κ` for the torus sampling, `κ = nNπ/grid`.
    pub kappa: f64,
    /// All LP bounds come from exactly verified dual solutions.
    pub certified: bool,
    pub samples: usize,
}

fn direction(j: usize) -> (f64, f64) {
    let th = 2.0 * std::f64::consts::PI * j as f64 / CUTS as f64;
    // shrink so the rounded direction has modulus at most one
    let s = 1.0 - 2f64.powi(-50);
    (th.cos() * s, th.sin() * s)
}

/// Lower bound for `min_{P ∈ 𝒫_N} max_X |P|` from one LP per torus sample.
///
/// For a torus sample `ζ`, the LP minimizes `t` subject to
/// `Re(e^{−iθ_j} P(x)) ≤ t` for all `x ∈ X` and [`CUTS`] directions, with
/// `P(ζ) = 1`. Its value is certified through an exactly re-solved dual basis.
/// A normalized `P` attains its sup at some torus point within `π/grid` per
/// angle of a sample, where `|P| ≥ 1 − κ` by the Bernstein inequality, which
/// gives `value = (1 − κ) · min LP`.
pub fn cheb_lower_oracle(x: &PointCloud, big_n: u32, unit_disk_grid: usize) -> Result<OracleReport> {
    if x.is_empty() {
        return Err(Error::EmptySpace);
    }
    let n = x.ambient_dim();
    let d = binomial(big_n as u64 + n as u64, n as u64);
    let d: usize = num_traits::ToPrimitive::to_usize(&d).filter(|&v| 2 * v <= 10_000).ok_or_else(|| invalid("coefficient space exceeds 1e4 real dimensions"))?;
    if unit_disk_grid < 4 {
        return Err(Error::GridTooCoarse { required: 4, got: unit_disk_grid });
    }
    let monomials = MultiIndex::up_to_degree(n, big_n);
    let powers = |z: &[Complex64]| -> Vec<Complex64> {
        monomials.iter().map(|a| a.0.iter().zip(z).map(|(&e, c)| c.powu(e)).product()).collect()
    };
    let values: Vec<Vec<Complex64>> = x.points().iter().map(|z| powers(z)).collect();
    let cut_column = |i: usize, j: usize| -> Vec<f64> {
        let (c, s) = direction(j);
        let mut col = Vec::with_capacity(2 * d + 1);
        for v in &values[i] {
            col.push(c * v.re + s * v.im);
        }
        for v in &values[i] {
            col.push(-c * v.im + s * v.re);
        }
        col.push(1.0);
        col
    };
    let kappa = n as f64 * big_n as f64 * (std::f64::consts::PI / unit_disk_grid as f64 + 1e-15);
    let mut lp_min = f64::INFINITY;
    let mut certified = true;
    let mut samples = 0usize;
    let mut angles = vec![0usize; n];
    loop {
        let zeta: Vec<Complex64> = angles
            .iter()
            .map(|&k| Complex64::from_polar(1.0, 2.0 * std::f64::consts::PI * k as f64 / unit_disk_grid as f64))
            .collect();
        let (bound, ok) = normalized_lp(&values, &powers(&zeta), d, &cut_column)?;
        lp_min = lp_min.min(bound);
        certified &= ok;
        samples += 1;
        let mut i = 0;
        loop {
            if i == n {
                let value = if big_n == 0 { lp_min } else { (1.0 - kappa).max(0.0) * lp_min };
                return Ok(OracleReport { value, lp_min, kappa, certified, samples });
            }
            angles[i] += 1;
            if angles[i] < unit_disk_grid {
                break;
            }
            angles[i] = 0;
            i += 1;
        }
    }
}

/// Dual LP by column generation; returns the certified bound (or the floating
/// one with `false`).
fn normalized_lp(
    values: &[Vec<Complex64>],
    zeta_pows: &[Complex64],
    d: usize,
    cut_column: &dyn Fn(usize, usize) -> Vec<f64>,
) -> Result<(f64, bool)> {
    let rows = 2 * d + 1;
    let mut lp = StandardLp::new({
        let mut b = vec![0.0; rows];
        b[2 * d] = 1.0;
        b
    });
    // y1 (Re P(ζ) = 1) and y2 (Im P(ζ) = 0), split into signed parts
    let e1: Vec<f64> = zeta_pows.iter().map(|v| v.re).chain(zeta_pows.iter().map(|v| -v.im)).collect();
    let e2: Vec<f64> = zeta_pows.iter().map(|v| v.im).chain(zeta_pows.iter().map(|v| v.re)).collect();
    for (e, cost) in [(&e1, 1.0), (&e2, 0.0)] {
        let mut neg: Vec<f64> = e.iter().map(|v| -v).collect();
        neg.push(0.0);
        let pos: Vec<f64> = neg.iter().map(|v| -v).collect();
        lp.push_column(neg, cost);
        lp.push_column(pos, -cost);
    }
    // any subset of cuts gives a feasible restricted dual, hence a valid
    // bound; start from a spread of points and price in violated cuts
    let mut present: HashSet<(usize, usize)> = HashSet::new();
    let stride = (values.len() / 64).max(1);
    for i in (0..values.len()).step_by(stride) {
        for j in (0..CUTS).step_by(CUTS / 4) {
            lp.push_column(cut_column(i, j), 0.0);
            present.insert((i, j));
        }
    }
    let dirs: Vec<(f64, f64)> = (0..CUTS).map(direction).collect();
    let mut solution = simplex_max(&lp)?;
    for _round in 0..500 {
        let a = &solution.duals[..d];
        let b = &solution.duals[d..2 * d];
        let t = solution.duals[2 * d];
        // the cut value of (point i, direction j) is Re(e^{−iθ_j} P(x_i))
        // with P = −(a + ib)
        let mut violated: Vec<(f64, usize, usize)> = Vec::new();
        for (i, vals) in values.iter().enumerate() {
            let p: Complex64 = vals.iter().zip(a.iter().zip(b)).map(|(v, (&ar, &bi))| v * Complex64::new(-ar, -bi)).sum();
            let (j, g) = dirs
                .iter()
                .enumerate()
                .map(|(j, &(c, s))| (j, c * p.re + s * p.im))
                .max_by(|x, y| x.1.total_cmp(&y.1))
                .expect("cuts");
            if g - t > 1e-10 * (1.0 + t.abs()) && !present.contains(&(i, j)) {
                violated.push((g - t, i, j));
            }
        }
        if violated.is_empty() {
            break;
        }
        violated.sort_by(|x, y| y.0.total_cmp(&x.0));
        for &(_, i, j) in violated.iter().take(4 * rows) {
            lp.push_column(cut_column(i, j), 0.0);
            present.insert((i, j));
        }
        solution = simplex_max(&lp)?;
    }
    let float_bound = solution.objective;
    // the y columns are signed parts of free variables; only cut weights must
    // be nonnegative
    if let Some(basis) = solution.basis.iter().copied().collect::<Option<Vec<usize>>>() {
        if let Some(exact) = exact_basic_solution(&lp, &basis) {
            if basis.iter().zip(&exact).all(|(&j, v)| j < 4 || !num_traits::Signed::is_negative(v)) {
                let mut y1 = BigRational::from_integer(0.into());
                for (k, &j) in basis.iter().enumerate() {
                    if j == 0 {
                        y1 += &exact[k];
                    } else if j == 1 {
                        y1 -= &exact[k];
                    }
                }
                return Ok((rational_to_f64_down(&y1), true));
            }
        }
    }
    // degenerate basis: exact re-solve over the y columns and the cuts with
    // the smallest reduced cost; a restricted dual still bounds from below
    let mut ranked: Vec<(f64, usize)> = (4..lp.columns.len())
        .map(|j| {
            let dot: f64 = lp.columns[j].iter().zip(&solution.duals).map(|(a, y)| a * y).sum();
            (dot - lp.costs[j], j)
        })
        .collect();
    ranked.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut subset: Vec<usize> = (0..4).collect();
    subset.extend(solution.basis.iter().flatten().filter(|&&j| j >= 4));
    for &(_, j) in ranked.iter().take(8 * rows) {
        if !subset.contains(&j) {
            subset.push(j);
        }
    }
    match exact_simplex_max(&lp, &subset) {
        Some(v) => Ok((rational_to_f64_down(&v), true)),
        None => Ok((float_bound, false)),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::trace_space::disk_grid;

    #[test]
    fn half_disk_first_degree() {
        let w = build_witness(0.5, 1, 1, required_grid(0.5, 1)).unwrap();
        assert_eq!(w.eps_used, 0.125);
        let pts = w.points.points();
        // a maximal packing covers at ε, disjoint ε/2 disks fit in Δ(0, r + ε/2)
        let lo = (0.5f64 / 0.125).powi(2);
        let hi = ((0.5 + 0.0625) / 0.0625f64).powi(2);
        assert!((pts.len() as f64) >= lo && (pts.len() as f64) <= hi, "{}", pts.len());
        for i in 0..pts.len() {
            for j in 0..i {
                assert!(sup_dist(&pts[i], &pts[j]) > w.eps_used);
            }
        }
        // maximal among grid points
        for_each_grid_point(0.5, 1, w.grid, |z| {
            assert!(pts.iter().any(|p| sup_dist(p, &z) <= w.eps_used));
        });
    }

    #[test]
    fn rejects_bad_input() {
        assert!(build_witness(0.5, 0, 1, 100).is_err());
        assert!(matches!(build_witness(0.5, 1, 1, 10), Err(Error::GridTooCoarse { required: 33, got: 10 })));
    }

    #[test]
    fn eps_shrinks() {
        let e: Vec<f64> = (1..8).map(|k| witness_eps(0.5, k)).collect();
        assert!(e.windows(2).all(|w| w[1] < w[0]));
        assert!((witness_eps(0.5, 4) - 0.5 / 8.0 * 0.0625).abs() < 1e-15);
    }

    #[test]
    fn union_is_monotone() {
        let u2 = build_union_witness(2, 1).unwrap();
        let w = build_witness(0.5, 2, 1, required_grid(0.5, 2)).unwrap();
        assert_eq!(u2.len(), w.points.len());
        let u3 = build_union_witness(3, 1).unwrap();
        let set: HashSet<Vec<u64>> = u3.points().iter().map(|z| vec![z[0].re.to_bits(), z[0].im.to_bits()]).collect();
        assert!(u2.points().iter().all(|z| set.contains(&vec![z[0].re.to_bits(), z[0].im.to_bits()])));
    }

    #[test]
    fn constants_give_one() {
        let w = build_witness(0.5, 1, 1, required_grid(0.5, 1)).unwrap();
        let r = cheb_lower_oracle(&w.points, 0, 8).unwrap();
        assert!((r.value - 1.0).abs() < 1e-12, "{r:?}");
        assert!(r.certified);
    }

    #[test]
    fn first_degree_bound() {
        let w = build_witness(0.5, 1, 1, required_grid(0.5, 1)).unwrap();
        let r = cheb_lower_oracle(&w.points, 1, 128).unwrap();
        assert!(r.certified);
        assert!(r.value >= 0.25 - 1e-6, "{r:?}");
    }

    #[test]
    fn dense_disk_matches_monomial() {
        let r = 0.5;
        let pts = disk_grid(Complex64::new(0.0, 0.0), r, 25);
        let x = PointCloud::with_inner_radius(pts, Polydisk::origin(1, 1.0).unwrap(), r).unwrap();
        let rep = cheb_lower_oracle(&x, 2, 256).unwrap();
        // z² has max r² on the sample, so the minimum is at most r²
        assert!(rep.value <= r * r + 1e-9, "{rep:?}");
        assert!(rep.value >= 0.9 * r * r, "{rep:?}");
        assert!(rep.certified);
    }

    #[test]
    fn more_points_never_lower() {
        let w = build_witness(0.5, 1, 1, required_grid(0.5, 1)).unwrap();
        let half: Vec<Vec<Complex64>> = w.points.points().iter().step_by(2).cloned().collect();
        let small = PointCloud::with_inner_radius(half, Polydisk::origin(1, 1.0).unwrap(), 0.5).unwrap();
        let a = cheb_lower_oracle(&small, 1, 64).unwrap();
        let b = cheb_lower_oracle(&w.points, 1, 64).unwrap();
        assert!(b.value >= a.value - 1e-9);
    }
}
