//! Dense two-phase simplex for small standard-form linear programs, with
//! exact rational re-solution of the final basis.
//!
//! Problems have the form `maximize cᵀx` subject to `Ax = b`, `x ≥ 0`, with few
//! rows and possibly many columns.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, Zero};

use crate::error::{Error, Result};

const PIVOT_TOL: f64 = 1e-11;
const FEAS_TOL: f64 = 1e-9;

/// Standard-form problem stored by columns.
#[derive(Clone, Debug, Default)]
pub struct StandardLp {
    pub rows: usize,
    pub columns: Vec<Vec<f64>>,
    pub costs: Vec<f64>,
    pub rhs: Vec<f64>,
}

impl StandardLp {
    pub fn new(rhs: Vec<f64>) -> Self {
        StandardLp { rows: rhs.len(), columns: Vec::new(), costs: Vec::new(), rhs }
    }

    pub fn push_column(&mut self, column: Vec<f64>, cost: f64) -> usize {
        debug_assert_eq!(column.len(), self.rows);
        self.columns.push(column);
        self.costs.push(cost);
        self.columns.len() - 1
    }
}

#[derive(Clone, Debug)]
pub struct LpSolution {
    pub objective: f64,
    pub x: Vec<f64>,
    /// Basic column per row (`None` for a leftover artificial at zero level).
    pub basis: Vec<Option<usize>>,
    /// Simplex multipliers `y` with `Aᵀy ≥ c` at optimality.
    pub duals: Vec<f64>,
}

struct Tableau {
    // rows × (ncols + 1), last entry is the right-hand side
    t: Vec<Vec<f64>>,
    basis: Vec<usize>,
    ncols: usize,
}

impl Tableau {
    fn pivot(&mut self, r: usize, c: usize) {
        let p = self.t[r][c];
        for v in self.t[r].iter_mut() {
            *v /= p;
        }
        let pr = self.t[r].clone();
        for (i, row) in self.t.iter_mut().enumerate() {
            if i == r {
                continue;
            }
            let f = row[c];
            if f != 0.0 {
                for (v, w) in row.iter_mut().zip(&pr) {
                    *v -= f * w;
                }
            }
        }
        self.basis[r] = c;
    }

    /// Maximizes `cost · x` over the allowed columns; Bland's rule.
    fn optimize(&mut self, cost: &[f64], allowed: usize) -> Result<()> {
        let m = self.basis.len();
        for _ in 0..50_000 {
            let mut enter = None;
            for j in 0..allowed {
                if self.basis.contains(&j) {
                    continue;
                }
                let mut reduced = cost[j];
                for i in 0..m {
                    reduced -= cost[self.basis[i]] * self.t[i][j];
                }
                if reduced > PIVOT_TOL {
                    enter = Some(j);
                    break;
                }
            }
            let Some(j) = enter else { return Ok(()) };
            let mut leave: Option<(usize, f64)> = None;
            for i in 0..m {
                let a = self.t[i][j];
                if a > PIVOT_TOL {
                    let ratio = self.t[i][self.ncols] / a;
                    let better = match leave {
                        None => true,
                        Some((li, lr)) => ratio < lr - 1e-15 || (ratio <= lr + 1e-15 && self.basis[i] < self.basis[li]),
                    };
                    if better {
                        leave = Some((i, ratio));
                    }
                }
            }
            let Some((i, _)) = leave else {
                return Err(Error::LinearProgram("unbounded objective".into()));
            };
            self.pivot(i, j);
        }
        Err(Error::LinearProgram("iteration limit".into()))
    }
}

/// Solves `maximize cᵀx, Ax = b, x ≥ 0` by the two-phase simplex method.
pub fn simplex_max(lp: &StandardLp) -> Result<LpSolution> {
    let m = lp.rows;
    let n = lp.columns.len();
    // columns: originals, then one artificial per row
    let total = n + m;
    let mut t = vec![vec![0.0; total + 1]; m];
    for i in 0..m {
        let sign = if lp.rhs[i] < 0.0 { -1.0 } else { 1.0 };
        for (j, col) in lp.columns.iter().enumerate() {
            t[i][j] = sign * col[i];
        }
        t[i][n + i] = 1.0;
        t[i][total] = sign * lp.rhs[i];
    }
    let mut tab = Tableau { t, basis: (n..n + m).collect(), ncols: total };
    let mut phase1 = vec![0.0; total];
    for v in phase1.iter_mut().skip(n) {
        *v = -1.0;
    }
    tab.optimize(&phase1, total)?;
    let infeas: f64 = (0..m).filter(|&i| tab.basis[i] >= n).map(|i| tab.t[i][total]).sum();
    if infeas > FEAS_TOL * (1.0 + lp.rhs.iter().map(|v| v.abs()).sum::<f64>()) {
        return Err(Error::LinearProgram("infeasible".into()));
    }
    // drive artificials out of the basis where possible
    for i in 0..m {
        if tab.basis[i] >= n {
            if let Some(j) = (0..n).find(|&j| !tab.basis.contains(&j) && tab.t[i][j].abs() > 1e-9) {
                tab.pivot(i, j);
            }
        }
    }
    let mut cost = lp.costs.clone();
    cost.extend(std::iter::repeat(-1e9).take(m));
    tab.optimize(&cost, n)?;
    let mut x = vec![0.0; n];
    let mut basis = vec![None; m];
    for i in 0..m {
        let j = tab.basis[i];
        if j < n {
            x[j] = tab.t[i][total];
            basis[i] = Some(j);
        }
    }
    let objective = x.iter().zip(&lp.costs).map(|(a, b)| a * b).sum();
    // duals from the basis matrix: Bᵀ y = c_B
    let duals = basis_duals(lp, &basis).unwrap_or_else(|| vec![f64::NAN; m]);
    Ok(LpSolution { objective, x, basis, duals })
}

fn basis_duals(lp: &StandardLp, basis: &[Option<usize>]) -> Option<Vec<f64>> {
    let m = lp.rows;
    let mut a = vec![vec![0.0; m + 1]; m];
    for (k, b) in basis.iter().enumerate() {
        let j = (*b)?;
        for i in 0..m {
            a[k][i] = lp.columns[j][i];
        }
        a[k][m] = lp.costs[j];
    }
    solve_dense(a)
}

fn solve_dense(mut a: Vec<Vec<f64>>) -> Option<Vec<f64>> {
    let m = a.len();
    for c in 0..m {
        let p = (c..m).max_by(|&i, &j| a[i][c].abs().total_cmp(&a[j][c].abs()))?;
        if a[p][c].abs() < 1e-14 {
            return None;
        }
        a.swap(c, p);
        for i in 0..m {
            if i != c {
                let f = a[i][c] / a[c][c];
                if f != 0.0 {
                    for k in c..=m {
                        a[i][k] -= f * a[c][k];
                    }
                }
            }
        }
    }
    Some((0..m).map(|i| a[i][m] / a[i][i]).collect())
}

fn rat(x: f64) -> BigRational {
    BigRational::from_float(x).unwrap_or_else(|| BigRational::from_integer(BigInt::zero()))
}

/// Solves `Σ_k x_k A_{basis_k} = b` exactly, treating every `f64` entry as the
/// exact dyadic it represents. `None` when the basis is singular.
pub fn exact_basic_solution(lp: &StandardLp, basis: &[usize]) -> Option<Vec<BigRational>> {
    let m = lp.rows;
    if basis.len() != m {
        return None;
    }
    let mut a: Vec<Vec<BigRational>> = (0..m)
        .map(|i| {
            let mut row: Vec<BigRational> = basis.iter().map(|&j| rat(lp.columns[j][i])).collect();
            row.push(rat(lp.rhs[i]));
            row
        })
        .collect();
    for c in 0..m {
        let p = (c..m).find(|&i| !a[i][c].is_zero())?;
        a.swap(c, p);
        let piv = a[c][c].clone();
        for k in c..=m {
            let v = &a[c][k] / &piv;
            a[c][k] = v;
        }
        for i in 0..m {
            if i != c && !a[i][c].is_zero() {
                let f = a[i][c].clone();
                for k in c..=m {
                    let v = &a[c][k] * &f;
                    a[i][k] -= v;
                }
            }
        }
    }
    Some(a.into_iter().map(|r| r[m].clone()).collect())
}

/// Exact two-phase simplex (Bland's rule) over the given columns only.
/// Returns the optimal objective, or `None` when infeasible or unbounded.
pub fn exact_simplex_max(lp: &StandardLp, columns: &[usize]) -> Option<BigRational> {
    let m = lp.rows;
    let n = columns.len();
    let total = n + m;
    let zero = BigRational::zero();
    let one = BigRational::from_integer(BigInt::from(1));
    let mut t: Vec<Vec<BigRational>> = (0..m)
        .map(|i| {
            let neg = lp.rhs[i] < 0.0;
            let sgn = |v: BigRational| if neg { -v } else { v };
            let mut row: Vec<BigRational> = columns.iter().map(|&j| sgn(rat(lp.columns[j][i]))).collect();
            row.extend((0..m).map(|k| if k == i { one.clone() } else { zero.clone() }));
            row.push(sgn(rat(lp.rhs[i])));
            row
        })
        .collect();
    let mut basis: Vec<usize> = (n..total).collect();
    let pivot = |t: &mut Vec<Vec<BigRational>>, basis: &mut Vec<usize>, r: usize, c: usize| {
        let p = t[r][c].clone();
        for v in t[r].iter_mut() {
            *v = &*v / &p;
        }
        let pr = t[r].clone();
        for (i, row) in t.iter_mut().enumerate() {
            if i != r && !row[c].is_zero() {
                let f = row[c].clone();
                for (v, w) in row.iter_mut().zip(&pr) {
                    *v -= &f * w;
                }
            }
        }
        basis[r] = c;
    };
    let run = |t: &mut Vec<Vec<BigRational>>, basis: &mut Vec<usize>, cost: &[BigRational], allowed: usize| -> Option<()> {
        loop {
            let enter = (0..allowed).find(|&j| {
                !basis.contains(&j) && {
                    let mut red = cost[j].clone();
                    for i in 0..m {
                        red -= &cost[basis[i]] * &t[i][j];
                    }
                    red.is_positive()
                }
            });
            let Some(j) = enter else { return Some(()) };
            let mut leave: Option<(usize, BigRational)> = None;
            for i in 0..m {
                if t[i][j].is_positive() {
                    let ratio = &t[i][total] / &t[i][j];
                    let better = match &leave {
                        None => true,
                        Some((li, lr)) => ratio < *lr || (ratio == *lr && basis[i] < basis[*li]),
                    };
                    if better {
                        leave = Some((i, ratio));
                    }
                }
            }
            let (i, _) = leave?;
            pivot(t, basis, i, j);
        }
    };
    let mut phase1 = vec![zero.clone(); total];
    for v in phase1.iter_mut().skip(n) {
        *v = -one.clone();
    }
    run(&mut t, &mut basis, &phase1, total)?;
    if (0..m).any(|i| basis[i] >= n && !t[i][total].is_zero()) {
        return None;
    }
    for i in 0..m {
        if basis[i] >= n {
            if let Some(j) = (0..n).find(|&j| !basis.contains(&j) && !t[i][j].is_zero()) {
                pivot(&mut t, &mut basis, i, j);
            }
        }
    }
    // rows still holding an artificial are zero on every original column
    let mut cost: Vec<BigRational> = columns.iter().map(|&j| rat(lp.costs[j])).collect();
    cost.extend((0..m).map(|_| zero.clone()));
    run(&mut t, &mut basis, &cost, n)?;
    let mut obj = zero;
    for i in 0..m {
        if basis[i] < n {
            obj += &cost[basis[i]] * &t[i][total];
        }
    }
    Some(obj)
}

/// Largest `f64` not above `r`.
pub fn rational_to_f64_down(r: &BigRational) -> f64 {
    let approx = num_traits::ToPrimitive::to_f64(r).unwrap_or(if r.is_negative() { f64::MIN } else { f64::MAX });
    let mut v = approx;
    while rat(v) > *r {
        v = v.next_down();
    }
    v
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_textbook_problem() {
        // maximize 3x + 2y s.t. x + y + s1 = 4, x + 3y + s2 = 6
        let mut lp = StandardLp::new(vec![4.0, 6.0]);
        lp.push_column(vec![1.0, 1.0], 3.0);
        lp.push_column(vec![1.0, 3.0], 2.0);
        lp.push_column(vec![1.0, 0.0], 0.0);
        lp.push_column(vec![0.0, 1.0], 0.0);
        let s = simplex_max(&lp).unwrap();
        assert!((s.objective - 12.0).abs() < 1e-9);
        assert!((s.duals[0] - 3.0).abs() < 1e-9);
        let basis: Vec<usize> = s.basis.iter().map(|b| b.unwrap()).collect();
        let exact = exact_basic_solution(&lp, &basis).unwrap();
        let x0 = basis.iter().position(|&j| j == 0).unwrap();
        assert_eq!(exact[x0], BigRational::from_integer(BigInt::from(4)));
    }

    #[test]
    fn infeasible_detected() {
        // x = −1 with x ≥ 0
        let mut lp = StandardLp::new(vec![-1.0]);
        lp.push_column(vec![1.0], 0.0);
        assert!(matches!(simplex_max(&lp), Err(Error::LinearProgram(_))));
    }

    #[test]
    fn unbounded_detected() {
        // x − y = 0, maximize x
        let mut lp = StandardLp::new(vec![0.0]);
        lp.push_column(vec![1.0], 1.0);
        lp.push_column(vec![-1.0], 0.0);
        assert!(matches!(simplex_max(&lp), Err(Error::LinearProgram(_))));
    }

    #[test]
    fn exact_matches_float() {
        let mut lp = StandardLp::new(vec![4.0, 6.0]);
        lp.push_column(vec![1.0, 1.0], 3.0);
        lp.push_column(vec![1.0, 3.0], 2.0);
        lp.push_column(vec![1.0, 0.0], 0.0);
        lp.push_column(vec![0.0, 1.0], 0.0);
        assert_eq!(exact_simplex_max(&lp, &[0, 1, 2, 3]), Some(BigRational::from_integer(BigInt::from(12))));
        // without x the best is y = 2
        assert_eq!(exact_simplex_max(&lp, &[1, 2, 3]), Some(BigRational::from_integer(BigInt::from(4))));
        let mut bad = StandardLp::new(vec![-1.0]);
        bad.push_column(vec![1.0], 0.0);
        assert_eq!(exact_simplex_max(&bad, &[0]), None);
    }

    #[test]
    fn directed_conversion() {
        let third = BigRational::new(BigInt::from(1), BigInt::from(3));
        let v = rational_to_f64_down(&third);
        assert!(rat(v) <= third);
        assert!(rat(v.next_up()) > third);
    }
}
