//! LLL reduction of integer lattices.
//!
//! Rows are exact big integers; Gram–Schmidt data is kept in `f64` in the
//! Schnorr–Euchner style, with exact dot products whenever the floating one
//! loses too many bits to cancellation. Only the reduced basis is returned, so
//! any numerical drift affects reduction quality, never exactness.

use num_bigint::BigInt;
use num_traits::{FromPrimitive, ToPrimitive, Zero};

use crate::error::{invalid, Result};

/// Lovász constant used by [`lll_reduce`] callers that have no preference.
pub const DEFAULT_DELTA: f64 = 0.99;

fn to_f64(v: &BigInt) -> f64 {
    v.to_f64().unwrap_or(if v.sign() == num_bigint::Sign::Minus { f64::MIN } else { f64::MAX })
}

fn dot_f64(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn dot_exact(a: &[BigInt], b: &[BigInt]) -> BigInt {
    let mut s = BigInt::zero();
    for (x, y) in a.iter().zip(b) {
        if !x.is_zero() && !y.is_zero() {
            s += x * y;
        }
    }
    s
}

/// Squared Euclidean norm of an integer row.
pub fn norm_sqr(row: &[BigInt]) -> BigInt {
    dot_exact(row, row)
}

struct Reducer<'a> {
    rows: &'a mut Vec<Vec<BigInt>>,
    approx: Vec<Vec<f64>>,
    r: Vec<Vec<f64>>,
    mu: Vec<Vec<f64>>,
    b_star: Vec<f64>,
}

impl Reducer<'_> {
    fn refresh_approx(&mut self, i: usize) {
        self.approx[i] = self.rows[i].iter().map(to_f64).collect();
    }

    fn inner(&self, i: usize, j: usize) -> f64 {
        let v = dot_f64(&self.approx[i], &self.approx[j]);
        let ni = dot_f64(&self.approx[i], &self.approx[i]).sqrt();
        let nj = dot_f64(&self.approx[j], &self.approx[j]).sqrt();
        // half of the double mantissa lost: fall back to the exact product
        if v.abs() < ni * nj * 2f64.powi(-26) || !v.is_finite() {
            to_f64(&dot_exact(&self.rows[i], &self.rows[j]))
        } else {
            v
        }
    }

    fn gram_schmidt_row(&mut self, k: usize) {
        for j in 0..=k {
            let mut rkj = if j == k { dot_f64(&self.approx[k], &self.approx[k]) } else { self.inner(k, j) };
            for l in 0..j {
                rkj -= self.mu[j][l] * self.r[k][l];
            }
            self.r[k][j] = rkj;
            if j < k {
                self.mu[k][j] = rkj / self.b_star[j];
            }
        }
        self.b_star[k] = self.r[k][k];
    }

    fn size_reduce(&mut self, k: usize) -> Result<()> {
        for _round in 0..64 {
            self.gram_schmidt_row(k);
            let mut large = false;
            let mut changed = false;
            for j in (0..k).rev() {
                let m = self.mu[k][j];
                if m.abs() <= 0.51 {
                    continue;
                }
                let q = m.round();
                if q.abs() > 2f64.powi(26) {
                    large = true;
                }
                let qi = BigInt::from_f64(q).ok_or_else(|| invalid("non-finite reduction coefficient"))?;
                let (head, tail) = self.rows.split_at_mut(k);
                let rj = &head[j];
                for (a, b) in tail[0].iter_mut().zip(rj) {
                    if !b.is_zero() {
                        *a -= &qi * b;
                    }
                }
                for l in 0..j {
                    self.mu[k][l] -= q * self.mu[j][l];
                }
                self.mu[k][j] -= q;
                changed = true;
            }
            if !changed {
                return Ok(());
            }
            self.refresh_approx(k);
            if !large {
                self.gram_schmidt_row(k);
                return Ok(());
            }
        }
        Ok(())
    }
}

/// LLL-reduces the rows in place with Lovász constant `delta ∈ (1/4, 1)`.
///
/// Rows must be linearly independent and all of the same length.
pub fn lll_reduce(rows: &mut Vec<Vec<BigInt>>, delta: f64) -> Result<()> {
    if !(delta > 0.25 && delta < 1.0) {
        return Err(invalid("delta must lie in (1/4, 1)"));
    }
    let d = rows.len();
    if d == 0 {
        return Ok(());
    }
    let width = rows[0].len();
    if rows.iter().any(|r| r.len() != width) {
        return Err(invalid("rows of different lengths"));
    }
    let mut red = Reducer {
        approx: rows.iter().map(|r| r.iter().map(to_f64).collect()).collect(),
        r: vec![vec![0.0; d]; d],
        mu: vec![vec![0.0; d]; d],
        b_star: vec![0.0; d],
        rows,
    };
    red.gram_schmidt_row(0);
    if red.b_star[0] == 0.0 {
        return Err(invalid("zero row in lattice basis"));
    }
    let mut k = 1;
    let mut iterations: u64 = 0;
    let limit = 200 * (d as u64).pow(3) + 100_000;
    while k < d {
        iterations += 1;
        if iterations > limit {
            return Err(invalid("lattice reduction did not converge"));
        }
        red.size_reduce(k)?;
        let mu = red.mu[k][k - 1];
        if red.b_star[k] < (delta - mu * mu) * red.b_star[k - 1] {
            red.rows.swap(k, k - 1);
            red.approx.swap(k, k - 1);
            red.gram_schmidt_row(k - 1);
            k = if k > 1 { k - 1 } else { 1 };
            if k == 1 {
                red.gram_schmidt_row(0);
            }
        } else {
            k += 1;
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn rows(v: &[&[i64]]) -> Vec<Vec<BigInt>> {
        v.iter().map(|r| r.iter().map(|&x| BigInt::from(x)).collect()).collect()
    }

    fn det2(r: &[Vec<BigInt>]) -> BigInt {
        &r[0][0] * &r[1][1] - &r[0][1] * &r[1][0]
    }

    #[test]
    fn reduces_skewed_plane_lattice() {
        let mut b = rows(&[&[1, 0], &[1000, 1]]);
        lll_reduce(&mut b, 0.99).unwrap();
        let n0 = norm_sqr(&b[0]);
        assert_eq!(n0, BigInt::from(1));
        assert_eq!(det2(&b).magnitude(), &num_bigint::BigUint::from(1u32));
    }

    #[test]
    fn finds_small_integer_relation() {
        // 1·a + 2·b − 1·c = 0 hidden behind a large weight
        let w = 1i64 << 40;
        let mut b = rows(&[&[1, 0, 0, w], &[0, 1, 0, 2 * w], &[0, 0, 1, 5 * w]]);
        lll_reduce(&mut b, 0.99).unwrap();
        let best = b.iter().min_by_key(|r| norm_sqr(r)).unwrap();
        assert!(best[3].is_zero());
        assert!(norm_sqr(best) <= BigInt::from(6));
    }

    proptest! {
        #[test]
        fn first_vector_is_not_longer_and_lattice_kept(a in -50i64..50, b in -50i64..50, c in -50i64..50, e in -50i64..50) {
            prop_assume!(a * e - b * c != 0);
            let orig = rows(&[&[a, b], &[c, e]]);
            let mut red = orig.clone();
            lll_reduce(&mut red, 0.99).unwrap();
            prop_assert_eq!(num_traits::Signed::abs(&det2(&red)), num_traits::Signed::abs(&det2(&orig)));
            let min_orig = orig.iter().map(|r| norm_sqr(r)).min().unwrap();
            prop_assert!(norm_sqr(&red[0]) <= min_orig);
        }
    }
}
