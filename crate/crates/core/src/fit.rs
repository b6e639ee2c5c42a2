//! Weighted least-squares fits used by the Ψ estimator.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

/// Result of a weighted straight-line fit `y ≈ intercept + slope x`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LineFit {
    pub slope: f64,
    pub intercept: f64,
    pub residuals: Vec<f64>,
    /// Weighted residual sum of squares.
    pub rss: f64,
}

pub fn weighted_line_fit(x: &[f64], y: &[f64], w: &[f64]) -> Result<LineFit> {
    if x.len() != y.len() || x.len() != w.len() {
        return Err(invalid("fit inputs differ in length"));
    }
    if x.len() < 2 {
        return Err(invalid("fit needs at least two points"));
    }
    let sw: f64 = w.iter().sum();
    let mx = x.iter().zip(w).map(|(a, b)| a * b).sum::<f64>() / sw;
    let my = y.iter().zip(w).map(|(a, b)| a * b).sum::<f64>() / sw;
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    for i in 0..x.len() {
        sxx += w[i] * (x[i] - mx) * (x[i] - mx);
        sxy += w[i] * (x[i] - mx) * (y[i] - my);
    }
    if sxx <= 0.0 {
        return Err(invalid("fit abscissae are all equal"));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let residuals: Vec<f64> = x.iter().zip(y).map(|(a, b)| b - intercept - slope * a).collect();
    let rss = residuals.iter().zip(w).map(|(r, ww)| ww * r * r).sum();
    Ok(LineFit { slope, intercept, residuals, rss })
}

/// Fit of `log h ≈ b + p log(L + c)` with `L = log(1/ε)` and a shift `c ≥ 0`.
///
/// Entropies of the form `A (L + c)^p` are pure power laws in `L + c`; the
/// shift absorbs the lower-order terms that otherwise bias the slope at
/// moderate ε. `c = 0` reduces to the plain log-log slope.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ShiftedFit {
    pub exponent: f64,
    pub intercept: f64,
    pub shift: f64,
    pub residuals: Vec<f64>,
    pub rss: f64,
}

/// Largest shift searched by [`shifted_log_fit`].
pub const MAX_SHIFT: f64 = 20.0;

pub fn shifted_log_fit(log_inv_eps: &[f64], log_h: &[f64], w: &[f64]) -> Result<ShiftedFit> {
    let eval = |c: f64| -> Result<LineFit> {
        let x: Vec<f64> = log_inv_eps.iter().map(|l| (l + c).ln()).collect();
        weighted_line_fit(&x, log_h, w)
    };
    let steps = 400;
    let mut best_c = 0.0;
    let mut best = eval(0.0)?;
    for i in 1..=steps {
        let c = MAX_SHIFT * i as f64 / steps as f64;
        let f = eval(c)?;
        if f.rss < best.rss {
            best = f;
            best_c = c;
        }
    }
    // golden-section refinement inside the bracketing grid cells
    let h = MAX_SHIFT / steps as f64;
    let (mut a, mut b) = ((best_c - h).max(0.0), (best_c + h).min(MAX_SHIFT));
    let g = (5f64.sqrt() - 1.0) / 2.0;
    for _ in 0..40 {
        let c1 = b - g * (b - a);
        let c2 = a + g * (b - a);
        if eval(c1)?.rss < eval(c2)?.rss {
            b = c2;
        } else {
            a = c1;
        }
    }
    let mid = 0.5 * (a + b);
    let f = eval(mid)?;
    if f.rss < best.rss {
        best = f;
        best_c = mid;
    }
    Ok(ShiftedFit { exponent: best.slope, intercept: best.intercept, shift: best_c, residuals: best.residuals, rss: best.rss })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_line() {
        let x = [0.0, 1.0, 2.0, 3.0];
        let y = [1.0, 3.0, 5.0, 7.0];
        let f = weighted_line_fit(&x, &y, &[1.0; 4]).unwrap();
        assert!((f.slope - 2.0).abs() < 1e-12 && (f.intercept - 1.0).abs() < 1e-12);
    }

    #[test]
    fn recovers_shifted_power_law() {
        let l: Vec<f64> = (0..8).map(|i| 4.0 + 1.2 * i as f64).collect();
        let y: Vec<f64> = l.iter().map(|v| 0.3 + 2.0 * (v + 5.0).ln()).collect();
        let f = shifted_log_fit(&l, &y, &[1.0; 8]).unwrap();
        assert!((f.exponent - 2.0).abs() < 1e-4, "{f:?}");
        assert!((f.shift - 5.0).abs() < 1e-2);
    }
}
