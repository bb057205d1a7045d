//! Ordinary least squares for log-log exponent fits.

use crate::error::{KakeyaError, Result};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegressionResult {
    pub exponent: f64,
    pub intercept: f64,
    pub r_squared: f64,
    /// (log δ, log value) pairs as fitted.
    pub points: Vec<(f64, f64)>,
}

/// Fits y = exponent·x + intercept.
pub fn linear_fit(points: &[(f64, f64)]) -> Result<RegressionResult> {
    if points.len() < 3 {
        return Err(KakeyaError::Numeric(format!("regression needs at least 3 points, got {}", points.len())));
    }
    if points.iter().any(|(x, y)| !x.is_finite() || !y.is_finite()) {
        return Err(KakeyaError::Numeric("non-finite regression input".into()));
    }
    let k = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / k;
    let my = points.iter().map(|p| p.1).sum::<f64>() / k;
    let sxx: f64 = points.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let syy: f64 = points.iter().map(|p| (p.1 - my).powi(2)).sum();
    if sxx <= 1e-300 {
        return Err(KakeyaError::Numeric("degenerate regression: all x equal".into()));
    }
    let slope = sxy / sxx;
    let r2 = if syy <= 1e-300 { 1.0 } else { (sxy * sxy / (sxx * syy)).clamp(0.0, 1.0) };
    Ok(RegressionResult { exponent: slope, intercept: my - slope * mx, r_squared: r2, points: points.to_vec() })
}

/// Multiple regression y = b0 + Σ b_k x_k via normal equations.
/// Returns (coefficients with intercept first, r²).
pub fn multi_fit(xs: &[Vec<f64>], ys: &[f64]) -> Result<(Vec<f64>, f64)> {
    let n = ys.len();
    if n == 0 || xs.len() != n {
        return Err(KakeyaError::Numeric("regression shape mismatch".into()));
    }
    let p = xs[0].len() + 1;
    if n < p + 1 {
        return Err(KakeyaError::Numeric("too few observations".into()));
    }
    let row = |i: usize| -> Vec<f64> {
        let mut r = Vec::with_capacity(p);
        r.push(1.0);
        r.extend_from_slice(&xs[i]);
        r
    };
    let mut a = vec![vec![0.0; p + 1]; p];
    for i in 0..n {
        let r = row(i);
        for u in 0..p {
            for v in 0..p {
                a[u][v] += r[u] * r[v];
            }
            a[u][p] += r[u] * ys[i];
        }
    }
    // Gauss-Jordan with partial pivoting
    for c in 0..p {
        let piv = (c..p).max_by(|&x, &y| a[x][c].abs().total_cmp(&a[y][c].abs())).unwrap();
        if a[piv][c].abs() < 1e-12 {
            return Err(KakeyaError::Numeric("singular design matrix".into()));
        }
        a.swap(c, piv);
        let d = a[c][c];
        for v in c..=p {
            a[c][v] /= d;
        }
        for u in 0..p {
            if u != c {
                let f = a[u][c];
                if f != 0.0 {
                    for v in c..=p {
                        a[u][v] -= f * a[c][v];
                    }
                }
            }
        }
    }
    let beta: Vec<f64> = (0..p).map(|u| a[u][p]).collect();
    let my = ys.iter().sum::<f64>() / n as f64;
    let mut ss_res = 0.0;
    let mut ss_tot = 0.0;
    for i in 0..n {
        let r = row(i);
        let pred: f64 = r.iter().zip(&beta).map(|(x, b)| x * b).sum();
        ss_res += (ys[i] - pred).powi(2);
        ss_tot += (ys[i] - my).powi(2);
    }
    let r2 = if ss_tot <= 1e-300 { 1.0 } else { (1.0 - ss_res / ss_tot).clamp(0.0, 1.0) };
    Ok((beta, r2))
}
