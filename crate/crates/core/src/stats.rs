//! Small statistics toolkit: weighted line fits, Kolmogorov-Smirnov
//! distances and sample moments.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Sample mean with its standard error.
pub fn mean_and_stderr(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    if values.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

/// Binomial proportion `k / n` with standard error `sqrt(p(1-p)/n)`.
pub fn proportion(successes: u64, trials: u64) -> (f64, f64) {
    let p = successes as f64 / trials as f64;
    (p, (p * (1.0 - p) / trials as f64).sqrt())
}

/// Straight-line fit `y = intercept + slope * x`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LineFit {
    pub slope: f64,
    pub intercept: f64,
    pub slope_stderr: f64,
    pub intercept_stderr: f64,
    pub r2: f64,
    /// Weighted residual sum of squares.
    pub chi2: f64,
    pub points: usize,
}

/// Least-squares line. With `weights = Some(w)`, `w_k = 1/var(y_k)` and the
/// standard errors are the known-variance ones, inflated by
/// `sqrt(chi2/(k-2))` when the scatter exceeds the stated errors. Without
/// weights, ordinary least squares with residual-variance standard errors.
pub fn fit_line(x: &[f64], y: &[f64], weights: Option<&[f64]>) -> Result<LineFit> {
    let k = x.len();
    if y.len() != k || weights.is_some_and(|w| w.len() != k) {
        return Err(Error::param("fit", "x, y and weights must have equal lengths"));
    }
    if k < 3 {
        return Err(Error::InsufficientPoints { needed: 3, found: k });
    }
    let w: Vec<f64> = weights.map_or_else(|| vec![1.0; k], <[f64]>::to_vec);
    if w.iter().any(|&v| !(v > 0.0 && v.is_finite())) {
        return Err(Error::param("weights", "must be positive and finite"));
    }
    let s: f64 = w.iter().sum();
    let sx: f64 = w.iter().zip(x).map(|(w, x)| w * x).sum();
    let sy: f64 = w.iter().zip(y).map(|(w, y)| w * y).sum();
    let (mx, my) = (sx / s, sy / s);
    let sxx: f64 = w.iter().zip(x).map(|(w, x)| w * (x - mx).powi(2)).sum();
    let sxy: f64 = w.iter().zip(x).zip(y).map(|((w, x), y)| w * (x - mx) * (y - my)).sum();
    let syy: f64 = w.iter().zip(y).map(|(w, y)| w * (y - my).powi(2)).sum();
    if !(sxx > 0.0) {
        return Err(Error::param("fit", "x values are all equal"));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let chi2: f64 = (0..k).map(|i| w[i] * (y[i] - intercept - slope * x[i]).powi(2)).sum();
    let dof = (k - 2) as f64;
    let scale = match weights {
        Some(_) => (chi2 / dof).max(1.0),
        None => chi2 / dof,
    };
    let slope_var = scale / sxx;
    let intercept_var = scale * (1.0 / s + mx * mx / sxx);
    Ok(LineFit {
        slope,
        intercept,
        slope_stderr: slope_var.sqrt(),
        intercept_stderr: intercept_var.sqrt(),
        r2: if syy > 0.0 { 1.0 - chi2 / syy } else { 1.0 },
        chi2,
        points: k,
    })
}

/// `sup_x |F_n(x) - F(x)|` for the sample against a continuous CDF.
pub fn ks_distance(sample: &[f64], cdf: impl Fn(f64) -> f64) -> f64 {
    let mut v = sample.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len() as f64;
    v.iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = cdf(x);
            (f - i as f64 / n).max((i + 1) as f64 / n - f)
        })
        .fold(0.0, f64::max)
}

/// Survival function of the Kolmogorov distribution,
/// `Q(l) = 2 sum_{k>=1} (-1)^{k-1} exp(-2 k^2 l^2)`.
pub fn kolmogorov_sf(lambda: f64) -> f64 {
    if lambda < 0.2 {
        return 1.0;
    }
    let mut sum = 0.0;
    for k in 1..=100 {
        let k = k as f64;
        let term = (-2.0 * k * k * lambda * lambda).exp();
        sum += if k as u64 % 2 == 1 { term } else { -term };
        if term < 1e-17 {
            break;
        }
    }
    (2.0 * sum).clamp(0.0, 1.0)
}

/// Two-sample Kolmogorov-Smirnov statistic and asymptotic p-value (with the
/// usual small-sample correction of the argument).
pub fn ks_two_sample(a: &[f64], b: &[f64]) -> Result<(f64, f64)> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::param("sample", "KS test needs two nonempty samples"));
    }
    let mut a = a.to_vec();
    let mut b = b.to_vec();
    a.sort_by(f64::total_cmp);
    b.sort_by(f64::total_cmp);
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let (mut i, mut j, mut d) = (0usize, 0usize, 0.0f64);
    while i < a.len() && j < b.len() {
        let x = a[i].min(b[j]);
        while i < a.len() && a[i] <= x {
            i += 1;
        }
        while j < b.len() && b[j] <= x {
            j += 1;
        }
        d = d.max((i as f64 / na - j as f64 / nb).abs());
    }
    let ne = (na * nb / (na + nb)).sqrt();
    Ok((d, kolmogorov_sf((ne + 0.12 + 0.11 / ne) * d)))
}
