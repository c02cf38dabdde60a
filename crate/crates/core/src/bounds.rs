//! Closed-form comparison bounds for order statistics of two standard
//! Gaussian arrays `X` (covariance `sigma1`) and `Y` (covariance `sigma0`).
//!
//! Every bound is reported together with the conditions it needs; a bound
//! whose conditions fail is still evaluated but flagged `applicable = false`.
//! Double sums run over flat index pairs `p < q` in canonical order, so
//! results are bit-reproducible.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quadrature::integrate_adaptive;
use crate::special::{plus_mean, FRAC_1_SQRT_2PI};
use crate::types::{check_same_shape, GaussianArraySpec, OrderStatSelector, ThresholdVector};

/// Default tolerance for equality/ordering conditions on covariances.
pub const CONDITION_TOL: f64 = 1e-12;

/// Minimum threshold at which the large-threshold signed bound is flagged
/// applicable. Advisory only.
pub const LARGE_THRESHOLD_GATE: f64 = 2.0;

pub mod condition {
    pub const EQUAL_WITHIN_ROW: &str = "equal_within_row_covariances";
    pub const COLUMN_INDEPENDENCE: &str = "column_independence";
    pub const CROSS_ROW_ORDERED: &str = "cross_row_0_le_sigma0_le_sigma1";
    pub const CROSS_ROW_DOMINATED: &str = "cross_row_sigma0_ge_sigma1";
    pub const POSITIVE_THRESHOLDS: &str = "positive_thresholds";
    pub const NONNEGATIVE_THRESHOLDS: &str = "nonnegative_thresholds";
    pub const LARGE_THRESHOLDS: &str = "large_thresholds";
}

/// Which bound a report carries. Serialized names are the report's `kind`
/// column.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum BoundKind {
    /// `|Delta|` bound valid for any pair of arrays.
    #[serde(rename = "thm1_abs")]
    Absolute,
    /// One-sided bound when within-row covariances agree.
    #[serde(rename = "thm1_signed")]
    Signed,
    /// `|P{X in [a,b]} - P{Y in [a,b]}|` bound.
    #[serde(rename = "remark_interval")]
    Interval,
    /// One-sided bound with positive parts in both sums, for large thresholds.
    #[serde(rename = "remark_large_u")]
    LargeThreshold,
    /// Rank-sensitive one-sided bound for column-independent arrays.
    #[serde(rename = "thm3_signed")]
    ColumnIndependentSigned,
    /// Rank-sensitive `|Delta|` bound for column-independent arrays.
    #[serde(rename = "thm3_abs")]
    ColumnIndependentAbs,
    /// Upper bound on `ln(P{X_(r) <= u} / P{Y_(r) <= u})`.
    #[serde(rename = "prop2_log_ratio")]
    LogRatio,
}

impl BoundKind {
    pub fn name(self) -> &'static str {
        match self {
            BoundKind::Absolute => "thm1_abs",
            BoundKind::Signed => "thm1_signed",
            BoundKind::Interval => "remark_interval",
            BoundKind::LargeThreshold => "remark_large_u",
            BoundKind::ColumnIndependentSigned => "thm3_signed",
            BoundKind::ColumnIndependentAbs => "thm3_abs",
            BoundKind::LogRatio => "prop2_log_ratio",
        }
    }

    /// True for bounds on `|Delta|` rather than on `Delta` itself.
    pub fn is_two_sided(self) -> bool {
        matches!(self, BoundKind::Absolute | BoundKind::Interval | BoundKind::ColumnIndependentAbs)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    pub kind: BoundKind,
    pub value: f64,
    pub applicable: bool,
    pub violated_conditions: Vec<String>,
    pub u_min: f64,
}

impl BoundReport {
    fn new(kind: BoundKind, value: f64, violated: Vec<&'static str>, u_min: f64) -> Self {
        BoundReport {
            kind,
            value,
            applicable: violated.is_empty(),
            violated_conditions: violated.into_iter().map(String::from).collect(),
            u_min,
        }
    }
}

/// Two arrays of the same shape compared entry by entry.
#[derive(Debug, Clone, Copy)]
pub struct ComparisonPair<'a> {
    x: &'a GaussianArraySpec,
    y: &'a GaussianArraySpec,
    tol: f64,
}

/// How a pair of flat indices relates the two entries.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum PairKind {
    SameRow,
    CrossRow,
}

impl<'a> ComparisonPair<'a> {
    /// `x` plays the role of `sigma1`, `y` of `sigma0`.
    pub fn new(x: &'a GaussianArraySpec, y: &'a GaussianArraySpec) -> Result<Self> {
        check_same_shape(x, y)?;
        Ok(ComparisonPair { x, y, tol: CONDITION_TOL })
    }

    /// Override the tolerance used by every condition check.
    pub fn with_tolerance(mut self, tol: f64) -> Self {
        self.tol = tol.abs();
        self
    }

    pub fn tolerance(&self) -> f64 {
        self.tol
    }

    fn dims(&self) -> (usize, usize) {
        self.x.shape()
    }

    /// Upper-triangle index pairs `(p, q, row_p, row_q, kind)` in canonical order.
    fn pairs(&self) -> impl Iterator<Item = (usize, usize, usize, usize, PairKind)> + '_ {
        let (d, n) = self.dims();
        let dim = d * n;
        (0..dim).flat_map(move |p| {
            ((p + 1)..dim).map(move |q| {
                let (i, l) = (p / n, q / n);
                let kind = if i == l { PairKind::SameRow } else { PairKind::CrossRow };
                (p, q, i, l, kind)
            })
        })
    }

    fn s1(&self, p: usize, q: usize) -> f64 {
        self.x.matrix()[(p, q)]
    }

    fn s0(&self, p: usize, q: usize) -> f64 {
        self.y.matrix()[(p, q)]
    }

    fn arcsin_gap(&self, p: usize, q: usize) -> f64 {
        self.s1(p, q).asin() - self.s0(p, q).asin()
    }

    fn rho(&self, p: usize, q: usize) -> f64 {
        self.s1(p, q).abs().max(self.s0(p, q).abs())
    }

    /// Within-row covariances of the two arrays agree.
    pub fn equal_within_row(&self) -> bool {
        self.pairs()
            .filter(|t| t.4 == PairKind::SameRow)
            .all(|(p, q, ..)| (self.s1(p, q) - self.s0(p, q)).abs() <= self.tol)
    }

    fn check_thresholds(&self, u: &ThresholdVector) -> Result<()> {
        u.check(self.x)
    }

    /// Shared sum structure of the difference bounds. `within` and `cross`
    /// map an arcsine gap to its weight (absolute value, positive part or
    /// zero).
    fn difference_sum(
        &self,
        u: &[f64],
        within: impl Fn(f64) -> f64,
        cross: impl Fn(f64) -> f64,
    ) -> f64 {
        let mut total = 0.0;
        for (p, q, i, l, kind) in self.pairs() {
            let gap = self.arcsin_gap(p, q);
            let rho = self.rho(p, q);
            let term = match kind {
                PairKind::SameRow => {
                    let w = within(gap);
                    if w == 0.0 {
                        continue;
                    }
                    w * (-u[i] * u[i] / (1.0 + rho)).exp()
                }
                PairKind::CrossRow => {
                    let w = cross(gap);
                    if w == 0.0 {
                        continue;
                    }
                    w * (-(u[i] * u[i] + u[l] * u[l]) / (2.0 * (1.0 + rho))).exp()
                }
            };
            total += term;
        }
        total
    }

    /// Bound on `|Delta_(r)(u)|` for any two standard arrays; independent of `r`.
    pub fn absolute_difference(&self, u: &ThresholdVector) -> Result<BoundReport> {
        self.check_thresholds(u)?;
        let v = self.difference_sum(u.as_slice(), f64::abs, f64::abs) / (2.0 * PI);
        Ok(BoundReport::new(BoundKind::Absolute, v, vec![], u.min()))
    }

    /// One-sided bound on `Delta_(r)(u)`; needs equal within-row covariances.
    pub fn signed_difference(&self, u: &ThresholdVector) -> Result<BoundReport> {
        self.check_thresholds(u)?;
        let v = self.difference_sum(u.as_slice(), |_| 0.0, |g| g.max(0.0)) / (2.0 * PI);
        let mut violated = vec![];
        if !self.equal_within_row() {
            violated.push(condition::EQUAL_WITHIN_ROW);
        }
        Ok(BoundReport::new(BoundKind::Signed, v, violated, u.min()))
    }

    /// Interval version: bounds `|P{X_(r) in [a,b]} - P{Y_(r) in [a,b]}|`
    /// using `u_i = min(|a_i|, |b_i|)` and twice the absolute-bound prefactor.
    pub fn interval_difference(&self, a: &[f64], b: &[f64]) -> Result<BoundReport> {
        let d = self.x.d();
        if a.len() != d || b.len() != d {
            return Err(Error::param("a/b", format!("interval ends must have length d={d}")));
        }
        if let Some(i) = (0..d).find(|&i| a[i].is_nan() || b[i].is_nan() || a[i] > b[i]) {
            return Err(Error::param("a/b", format!("a[{i}] = {} exceeds b[{i}] = {}", a[i], b[i])));
        }
        let u: Vec<f64> = a.iter().zip(b).map(|(a, b)| a.abs().min(b.abs())).collect();
        let v = self.difference_sum(&u, f64::abs, f64::abs) / PI;
        let u_min = u.iter().cloned().fold(f64::INFINITY, f64::min);
        Ok(BoundReport::new(BoundKind::Interval, v, vec![], u_min))
    }

    /// Signed bound with positive parts in both sums. Only asymptotically
    /// valid; flagged unless every `u_i >= LARGE_THRESHOLD_GATE`.
    pub fn large_threshold(&self, u: &ThresholdVector) -> Result<BoundReport> {
        self.check_thresholds(u)?;
        let pos = |g: f64| g.max(0.0);
        let v = self.difference_sum(u.as_slice(), pos, pos) / (2.0 * PI);
        let mut violated = vec![];
        if u.min() < LARGE_THRESHOLD_GATE {
            violated.push(condition::LARGE_THRESHOLDS);
        }
        Ok(BoundReport::new(BoundKind::LargeThreshold, v, violated, u.min()))
    }

    fn is_column_independent(&self, spec: &GaussianArraySpec) -> bool {
        let (d, n) = spec.shape();
        for i in 0..d {
            for l in 0..d {
                let base = spec.sigma(i, 0, l, 0);
                for j in 0..n {
                    for k in 0..n {
                        let s = spec.sigma(i, j, l, k);
                        let want = if j == k { base } else { 0.0 };
                        if (s - want).abs() > self.tol {
                            return false;
                        }
                    }
                }
            }
        }
        true
    }

    /// Rank-sensitive bounds for column-independent arrays, returned as
    /// `(signed, absolute)`. `r` is taken in the ascending convention; all
    /// thresholds must be positive and `u = min_i u_i` is used throughout.
    /// Row covariances are read from column 1 even when the independence
    /// check fails.
    pub fn column_independent(
        &self,
        sel: &OrderStatSelector,
        u: &ThresholdVector,
    ) -> Result<(BoundReport, BoundReport)> {
        self.check_thresholds(u)?;
        let (d, n) = self.dims();
        if sel.n() != n {
            return Err(Error::param("r", format!("selector is for n={} but arrays have n={n}", sel.n())));
        }
        if let Some(i) = (0..d).find(|&i| u[i] <= 0.0) {
            return Err(Error::param("u", format!("u[{i}] = {} must be strictly positive", u[i])));
        }
        let r = sel.ascending_rank();
        let mut violated = vec![];
        if !self.is_column_independent(self.x) || !self.is_column_independent(self.y) {
            violated.push(condition::COLUMN_INDEPENDENCE);
        }
        let u_min = u.min();
        let m = n - r;
        let prefactor = n as f64 * binomial(n - 1, r - 1).powi(2)
            / (2.0 * PI).powi(m as i32 + 1)
            * u_min.powi(-2 * m as i32);
        let (mut signed, mut abs) = (0.0, 0.0);
        for i in 0..d {
            for l in (i + 1)..d {
                let s1 = self.x.sigma(i, 0, l, 0);
                let s0 = self.y.sigma(i, 0, l, 0);
                let a = a_integral(s0, s1, n, r)?;
                if a == 0.0 {
                    continue;
                }
                let rho = s0.abs().max(s1.abs());
                let decay = (-((m + 1) as f64) * u_min * u_min / (1.0 + rho)).exp();
                signed += a.max(0.0) * decay;
                abs += a.abs() * decay;
            }
        }
        Ok((
            BoundReport::new(
                BoundKind::ColumnIndependentSigned,
                prefactor * signed,
                violated.clone(),
                u_min,
            ),
            BoundReport::new(BoundKind::ColumnIndependentAbs, prefactor * abs, violated, u_min),
        ))
    }

    /// Upper bound on `ln Theta_(r)(u)`, the log of the probability ratio.
    /// Needs equal within-row covariances, `0 <= sigma0 <= sigma1` across
    /// rows and `u >= 0`. Returned in log space; exponentiate with care.
    pub fn log_ratio(&self, u: &ThresholdVector) -> Result<BoundReport> {
        self.check_thresholds(u)?;
        let mut violated = vec![];
        if !self.equal_within_row() {
            violated.push(condition::EQUAL_WITHIN_ROW);
        }
        if u.as_slice().iter().any(|&v| v < 0.0) {
            violated.push(condition::NONNEGATIVE_THRESHOLDS);
        }
        let mut ordered = true;
        let mut total = 0.0;
        for (p, q, i, l, kind) in self.pairs() {
            if kind != PairKind::CrossRow {
                continue;
            }
            let (s1, s0) = (self.s1(p, q), self.s0(p, q));
            if s0 < -self.tol || s1 < s0 - self.tol {
                ordered = false;
            }
            if s1 >= 1.0 {
                return Err(Error::param(
                    "sigma1",
                    format!("cross-row correlation at ({p},{q}) equals 1; the log-ratio bound is infinite"),
                ));
            }
            let c = ((PI - 2.0 * s0.asin()) / (PI - 2.0 * s1.asin())).ln();
            if c == 0.0 {
                continue;
            }
            let s = u[i] + u[l];
            if s.is_infinite() && s > 0.0 {
                continue;
            }
            total += c * (-s * s / 8.0).exp() / plus_mean(s / 2.0);
        }
        if !ordered {
            violated.push(condition::CROSS_ROW_ORDERED);
        }
        Ok(BoundReport::new(BoundKind::LogRatio, FRAC_1_SQRT_2PI * total, violated, u.min()))
    }

    /// Conditions under which `Delta_(r)(u) <= 0` for every `u`: equal
    /// within-row covariances and `sigma0 >= sigma1` across rows.
    pub fn slepian_conditions(&self) -> (bool, Vec<String>) {
        let mut violated = vec![];
        if !self.equal_within_row() {
            violated.push(condition::EQUAL_WITHIN_ROW.to_string());
        }
        let dominated = self
            .pairs()
            .filter(|t| t.4 == PairKind::CrossRow)
            .all(|(p, q, ..)| self.s0(p, q) >= self.s1(p, q) - self.tol);
        if !dominated {
            violated.push(condition::CROSS_ROW_DOMINATED.to_string());
        }
        (violated.is_empty(), violated)
    }

    /// Every bound that can be evaluated at `(r, u)`. Bounds whose inputs are
    /// out of domain (non-positive thresholds for the column-independent
    /// pair, unit correlations for the log ratio) are skipped.
    pub fn all(&self, sel: &OrderStatSelector, u: &ThresholdVector) -> Result<Vec<BoundReport>> {
        let mut out = vec![
            self.absolute_difference(u)?,
            self.signed_difference(u)?,
            {
                let a = vec![f64::NEG_INFINITY; u.len()];
                self.interval_difference(&a, u.as_slice())?
            },
            self.large_threshold(u)?,
        ];
        if u.as_slice().iter().all(|&v| v > 0.0) {
            if let Ok((s, a)) = self.column_independent(sel, u) {
                out.push(s);
                out.push(a);
            }
        }
        if let Ok(lr) = self.log_ratio(u) {
            out.push(lr);
        }
        Ok(out)
    }
}

/// `n choose k` as a float.
pub fn binomial(n: usize, k: usize) -> f64 {
    if k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// `int_{sigma0}^{sigma1} (1+|h|)^{2(n-r)} / (1-h^2)^{(n-r+1)/2} dh`.
///
/// Evaluated after substituting `h = sin(theta)`, which turns the integrand
/// into `(1+|sin theta|)^{2(n-r)} / cos(theta)^{n-r}` and removes the
/// endpoint singularity; the kink of `|sin|` at 0 is split out.
pub fn a_integral(sigma0: f64, sigma1: f64, n: usize, r: usize) -> Result<f64> {
    if r == 0 || r > n {
        return Err(Error::param("r", format!("rank {r} is outside 1..={n}")));
    }
    for (name, s) in [("sigma0", sigma0), ("sigma1", sigma1)] {
        if !(s.abs() < 1.0) {
            return Err(Error::param(name, format!("{s} must lie strictly inside (-1, 1)")));
        }
    }
    if sigma0 == sigma1 {
        return Ok(0.0);
    }
    let (t0, t1) = (sigma0.asin(), sigma1.asin());
    let m = (n - r) as i32;
    if m == 0 {
        return Ok(t1 - t0);
    }
    let integrand = |t: f64| (1.0 + t.sin().abs()).powi(2 * m) / t.cos().powi(m);
    let (lo, hi, sign) = if t0 < t1 { (t0, t1, 1.0) } else { (t1, t0, -1.0) };
    let piece = |a: f64, b: f64| integrate_adaptive(integrand, a, b, 1e-13, 1e-12, 4000).value;
    let value = if lo < 0.0 && hi > 0.0 { piece(lo, 0.0) + piece(0.0, hi) } else { piece(lo, hi) };
    Ok(sign * value)
}
