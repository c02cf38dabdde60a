//! Extreme-value limits for suprema of stationary order-statistics processes:
//! norming constants, Gumbel, normal and mixed-Gumbel experiments.

use std::f64::consts::{E, PI};

use serde::{Deserialize, Serialize};

use crate::bounds::binomial;
use crate::error::{Error, Result};
use crate::mc::McEstimate;
use crate::paths::{path_max, CorrelationModel, GridSpec, PathSampler, TimeGrid};
use crate::quadrature::gauss_hermite_128;
use crate::rng::{derive_seed, stream, Workers};
use crate::special::std_normal_cdf;
use crate::stats::{ks_distance, proportion};
use crate::types::OrderStatSelector;

use rand_distr::{Distribution, StandardNormal};

/// Quantile levels reported for the standardized sample.
pub const REPORT_LEVELS: [f64; 5] = [0.05, 0.25, 0.5, 0.75, 0.95];

/// Below this value of `rho_T ln T` the normal limit is far from its regime.
pub const NORMAL_REGIME_ADVISORY: f64 = 3.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NormingConstants {
    pub a: f64,
    pub b: f64,
    #[serde(rename = "T")]
    pub horizon: f64,
    pub n: usize,
    pub r: usize,
    pub alpha: f64,
    #[serde(rename = "A_const")]
    pub a_const: f64,
}

/// `a = sqrt(2 r ln T)` and
/// `b = sqrt((2/r) ln T) + ((1/alpha - r/2) ln ln T + ln D) / a` with
/// `D = (r/2)^(r/2 - 1/alpha) C(n, r) A (2 pi)^(-r/2)`.
pub fn norming_constants(n: usize, r: usize, alpha: f64, horizon: f64, a_const: f64) -> Result<NormingConstants> {
    if r == 0 || r > n {
        return Err(Error::param("r", format!("need 1 <= r <= n, got r={r}, n={n}")));
    }
    if !(alpha > 0.0 && alpha <= 2.0) {
        return Err(Error::param("alpha", format!("must lie in (0, 2], got {alpha}")));
    }
    if !(horizon > E && horizon.is_finite()) {
        return Err(Error::param("t", format!("need T > e so that ln ln T > 0, got {horizon}")));
    }
    if !(a_const > 0.0 && a_const.is_finite()) {
        return Err(Error::param("a_const", format!("must be positive, got {a_const}")));
    }
    let rf = r as f64;
    let ln_t = horizon.ln();
    let ln_d = (rf / 2.0 - 1.0 / alpha) * (rf / 2.0).ln() + binomial(n, r).ln() + a_const.ln()
        - rf / 2.0 * (2.0 * PI).ln();
    let a = (2.0 * rf * ln_t).sqrt();
    let b = (2.0 / rf * ln_t).sqrt() + ((1.0 / alpha - rf / 2.0) * ln_t.ln() + ln_d) / a;
    Ok(NormingConstants { a, b, horizon, n, r, alpha, a_const })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum LimitTarget {
    Gumbel,
    Normal,
    MixedGumbel { gamma: f64, r: usize },
}

impl LimitTarget {
    pub fn cdf(&self, x: f64) -> f64 {
        match *self {
            LimitTarget::Gumbel => gumbel_cdf(x),
            LimitTarget::Normal => std_normal_cdf(x),
            LimitTarget::MixedGumbel { gamma, r } => mixed_gumbel_cdf(x, gamma, r),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuantileRow {
    pub level: f64,
    pub sample: f64,
    /// Target cdf evaluated at the sample quantile.
    pub target_cdf: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LimitCheckReport {
    pub ks_distance: f64,
    pub n_replications: usize,
    pub target: LimitTarget,
    pub quantiles: Vec<QuantileRow>,
    pub norming: NormingConstants,
    pub advisories: Vec<String>,
}

pub fn gumbel_cdf(x: f64) -> f64 {
    (-(-x).exp()).exp()
}

/// `E exp(-e^{-(x + gamma - sqrt(2 gamma r) W)})` for `W ~ N(0,1)`, by
/// 128-node Gauss-Hermite quadrature.
pub fn mixed_gumbel_cdf(x: f64, gamma: f64, r: usize) -> f64 {
    let rule = gauss_hermite_128();
    let s = (2.0 * gamma * r as f64).sqrt() * std::f64::consts::SQRT_2;
    let total = rule.integrate(|z| (-(-(x + gamma - s * z)).exp()).exp());
    (total / PI.sqrt()).clamp(0.0, 1.0)
}

fn report(
    sample: &mut [f64],
    target: LimitTarget,
    norming: NormingConstants,
    advisories: Vec<String>,
) -> LimitCheckReport {
    let ks = ks_distance(sample, |x| target.cdf(x));
    sample.sort_by(f64::total_cmp);
    let quantiles = REPORT_LEVELS
        .iter()
        .map(|&level| {
            let k = ((level * sample.len() as f64).ceil() as usize).clamp(1, sample.len()) - 1;
            QuantileRow { level, sample: sample[k], target_cdf: target.cdf(sample[k]) }
        })
        .collect();
    LimitCheckReport { ks_distance: ks, n_replications: sample.len(), target, quantiles, norming, advisories }
}

/// Local index `alpha` and time scale of a model usable as a stationary
/// base process.
fn stationary_base(model: &CorrelationModel) -> Result<(f64, f64)> {
    model.validate()?;
    match *model {
        CorrelationModel::PowerExp { alpha, scale } => Ok((alpha, scale)),
        _ => Err(Error::param(
            "model",
            format!("limit experiments need a powexp model with correlation 1 - |t/scale|^alpha near 0, got {model}"),
        )),
    }
}

/// Grid sup of the pointwise order statistic over a group of paths.
fn order_stat_sup(paths: &[Vec<f64>], sel: &OrderStatSelector) -> f64 {
    let mut buf = vec![0.0; paths.len()];
    let mut best = f64::NEG_INFINITY;
    for k in 0..paths[0].len() {
        for (b, p) in buf.iter_mut().zip(paths) {
            *b = p[k];
        }
        best = best.max(sel.select(&mut buf));
    }
    best
}

fn check_reps(n_reps: usize) -> Result<()> {
    if n_reps < 2 {
        return Err(Error::param("reps", format!("need at least 2 replications, got {n_reps}")));
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GumbelParams {
    pub model: CorrelationModel,
    pub n: usize,
    /// Rank in the process convention (`r = 1` is the maximum).
    pub r: usize,
    pub horizon: f64,
    pub n_reps: usize,
    /// Grid points on `[0, T]`.
    pub grid_m: usize,
    pub a_const: f64,
    pub seed: u64,
}

/// Suprema of `n_reps` independent stationary order-statistics processes on
/// `[0, T]`, standardized as `a (M - b)` and compared with the Gumbel law.
/// The norming uses the effective horizon `T / scale`.
pub fn gumbel_experiment(p: &GumbelParams, workers: Workers) -> Result<LimitCheckReport> {
    let (alpha, scale) = stationary_base(&p.model)?;
    let sel = OrderStatSelector::descending(p.n, p.r)?;
    check_reps(p.n_reps)?;
    let norming = norming_constants(p.n, p.r, alpha, p.horizon / scale, p.a_const)?;
    let grid = TimeGrid::Uniform(GridSpec::new(0.0, p.horizon, p.grid_m)?);
    let sampler = PathSampler::auto(&p.model, grid)?;
    let mut sample = sampler.map_groups(p.seed, p.n_reps, p.n, workers, |paths| {
        norming.a * (order_stat_sup(paths, &sel) - norming.b)
    });
    Ok(report(&mut sample, LimitTarget::Gumbel, norming, sampler.warnings().to_vec()))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MixtureParams {
    pub base: CorrelationModel,
    pub n: usize,
    pub r: usize,
    pub horizon: f64,
    pub n_reps: usize,
    /// Grid points per unit segment.
    pub points_per_unit: usize,
    pub a_const: f64,
    pub seed: u64,
}

/// `sqrt(1 - rho) M_Y + sqrt(rho) W` per replication, where `M_Y` is the sup of
/// the order statistic of `n` processes built from `floor(T)` independent
/// unit segments of the base model, and `W` is shared by all `n` copies.
fn mixture_suprema(p: &MixtureParams, rho: f64, workers: Workers) -> Result<(Vec<f64>, Vec<f64>, Vec<String>)> {
    stationary_base(&p.base)?;
    let sel = OrderStatSelector::descending(p.n, p.r)?;
    check_reps(p.n_reps)?;
    if p.points_per_unit < 2 {
        return Err(Error::param("points_per_unit", "need at least 2 points per segment"));
    }
    let segments = p.horizon.floor() as usize;
    if segments == 0 {
        return Err(Error::param("t", format!("need T >= 1, got {}", p.horizon)));
    }
    let ppu = p.points_per_unit;
    let grid = TimeGrid::Uniform(GridSpec::new(0.0, (ppu - 1) as f64 / ppu as f64, ppu)?);
    let sampler = PathSampler::auto(&p.base, grid)?;
    let n = p.n;
    let m_y = sampler.map_groups(p.seed, p.n_reps, n * segments, workers, |paths| {
        // copy j on segment k is paths[k * n + j]
        paths.chunks(n).map(|seg| order_stat_sup(seg, &sel)).fold(f64::NEG_INFINITY, f64::max)
    });
    let w_seed = derive_seed(p.seed, 3);
    let w: Vec<f64> = (0..p.n_reps).map(|g| StandardNormal.sample(&mut stream(w_seed, g as u64))).collect();
    let mixed = m_y.iter().zip(&w).map(|(y, w)| (1.0 - rho).sqrt() * y + rho.sqrt() * w).collect();
    Ok((mixed, w, sampler.warnings().to_vec()))
}

/// Mixture with `rho_* = gamma / ln T`, standardized as `a (M - b)`.
pub fn mixed_gumbel_experiment(gamma: f64, p: &MixtureParams, workers: Workers) -> Result<LimitCheckReport> {
    if !(gamma > 0.0 && gamma.is_finite()) {
        return Err(Error::param("gamma", format!("must be positive, got {gamma}")));
    }
    let (alpha, scale) = stationary_base(&p.base)?;
    let rho = gamma / p.horizon.ln();
    if !(rho < 1.0) {
        return Err(Error::param("gamma", format!("need T > e^gamma so that gamma / ln T < 1, got {rho}")));
    }
    let norming = norming_constants(p.n, p.r, alpha, p.horizon / scale, p.a_const)?;
    let (m, _, warnings) = mixture_suprema(p, rho, workers)?;
    let mut sample: Vec<f64> = m.iter().map(|v| norming.a * (v - norming.b)).collect();
    Ok(report(&mut sample, LimitTarget::MixedGumbel { gamma, r: p.r }, norming, warnings))
}

/// Mixture with the supplied `rho_T`, standardized as
/// `(M - sqrt(1 - rho) b) / sqrt(rho)` and compared with the standard normal.
pub fn normal_limit_experiment(rho_t: f64, p: &MixtureParams, workers: Workers) -> Result<LimitCheckReport> {
    if !(rho_t > 0.0 && rho_t < 1.0) {
        return Err(Error::param("rho_t", format!("must lie in (0, 1), got {rho_t}")));
    }
    let (alpha, scale) = stationary_base(&p.base)?;
    let norming = norming_constants(p.n, p.r, alpha, p.horizon / scale, p.a_const)?;
    let (m, _, mut warnings) = mixture_suprema(p, rho_t, workers)?;
    let regime = rho_t * p.horizon.ln();
    if regime < NORMAL_REGIME_ADVISORY {
        warnings.push(format!(
            "rho_T ln T = {regime:.3} is below {NORMAL_REGIME_ADVISORY}; the normal limit is only approached for large values"
        ));
    }
    let shift = (1.0 - rho_t).sqrt() * norming.b;
    let mut sample: Vec<f64> = m.iter().map(|v| (v - shift) / rho_t.sqrt()).collect();
    Ok(report(&mut sample, LimitTarget::Normal, norming, warnings))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CalibrationParams {
    pub model: CorrelationModel,
    pub n: usize,
    pub r: usize,
    pub level: f64,
    pub horizon: f64,
    pub grid_m: usize,
    pub n_reps: usize,
    pub seed: u64,
}

/// Coarse `A` from `P{sup_[0,T] X_{r:n} > u}` by inverting
/// `1 - P = exp(-T C(n,r) A (2 pi)^(-r/2) u^(2/alpha - r) e^(-r u^2 / 2))`.
/// The standard error follows from the delta method.
pub fn calibrate_a_const(p: &CalibrationParams, workers: Workers) -> Result<McEstimate> {
    let (alpha, scale) = stationary_base(&p.model)?;
    let sel = OrderStatSelector::descending(p.n, p.r)?;
    check_reps(p.n_reps)?;
    if !(p.level > 0.0 && p.level.is_finite()) {
        return Err(Error::param("level", format!("must be positive, got {}", p.level)));
    }
    let grid = TimeGrid::Uniform(GridSpec::new(0.0, p.horizon, p.grid_m)?);
    let sampler = PathSampler::auto(&p.model, grid)?;
    let hits = sampler.map_groups(p.seed, p.n_reps, p.n, workers, |paths| order_stat_sup(paths, &sel) > p.level);
    let count = hits.iter().filter(|&&h| h).count() as u64;
    if count == 0 || count == p.n_reps as u64 {
        return Err(Error::param(
            "level",
            format!("{count} of {} replications exceed the level; choose a level with a nondegenerate rate", p.n_reps),
        ));
    }
    let (ph, se) = proportion(count, p.n_reps as u64);
    let rf = p.r as f64;
    let u = p.level;
    let k = p.horizon / scale
        * binomial(p.n, p.r)
        * (2.0 * PI).powf(-rf / 2.0)
        * u.powf(2.0 / alpha - rf)
        * (-rf * u * u / 2.0).exp();
    Ok(McEstimate {
        value: -(-ph).ln_1p() / k,
        stderr: se / ((1.0 - ph) * k),
        n_samples: p.n_reps as u64,
        seed: p.seed,
        jitter: sampler.jitter(),
    })
}

/// Standardized sup sample from a single order-statistics path, exposed for
/// diagnostics.
pub fn standardized_sup(values: &[f64], norming: &NormingConstants) -> f64 {
    norming.a * (path_max(values) - norming.b)
}
