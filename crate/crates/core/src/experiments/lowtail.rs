//! Lower-tail probabilities `P{sup_[0,1] (X_{r:n} + cZ) <= x}` for fBm order
//! statistics, their power-law exponents, and the pursuit capture time.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mc::McEstimate;
use crate::paths::{path_max, CorrelationModel, GridSpec, Method, PathSampler, TimeGrid};
use crate::rng::Workers;
use crate::stats::{fit_line, proportion};
use crate::types::OrderStatSelector;

/// Share of the largest levels left out of the default fit window.
pub const DEFAULT_WINDOW_DROP: f64 = 0.2;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LowTailParams {
    pub alpha: f64,
    pub n: usize,
    /// Rank in the process convention (`r = 1` is the maximum).
    pub r: usize,
    pub c: f64,
    /// Use `-Z` instead of `Z` (same law; kept for the pursuit reading).
    pub negate_z: bool,
    /// Levels `x`, positive; `+inf` is allowed.
    pub levels: Vec<f64>,
    pub n_paths: usize,
    pub grid_m: usize,
    pub seed: u64,
}

/// One level of a lower-tail curve.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurvePoint {
    pub x: f64,
    pub estimate: McEstimate,
    pub successes: u64,
    /// No replication stayed below `x`; excluded from fits.
    pub censored: bool,
    /// Estimates on the full grid and on the nested subgrids (every 2nd and
    /// every 4th point), finest first.
    pub refinement: Vec<f64>,
    /// Estimated remaining discretization bias of `estimate`.
    pub grid_delta: f64,
    /// Whether the change between successive refinements shrinks.
    pub delta_shrinks: Option<bool>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LowTailCurve {
    pub points: Vec<CurvePoint>,
    /// Grid sizes behind `CurvePoint::refinement`.
    pub grid_sizes: Vec<usize>,
    pub method: Method,
    pub warnings: Vec<String>,
}

impl LowTailCurve {
    pub fn pairs(&self) -> Vec<(f64, McEstimate)> {
        self.points.iter().map(|p| (p.x, p.estimate)).collect()
    }
}

/// `start, start*ratio, ...` while `>= stop` (decreasing when `ratio < 1`).
pub fn geometric_levels(start: f64, stop: f64, ratio: f64) -> Result<Vec<f64>> {
    if !(start > 0.0 && stop > 0.0 && ratio > 0.0 && ratio != 1.0) {
        return Err(Error::param("grid", "geometric grid needs positive start, stop and ratio != 1"));
    }
    let count = ((stop / start).ln() / ratio.ln()).floor();
    if !(count >= 0.0) {
        return Err(Error::param("grid", format!("ratio {ratio} never reaches {stop} from {start}")));
    }
    Ok((0..=count as i32).map(|k| start * ratio.powi(k)).collect())
}

fn validate(p: &LowTailParams) -> Result<OrderStatSelector> {
    CorrelationModel::Fbm { alpha: p.alpha }.validate()?;
    let sel = OrderStatSelector::descending(p.n, p.r)?;
    if !(p.c >= 0.0 && p.c.is_finite()) {
        return Err(Error::param("c", format!("must be finite and >= 0, got {}", p.c)));
    }
    if p.levels.is_empty() {
        return Err(Error::param("x_grid", "no levels given"));
    }
    if let Some(x) = p.levels.iter().find(|x| !(**x > 0.0)) {
        return Err(Error::param("x_grid", format!("levels must be positive, got {x}")));
    }
    if p.n_paths == 0 {
        return Err(Error::param("paths", "need at least one path"));
    }
    GridSpec::new(0.0, 1.0, p.grid_m)?;
    Ok(sel)
}

/// Grid suprema of `X_{r:n} + cZ` over `[0, 1]` on the full grid and on its
/// nested subgrids, one row per replication.
fn suprema(p: &LowTailParams, sel: &OrderStatSelector, workers: Workers) -> Result<(Vec<Vec<f64>>, Vec<usize>, PathSampler)> {
    let grid = TimeGrid::Uniform(GridSpec::new(0.0, 1.0, p.grid_m)?);
    let sampler = PathSampler::auto(&CorrelationModel::Fbm { alpha: p.alpha }, grid)?;
    let strides: Vec<usize> = [1usize, 2, 4].into_iter().filter(|s| (p.grid_m - 1).is_multiple_of(*s)).collect();
    let sizes = strides.iter().map(|s| (p.grid_m - 1) / s + 1).collect();
    let with_z = p.c > 0.0;
    let group = p.n + with_z as usize;
    let zc = if p.negate_z { -p.c } else { p.c };
    let n = p.n;
    let rows = sampler.map_groups(p.seed, p.n_paths, group, workers, |paths| {
        let mut buf = vec![0.0; n];
        let combined: Vec<f64> = (0..p.grid_m)
            .map(|k| {
                for (b, path) in buf.iter_mut().zip(&paths[..n]) {
                    *b = path[k];
                }
                let x = sel.select(&mut buf);
                if with_z {
                    x + zc * paths[n][k]
                } else {
                    x
                }
            })
            .collect();
        strides
            .iter()
            .map(|&s| path_max(&combined.iter().step_by(s).copied().collect::<Vec<_>>()))
            .collect::<Vec<f64>>()
    });
    Ok((rows, sizes, sampler))
}

/// Estimate the lower-tail curve at every level. Replication `g` uses
/// stream `g` of the seed for its `n` (plus one when `c > 0`) fBm paths.
pub fn lowtail_curve(p: &LowTailParams, workers: Workers) -> Result<LowTailCurve> {
    let sel = validate(p)?;
    let (rows, sizes, sampler) = suprema(p, &sel, workers)?;
    let total = rows.len() as u64;
    // bias of a grid supremum decays like m^{-alpha/2}
    let richardson = 2f64.powf(p.alpha / 2.0) - 1.0;
    let points = p
        .levels
        .iter()
        .map(|&x| {
            let counts: Vec<u64> =
                (0..sizes.len()).map(|lvl| rows.iter().filter(|r| r[lvl] <= x).count() as u64).collect();
            let refinement: Vec<f64> = counts.iter().map(|&c| c as f64 / total as f64).collect();
            let (value, stderr) = proportion(counts[0], total);
            let diffs: Vec<f64> = refinement.windows(2).map(|w| (w[1] - w[0]).abs()).collect();
            CurvePoint {
                x,
                estimate: McEstimate { value, stderr, n_samples: total, seed: p.seed, jitter: sampler.jitter() },
                successes: counts[0],
                censored: counts[0] == 0,
                grid_delta: diffs.first().map_or(0.0, |d| d / richardson),
                delta_shrinks: (diffs.len() >= 2).then(|| diffs[0] <= diffs[1]),
                refinement,
            }
        })
        .collect();
    Ok(LowTailCurve { points, grid_sizes: sizes, method: sampler.method(), warnings: sampler.warnings().to_vec() })
}

/// Power-law fit of `ln p` against `ln x`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExponentFit {
    pub slope: f64,
    pub intercept: f64,
    pub slope_stderr: f64,
    pub x_window: (f64, f64),
    pub n_points: usize,
    pub r2: f64,
    /// Points in the window left out as censored (`p = 0`) or saturated (`se = 0`).
    pub excluded: Vec<f64>,
}

/// Window over the sorted abscissae that leaves out the largest
/// `DEFAULT_WINDOW_DROP` share of the points.
pub fn default_window(xs: &[f64]) -> Result<(f64, f64)> {
    let mut v: Vec<f64> = xs.iter().copied().filter(|x| x.is_finite()).collect();
    v.sort_by(f64::total_cmp);
    let drop = (v.len() as f64 * DEFAULT_WINDOW_DROP).round() as usize;
    let keep = v.len().saturating_sub(drop);
    if keep < 3 {
        return Err(Error::InsufficientPoints { needed: 3, found: keep });
    }
    Ok((v[0], v[keep - 1]))
}

/// Pursuit counterpart of [`default_window`]: small times are the
/// pre-asymptotic end, so the smallest share of the times is left out.
pub fn pursuit_default_window(times: &[f64]) -> Result<(f64, f64)> {
    let mut v: Vec<f64> = times.iter().copied().filter(|x| x.is_finite()).collect();
    v.sort_by(f64::total_cmp);
    let drop = (v.len() as f64 * DEFAULT_WINDOW_DROP).round() as usize;
    if v.len() < drop + 3 {
        return Err(Error::InsufficientPoints { needed: 3, found: v.len().saturating_sub(drop) });
    }
    Ok((v[drop], v[v.len() - 1]))
}

/// Weighted least squares of `ln p` on `ln x` over points with `x` in the
/// window, weights `(p / se)^2`. Censored and zero-variance points are
/// skipped; if every remaining point has `se = 0` the fit is unweighted.
pub fn fit_exponent(curve: &[(f64, McEstimate)], window: (f64, f64)) -> Result<ExponentFit> {
    let (lo, hi) = window;
    if !(lo < hi) {
        return Err(Error::param("window", format!("need x_lo < x_hi, got ({lo}, {hi})")));
    }
    let inside: Vec<&(f64, McEstimate)> =
        curve.iter().filter(|(x, _)| *x >= lo && *x <= hi && x.is_finite()).collect();
    let all_exact = inside.iter().all(|(_, e)| e.stderr == 0.0);
    let mut excluded = vec![];
    let (mut lx, mut ly, mut w) = (vec![], vec![], vec![]);
    for &&(x, e) in &inside {
        let usable = e.value > 0.0 && (all_exact || e.stderr > 0.0);
        if !usable {
            excluded.push(x);
            continue;
        }
        lx.push(x.ln());
        ly.push(e.value.ln());
        w.push(if all_exact { 1.0 } else { (e.value / e.stderr).powi(2) });
    }
    if lx.len() < 3 {
        return Err(Error::InsufficientPoints { needed: 3, found: lx.len() });
    }
    let fit = fit_line(&lx, &ly, (!all_exact).then_some(&w[..]))?;
    Ok(ExponentFit {
        slope: fit.slope,
        intercept: fit.intercept,
        slope_stderr: fit.slope_stderr,
        x_window: window,
        n_points: fit.points,
        r2: fit.r2,
        excluded,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PursuitParams {
    pub alpha: f64,
    pub n: usize,
    pub r: usize,
    /// Times `s > 0`.
    pub times: Vec<f64>,
    pub n_paths: usize,
    pub grid_m: usize,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PursuitCurve {
    pub times: Vec<f64>,
    /// Lower-tail curve of `B_{r:n} - B_0` at levels `s^{-alpha/2}`.
    pub curve: LowTailCurve,
}

impl PursuitCurve {
    /// `(s, P{tau > s})` pairs.
    pub fn pairs(&self) -> Vec<(f64, McEstimate)> {
        self.times.iter().zip(&self.curve.points).map(|(&s, p)| (s, p.estimate)).collect()
    }
}

/// `P{tau_{r:n} > s} = P{sup_[0,1] (B_{r:n} - B_0) <= s^{-alpha/2}}`.
pub fn pursuit_tail(p: &PursuitParams, workers: Workers) -> Result<PursuitCurve> {
    if let Some(s) = p.times.iter().find(|s| !(**s > 0.0 && s.is_finite())) {
        return Err(Error::param("s_grid", format!("times must be positive and finite, got {s}")));
    }
    let levels = p.times.iter().map(|s| s.powf(-p.alpha / 2.0)).collect();
    let lt = LowTailParams {
        alpha: p.alpha,
        n: p.n,
        r: p.r,
        c: 1.0,
        negate_z: true,
        levels,
        n_paths: p.n_paths,
        grid_m: p.grid_m,
        seed: p.seed,
    };
    Ok(PursuitCurve { times: p.times.clone(), curve: lowtail_curve(&lt, workers)? })
}

/// Exponent `q` from a pursuit curve: minus the slope of `ln P` on `ln s`.
pub fn pursuit_exponent(curve: &PursuitCurve, window: (f64, f64)) -> Result<ExponentFit> {
    let mut fit = fit_exponent(&curve.pairs(), window)?;
    fit.slope = -fit.slope;
    Ok(fit)
}
