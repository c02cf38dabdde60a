//! Exact simulation of Gaussian processes on finite grids: fractional
//! Brownian motion, stationary processes with a given correlation function,
//! Lamperti duals and pointwise order statistics of independent copies.

use std::fmt;
use std::io::Write;
use std::sync::Arc;

use nalgebra::DMatrix;
use rand::Rng;
use rand_distr::StandardNormal;
use rustfft::num_complex::Complex;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mc::{cholesky_jittered, PackedLower};
use crate::rng::{map_indexed, stream, Workers};
use crate::types::OrderStatSelector;

/// Circulant eigenvalues below `-CIRCULANT_TOL * max` are fatal; smaller
/// negatives are clipped to zero.
pub const CIRCULANT_TOL: f64 = 1e-8;

/// Relative tolerance for recognising an exponential grid.
pub const EXP_GRID_TOL: f64 = 1e-9;

/// Uniform grid `t_k = t0 + k (t1 - t0)/(m - 1)`, `k = 0..m`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub t0: f64,
    pub t1: f64,
    pub m: usize,
}

impl GridSpec {
    pub fn new(t0: f64, t1: f64, m: usize) -> Result<Self> {
        if !(t0.is_finite() && t1.is_finite() && t1 > t0) {
            return Err(Error::param("grid", format!("need finite t0 < t1, got [{t0}, {t1}]")));
        }
        if m < 2 {
            return Err(Error::param("m", format!("need at least 2 grid points, got {m}")));
        }
        Ok(GridSpec { t0, t1, m })
    }

    /// `m = 2^k + 1` points on `[t0, t1]`.
    pub fn dyadic(t0: f64, t1: f64, k: u32) -> Result<Self> {
        Self::new(t0, t1, (1usize << k) + 1)
    }

    pub fn step(&self) -> f64 {
        (self.t1 - self.t0) / (self.m - 1) as f64
    }

    pub fn point(&self, k: usize) -> f64 {
        if k + 1 == self.m {
            self.t1
        } else {
            self.t0 + k as f64 * self.step()
        }
    }

    pub fn points(&self) -> Vec<f64> {
        (0..self.m).map(|k| self.point(k)).collect()
    }
}

/// Time points of a sampled path.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TimeGrid {
    Uniform(GridSpec),
    /// `t_k = exp(s_k)` for the uniform `s`-grid.
    Exponential(GridSpec),
}

impl TimeGrid {
    pub fn len(&self) -> usize {
        self.spec().m
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// The underlying uniform grid (of `t`, or of `s = ln t`).
    pub fn spec(&self) -> &GridSpec {
        match self {
            TimeGrid::Uniform(g) | TimeGrid::Exponential(g) => g,
        }
    }

    pub fn times(&self) -> Vec<f64> {
        match self {
            TimeGrid::Uniform(g) => g.points(),
            TimeGrid::Exponential(g) => g.points().into_iter().map(f64::exp).collect(),
        }
    }
}

/// Covariance model of a centered Gaussian process.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum CorrelationModel {
    /// Fractional Brownian motion with Hurst index `alpha / 2`.
    Fbm { alpha: f64 },
    /// Stationary, `rho(t) = exp(-|t / scale|^alpha)`.
    PowerExp { alpha: f64, scale: f64 },
    /// Self-similar with index 1/2:
    /// `E X(s) X(t) = 2^beta (s t)^((1+beta)/2) / (s + t)^beta`.
    SelfSimilarBeta { beta: f64 },
    /// Stationary, correlation linearly interpolated in a table of lags.
    CustomTable { lags: Vec<f64>, values: Vec<f64> },
    /// Stationary Lamperti dual `e^{-alpha s/2} X(e^s)` of a self-similar
    /// model, with correlation `cov_X(1, e^h) e^{-alpha h/2}`.
    LampertiDual { base: Box<CorrelationModel> },
}

impl fmt::Display for CorrelationModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CorrelationModel::Fbm { alpha } => write!(f, "fbm(alpha={alpha})"),
            CorrelationModel::PowerExp { alpha, scale } => {
                write!(f, "power_exp(alpha={alpha},scale={scale})")
            }
            CorrelationModel::SelfSimilarBeta { beta } => write!(f, "self_similar_beta(beta={beta})"),
            CorrelationModel::CustomTable { lags, .. } => write!(f, "custom_table({} lags)", lags.len()),
            CorrelationModel::LampertiDual { base } => write!(f, "lamperti_dual({base})"),
        }
    }
}

impl std::str::FromStr for CorrelationModel {
    type Err = Error;

    /// `fbm:ALPHA`, `powexp:ALPHA[:SCALE]`, `beta:BETA`.
    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.split(':').collect();
        let num = |k: usize| -> Result<f64> {
            parts
                .get(k)
                .ok_or_else(|| Error::param("model", format!("`{s}` is missing a parameter")))?
                .trim()
                .parse::<f64>()
                .map_err(|e| Error::param("model", format!("`{s}`: {e}")))
        };
        let model = match parts[0].trim() {
            "fbm" => CorrelationModel::Fbm { alpha: num(1)? },
            "powexp" | "power_exp" => CorrelationModel::PowerExp {
                alpha: num(1)?,
                scale: if parts.len() > 2 { num(2)? } else { 1.0 },
            },
            "beta" | "self_similar_beta" => CorrelationModel::SelfSimilarBeta { beta: num(1)? },
            other => {
                return Err(Error::param(
                    "model",
                    format!("unknown model `{other}` (expected fbm, powexp or beta)"),
                ))
            }
        };
        model.validate()?;
        Ok(model)
    }
}

impl CorrelationModel {
    pub fn validate(&self) -> Result<()> {
        match self {
            CorrelationModel::Fbm { alpha } => {
                if !(*alpha > 0.0 && *alpha < 2.0) {
                    return Err(Error::param("alpha", format!("fbm needs alpha in (0,2), got {alpha}")));
                }
            }
            CorrelationModel::PowerExp { alpha, scale } => {
                if !(*alpha > 0.0 && *alpha <= 2.0) {
                    return Err(Error::param("alpha", format!("power_exp needs alpha in (0,2], got {alpha}")));
                }
                if !(*scale > 0.0 && scale.is_finite()) {
                    return Err(Error::param("scale", format!("must be positive, got {scale}")));
                }
            }
            CorrelationModel::SelfSimilarBeta { beta } => {
                if !(beta.is_finite() && *beta >= 0.0) {
                    return Err(Error::param("beta", format!("must be finite and >= 0, got {beta}")));
                }
            }
            CorrelationModel::CustomTable { lags, values } => {
                if lags.len() != values.len() || lags.is_empty() {
                    return Err(Error::param("table", "lags and values must be nonempty and equally long"));
                }
                if lags[0] != 0.0 || (values[0] - 1.0).abs() > 1e-12 {
                    return Err(Error::param("table", "table must start at lag 0 with correlation 1"));
                }
                if lags.windows(2).any(|w| !(w[1] > w[0])) {
                    return Err(Error::param("table", "lags must be strictly increasing"));
                }
                if values.iter().any(|v| !(v.abs() <= 1.0)) {
                    return Err(Error::param("table", "correlations must lie in [-1, 1]"));
                }
            }
            CorrelationModel::LampertiDual { base } => {
                base.validate()?;
                if base.self_similarity().is_none() {
                    return Err(Error::param("model", format!("{base} is not self-similar; it has no Lamperti dual")));
                }
            }
        }
        Ok(())
    }

    pub fn is_stationary(&self) -> bool {
        matches!(
            self,
            CorrelationModel::PowerExp { .. }
                | CorrelationModel::CustomTable { .. }
                | CorrelationModel::LampertiDual { .. }
        )
    }

    /// Self-similarity exponent (paths scale like `lambda^{alpha/2}`), if any.
    pub fn self_similarity(&self) -> Option<f64> {
        match self {
            CorrelationModel::Fbm { alpha } => Some(*alpha),
            CorrelationModel::SelfSimilarBeta { .. } => Some(1.0),
            _ => None,
        }
    }

    /// Stationary correlation at lag `h`. Panics for non-stationary models.
    fn stationary_corr(&self, h: f64) -> Result<f64> {
        let h = h.abs();
        match self {
            CorrelationModel::PowerExp { alpha, scale } => Ok((-(h / scale).powf(*alpha)).exp()),
            CorrelationModel::CustomTable { lags, values } => {
                let last = *lags.last().expect("validated");
                if h > last * (1.0 + 1e-12) {
                    return Err(Error::param("table", format!("lag {h} exceeds the table's last lag {last}")));
                }
                let k = lags.partition_point(|&l| l <= h);
                if k >= lags.len() {
                    return Ok(values[lags.len() - 1]);
                }
                let (l0, l1) = (lags[k - 1], lags[k]);
                let w = (h - l0) / (l1 - l0);
                Ok(values[k - 1] * (1.0 - w) + values[k] * w)
            }
            CorrelationModel::LampertiDual { base } => match **base {
                // cosh(a h/2) - (2 sinh(h/2))^a / 2, rearranged to avoid cancellation
                CorrelationModel::Fbm { alpha } => {
                    let tail = -(alpha * (-(-h).exp()).ln_1p()).exp_m1();
                    Ok(0.5 * (-alpha * h / 2.0).exp() + 0.5 * (alpha * h / 2.0).exp() * tail)
                }
                _ => {
                    let alpha = base.self_similarity().expect("validated");
                    Ok(base.cov(1.0, h.exp())? * (-alpha * h / 2.0).exp())
                }
            },
            _ => unreachable!("non-stationary model"),
        }
    }

    pub fn cov(&self, s: f64, t: f64) -> Result<f64> {
        match self {
            CorrelationModel::Fbm { alpha } => fbm_cov(s, t, *alpha),
            CorrelationModel::SelfSimilarBeta { beta } => {
                if s < 0.0 || t < 0.0 {
                    return Err(Error::param("t", "self-similar kernel needs s, t >= 0"));
                }
                if s == 0.0 || t == 0.0 {
                    return Ok(0.0);
                }
                // in logs to stay finite for large beta
                let ln = beta * 2f64.ln() + 0.5 * (1.0 + beta) * (s.ln() + t.ln()) - beta * (s + t).ln();
                Ok(ln.exp())
            }
            _ => self.stationary_corr(t - s),
        }
    }
}

/// `(s^alpha + t^alpha - |t - s|^alpha) / 2`.
pub fn fbm_cov(s: f64, t: f64, alpha: f64) -> Result<f64> {
    if !(alpha > 0.0 && alpha < 2.0) {
        return Err(Error::param("alpha", format!("fbm needs alpha in (0,2), got {alpha}")));
    }
    if !(s >= 0.0 && t >= 0.0) {
        return Err(Error::param("t", format!("fbm times must be >= 0, got ({s}, {t})")));
    }
    Ok(0.5 * (s.powf(alpha) + t.powf(alpha) - (t - s).abs().powf(alpha)))
}

/// One trajectory on a grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampledPath {
    pub grid: TimeGrid,
    pub values: Vec<f64>,
    pub label: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Cholesky,
    Circulant,
}

impl std::str::FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "cholesky" => Ok(Method::Cholesky),
            "circulant" => Ok(Method::Circulant),
            _ => Err(Error::param("method", format!("`{s}` is neither cholesky nor circulant"))),
        }
    }
}

#[derive(Clone)]
enum Engine {
    Cholesky {
        factor: PackedLower,
        /// Grid indices with positive variance; the rest are identically 0.
        active: Vec<usize>,
    },
    Circulant {
        /// `sqrt(lambda_k / M)` for the size-`M` embedding.
        scale: Vec<f64>,
        fft: Arc<dyn Fft<f64>>,
        /// Values are cumulated increments starting from 0 (fBm).
        cumulate: bool,
    },
}

/// Reusable sampler for one model on one grid.
#[derive(Clone)]
pub struct PathSampler {
    model: CorrelationModel,
    grid: TimeGrid,
    engine: Engine,
    jitter: f64,
    warnings: Vec<String>,
}

impl fmt::Debug for PathSampler {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("PathSampler")
            .field("model", &self.model)
            .field("grid", &self.grid)
            .field("jitter", &self.jitter)
            .field("warnings", &self.warnings)
            .finish()
    }
}

impl PathSampler {
    pub fn new(model: &CorrelationModel, grid: TimeGrid, method: Method) -> Result<Self> {
        model.validate()?;
        let mut warnings = vec![];
        let (engine, jitter) = match method {
            Method::Cholesky => Self::cholesky(model, &grid)?,
            Method::Circulant => (Self::circulant(model, &grid, &mut warnings)?, 0.0),
        };
        Ok(PathSampler { model: model.clone(), grid, engine, jitter, warnings })
    }

    /// Circulant embedding where the model allows it, Cholesky otherwise.
    /// Also falls back to Cholesky, with a warning, when the minimal
    /// embedding has materially negative eigenvalues.
    pub fn auto(model: &CorrelationModel, grid: TimeGrid) -> Result<Self> {
        let circulant_ok = matches!(grid, TimeGrid::Uniform(g) if match model {
            CorrelationModel::Fbm { .. } => g.t0 == 0.0,
            m => m.is_stationary(),
        });
        if !circulant_ok {
            return Self::new(model, grid, Method::Cholesky);
        }
        match Self::new(model, grid, Method::Circulant) {
            Err(Error::CirculantEmbedding { min_eigenvalue, max_eigenvalue }) => {
                let mut s = Self::new(model, grid, Method::Cholesky)?;
                s.warnings.push(format!(
                    "circulant embedding not nonnegative definite (min {min_eigenvalue:e}, max {max_eigenvalue:e}); used cholesky"
                ));
                Ok(s)
            }
            other => other,
        }
    }

    fn cholesky(model: &CorrelationModel, grid: &TimeGrid) -> Result<(Engine, f64)> {
        let t = grid.times();
        let active: Vec<usize> =
            (0..t.len()).map(|k| Ok((k, model.cov(t[k], t[k])?))).collect::<Result<Vec<_>>>()?
                .into_iter()
                .filter(|&(_, v)| v > 0.0)
                .map(|(k, _)| k)
                .collect();
        let mut gram = DMatrix::zeros(active.len(), active.len());
        for (a, &p) in active.iter().enumerate() {
            for (b, &q) in active.iter().enumerate().take(a + 1) {
                let c = model.cov(t[p], t[q])?;
                gram[(a, b)] = c;
                gram[(b, a)] = c;
            }
        }
        let (l, jitter) = cholesky_jittered(&gram)?;
        Ok((Engine::Cholesky { factor: PackedLower::new(&l), active }, jitter))
    }

    fn circulant(model: &CorrelationModel, grid: &TimeGrid, warnings: &mut Vec<String>) -> Result<Engine> {
        let g = match grid {
            TimeGrid::Uniform(g) => *g,
            TimeGrid::Exponential(_) => {
                return Err(Error::param("method", "circulant embedding needs a uniform grid; use cholesky"))
            }
        };
        let dt = g.step();
        let (acf, cumulate): (Vec<f64>, bool) = match model {
            CorrelationModel::Fbm { alpha } => {
                if g.t0 != 0.0 {
                    return Err(Error::param("method", "circulant fbm needs a grid starting at 0; use cholesky"));
                }
                let scale = 0.5 * dt.powf(*alpha);
                let acf = (0..g.m - 1)
                    .map(|k| {
                        let k = k as f64;
                        scale * ((k + 1.0).powf(*alpha) - 2.0 * k.powf(*alpha) + (k - 1.0).abs().powf(*alpha))
                    })
                    .collect();
                (acf, true)
            }
            m if m.is_stationary() => {
                ((0..g.m).map(|k| m.stationary_corr(k as f64 * dt)).collect::<Result<_>>()?, false)
            }
            _ => {
                return Err(Error::param(
                    "method",
                    "circulant embedding needs a stationary model or fbm; use cholesky",
                ))
            }
        };
        let n = acf.len();
        let size = if n == 1 { 1 } else { 2 * (n - 1) };
        let mut row: Vec<Complex<f64>> = (0..size)
            .map(|k| Complex::new(acf[if k < n { k } else { size - k }], 0.0))
            .collect();
        let fft = FftPlanner::new().plan_fft_forward(size);
        fft.process(&mut row);
        let max = row.iter().map(|c| c.re).fold(f64::NEG_INFINITY, f64::max);
        let min = row.iter().map(|c| c.re).fold(f64::INFINITY, f64::min);
        if min < -CIRCULANT_TOL * max {
            return Err(Error::CirculantEmbedding { min_eigenvalue: min, max_eigenvalue: max });
        }
        if min < 0.0 {
            warnings.push(format!("clipped negative circulant eigenvalues (min {min:e}, max {max:e})"));
        }
        let scale = row.iter().map(|c| (c.re.max(0.0) / size as f64).sqrt()).collect();
        Ok(Engine::Circulant { scale, fft, cumulate })
    }

    pub fn grid(&self) -> &TimeGrid {
        &self.grid
    }

    pub fn model(&self) -> &CorrelationModel {
        &self.model
    }

    pub fn jitter(&self) -> f64 {
        self.jitter
    }

    pub fn warnings(&self) -> &[String] {
        &self.warnings
    }

    pub fn method(&self) -> Method {
        match self.engine {
            Engine::Cholesky { .. } => Method::Cholesky,
            Engine::Circulant { .. } => Method::Circulant,
        }
    }

    /// `count` independent paths drawn from stream `block` of `seed`.
    pub fn block(&self, seed: u64, block: u64, count: usize) -> Vec<Vec<f64>> {
        let mut rng = stream(seed, block);
        let m = self.grid.len();
        let mut out = Vec::with_capacity(count);
        match &self.engine {
            Engine::Cholesky { factor, active } => {
                let mut z = vec![0.0; active.len()];
                let mut x = vec![0.0; active.len()];
                for _ in 0..count {
                    z.iter_mut().for_each(|v| *v = rng.sample(StandardNormal));
                    factor.apply(&z, &mut x);
                    let mut path = vec![0.0; m];
                    for (&k, &v) in active.iter().zip(&x) {
                        path[k] = v;
                    }
                    out.push(path);
                }
            }
            Engine::Circulant { scale, fft, cumulate } => {
                let mut buf = vec![Complex::new(0.0, 0.0); scale.len()];
                let mut scratch = vec![Complex::new(0.0, 0.0); fft.get_inplace_scratch_len()];
                while out.len() < count {
                    for (b, &s) in buf.iter_mut().zip(scale) {
                        let (re, im): (f64, f64) = (rng.sample(StandardNormal), rng.sample(StandardNormal));
                        *b = Complex::new(s * re, s * im);
                    }
                    fft.process_with_scratch(&mut buf, &mut scratch);
                    for part in [0, 1] {
                        if out.len() == count {
                            break;
                        }
                        let pick = |c: &Complex<f64>| if part == 0 { c.re } else { c.im };
                        let path = if *cumulate {
                            let mut acc = 0.0;
                            let mut p = Vec::with_capacity(m);
                            p.push(0.0);
                            for c in &buf[..m - 1] {
                                acc += pick(c);
                                p.push(acc);
                            }
                            p
                        } else {
                            buf[..m].iter().map(pick).collect()
                        };
                        out.push(path);
                    }
                }
            }
        }
        out
    }

    /// Path `index` of `seed`: element `index % 2` of block `index / 2`.
    pub fn path_values(&self, seed: u64, index: u64) -> Vec<f64> {
        let mut b = self.block(seed, index / 2, 2);
        b.swap_remove((index % 2) as usize)
    }

    /// `n_paths` paths, path `k` reproducible from `(seed, k)`.
    pub fn sample(&self, seed: u64, n_paths: usize, workers: Workers) -> Vec<SampledPath> {
        let blocks = map_indexed(n_paths.div_ceil(2), workers, |b| self.block(seed, b as u64, 2));
        let label = self.model.to_string();
        blocks
            .into_iter()
            .flatten()
            .take(n_paths)
            .map(|values| SampledPath { grid: self.grid, values, label: label.clone() })
            .collect()
    }

    /// Apply `f` to `n_groups` groups of `group_size` independent paths; group
    /// `g` is block `g` of `seed`. Results are in group order.
    pub fn map_groups<T, F>(&self, seed: u64, n_groups: usize, group_size: usize, workers: Workers, f: F) -> Vec<T>
    where
        T: Send,
        F: Fn(&[Vec<f64>]) -> T + Sync + Send,
    {
        map_indexed(n_groups, workers, |g| f(&self.block(seed, g as u64, group_size)))
    }
}

/// `sample_paths` in one call.
pub fn sample_paths(
    model: &CorrelationModel,
    grid: TimeGrid,
    n_paths: usize,
    seed: u64,
    method: Method,
    workers: Workers,
) -> Result<Vec<SampledPath>> {
    Ok(PathSampler::new(model, grid, method)?.sample(seed, n_paths, workers))
}

/// `X*(s) = exp(-alpha s / 2) X(exp(s))` on the uniform `s`-grid.
pub fn lamperti_dual(path: &SampledPath, alpha: f64) -> Result<SampledPath> {
    let g = match path.grid {
        TimeGrid::Exponential(g) => g,
        TimeGrid::Uniform(_) => {
            return Err(Error::param("grid", "the Lamperti dual needs a path on an exponential grid"))
        }
    };
    let s = g.points();
    let values = s.iter().zip(&path.values).map(|(s, x)| (-alpha * s / 2.0).exp() * x).collect();
    Ok(SampledPath { grid: TimeGrid::Uniform(g), values, label: format!("lamperti({})", path.label) })
}

/// Check that explicit times are `exp` of a uniform grid and return it.
pub fn exponential_grid_of(times: &[f64]) -> Result<GridSpec> {
    if times.len() < 2 || times.iter().any(|&t| !(t > 0.0)) {
        return Err(Error::param("grid", "need at least two positive times"));
    }
    let s: Vec<f64> = times.iter().map(|t| t.ln()).collect();
    let g = GridSpec::new(s[0], s[s.len() - 1], s.len())?;
    for (k, &t) in times.iter().enumerate() {
        let want = g.point(k).exp();
        if ((t - want) / want).abs() > EXP_GRID_TOL {
            return Err(Error::param("grid", format!("time {t} at index {k} is off the exponential grid")));
        }
    }
    Ok(g)
}

/// Pointwise order statistic of equally long value vectors.
pub fn order_stat_values(paths: &[Vec<f64>], sel: &OrderStatSelector) -> Result<Vec<f64>> {
    if paths.len() != sel.n() {
        return Err(Error::param("paths", format!("expected {} paths, got {}", sel.n(), paths.len())));
    }
    let m = paths[0].len();
    if paths.iter().any(|p| p.len() != m) {
        return Err(Error::param("paths", "paths have different lengths"));
    }
    let mut buf = vec![0.0; sel.n()];
    Ok((0..m)
        .map(|k| {
            for (b, p) in buf.iter_mut().zip(paths) {
                *b = p[k];
            }
            sel.select(&mut buf)
        })
        .collect())
}

pub fn order_stat_path(paths: &[SampledPath], sel: &OrderStatSelector) -> Result<SampledPath> {
    let first = paths.first().ok_or_else(|| Error::param("paths", "no paths given"))?;
    if paths.iter().any(|p| p.grid != first.grid) {
        return Err(Error::param("paths", "paths are on different grids"));
    }
    let values: Vec<Vec<f64>> = paths.iter().map(|p| p.values.clone()).collect();
    Ok(SampledPath {
        grid: first.grid,
        values: order_stat_values(&values, sel)?,
        label: format!("order_stat(r={},n={},{})", sel.rank(), sel.n(), first.label),
    })
}

/// Grid maximum. Underestimates the continuous supremum.
pub fn path_max(values: &[f64]) -> f64 {
    values.iter().cloned().fold(f64::NEG_INFINITY, f64::max)
}

pub fn sup_indicator(path: &SampledPath, level: f64) -> bool {
    path_max(&path.values) <= level
}

/// Write paths as CSV rows `t,value,path_id`.
pub fn write_paths_csv<W: Write>(paths: &[SampledPath], out: W) -> Result<()> {
    let to_err = |e: csv::Error| Error::Parse { path: "<csv output>".into(), reason: e.to_string() };
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["t", "value", "path_id"]).map_err(to_err)?;
    for (id, p) in paths.iter().enumerate() {
        for (t, v) in p.grid.times().iter().zip(&p.values) {
            w.serialize((t, v, id)).map_err(to_err)?;
        }
    }
    w.flush().map_err(|e| Error::Io { path: "<csv output>".into(), source: e })
}
