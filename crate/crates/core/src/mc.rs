//! Exact-sampling Monte Carlo for order-statistic probabilities of Gaussian
//! arrays, plus closed-form oracles for the smallest shapes.

use nalgebra::DMatrix;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::{chunk_ranges, derive_seed, map_indexed, stream, Workers};
use crate::special::{bivariate_cdf, std_normal_cdf, Correlation};
use crate::types::{check_same_shape, GaussianArraySpec, OrderStatSelector, ThresholdVector};

/// Diagonal jitter tried in turn until Cholesky succeeds.
pub const JITTER_LADDER: [f64; 4] = [0.0, 1e-14, 1e-12, 1e-10];

/// Sampling units (samples, or antithetic pairs) per random stream.
pub const DEFAULT_CHUNK: u64 = 2048;

pub const MIN_SAMPLES: u64 = 100;

/// Successes required per sample for a log-ratio estimate (`p_hat >= 10/n`).
pub const MIN_RATIO_HITS: f64 = 10.0;

/// Lower Cholesky factor of `m`, adding the smallest jitter from
/// [`JITTER_LADDER`] that makes factorization succeed.
pub fn cholesky_jittered(m: &DMatrix<f64>) -> Result<(DMatrix<f64>, f64)> {
    for &jitter in &JITTER_LADDER {
        let mut a = m.clone();
        for p in 0..a.nrows() {
            a[(p, p)] += jitter;
        }
        if let Some(c) = a.cholesky() {
            return Ok((c.l(), jitter));
        }
    }
    Err(Error::Factorization { jitter: JITTER_LADDER[JITTER_LADDER.len() - 1] })
}

/// Row-major packed lower-triangular factor, applied as `out = L z`.
#[derive(Debug, Clone)]
pub(crate) struct PackedLower {
    lower: Vec<f64>,
}

impl PackedLower {
    pub(crate) fn new(l: &DMatrix<f64>) -> Self {
        let dim = l.nrows();
        let mut lower = Vec::with_capacity(dim * (dim + 1) / 2);
        for p in 0..dim {
            for q in 0..=p {
                lower.push(l[(p, q)]);
            }
        }
        PackedLower { lower }
    }

    pub(crate) fn apply(&self, z: &[f64], out: &mut [f64]) {
        let mut k = 0;
        for (p, o) in out.iter_mut().enumerate() {
            let row = &self.lower[k..k + p + 1];
            *o = row.iter().zip(z).map(|(a, b)| a * b).sum();
            k += p + 1;
        }
    }
}

/// Monte Carlo estimate of a probability or of a derived quantity.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct McEstimate {
    pub value: f64,
    pub stderr: f64,
    pub n_samples: u64,
    pub seed: u64,
    /// Largest Cholesky jitter used by any sampler involved.
    pub jitter: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct McOptions {
    /// Pair every draw `z` with `-z`.
    pub antithetic: bool,
    pub chunk: u64,
    pub workers: Workers,
}

impl Default for McOptions {
    fn default() -> Self {
        McOptions { antithetic: true, chunk: DEFAULT_CHUNK, workers: Workers::default() }
    }
}

impl McOptions {
    pub fn with_workers(mut self, workers: Workers) -> Self {
        self.workers = workers;
        self
    }

    fn draws_per_unit(&self) -> u64 {
        if self.antithetic {
            2
        } else {
            1
        }
    }
}

/// Integer tallies over sampling units. Each unit contributes `a` = sum of
/// its one or two scores (indicator or indicator difference).
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
struct Tally {
    units: u64,
    sum: i64,
    sum_sq: i64,
}

impl Tally {
    fn add(&mut self, a: i64) {
        self.units += 1;
        self.sum += a;
        self.sum_sq += a * a;
    }

    fn merge(mut self, other: Tally) -> Tally {
        self.units += other.units;
        self.sum += other.sum;
        self.sum_sq += other.sum_sq;
        self
    }

    /// Mean per draw and its standard error from the unit averages.
    fn mean_and_stderr(&self, draws_per_unit: u64) -> (f64, f64) {
        let k = draws_per_unit as f64;
        let units = self.units as f64;
        let mean = self.sum as f64 / (units * k);
        if self.units < 2 {
            return (mean, 0.0);
        }
        let var = ((self.sum_sq as f64 / (k * k)) - units * mean * mean).max(0.0) / (units - 1.0);
        (mean, (var / units).sqrt())
    }
}

/// Exact sampler for one array specification.
#[derive(Debug, Clone)]
pub struct ArraySampler {
    spec: GaussianArraySpec,
    factor: PackedLower,
    jitter: f64,
}

impl ArraySampler {
    pub fn new(spec: &GaussianArraySpec) -> Result<Self> {
        let (l, jitter) = cholesky_jittered(spec.matrix())?;
        Ok(ArraySampler { spec: spec.clone(), factor: PackedLower::new(&l), jitter })
    }

    pub fn spec(&self) -> &GaussianArraySpec {
        &self.spec
    }

    pub fn jitter(&self) -> f64 {
        self.jitter
    }

    /// `out = L z` (flat, row-major in the array index).
    fn transform(&self, z: &[f64], out: &mut [f64]) {
        self.factor.apply(z, out);
    }

    /// True iff the selected order statistic of every row is `<= u_i`,
    /// evaluated on `sign * x`. Uses `X_(r) <= u  <=>  #{j : X_j <= u} >= r`.
    fn event(&self, x: &[f64], sign: f64, rank: usize, u: &[f64]) -> bool {
        let n = self.spec.n();
        x.chunks_exact(n)
            .zip(u)
            .all(|(row, &ui)| row.iter().filter(|&&v| sign * v <= ui).count() >= rank)
    }

    /// `count` draws as `d x n` matrices, reproducible from `seed`. Draw `k`
    /// comes from stream `k / DEFAULT_CHUNK`, so any prefix is stable.
    pub fn samples(&self, seed: u64, count: u64) -> impl Iterator<Item = DMatrix<f64>> + '_ {
        let (d, n) = self.spec.shape();
        let mut z = vec![0.0; d * n];
        let mut x = vec![0.0; d * n];
        let mut rng = stream(seed, 0);
        (0..count).map(move |k| {
            if k % DEFAULT_CHUNK == 0 {
                rng = stream(seed, k / DEFAULT_CHUNK);
            }
            z.iter_mut().for_each(|v| *v = rng.sample(StandardNormal));
            self.transform(&z, &mut x);
            DMatrix::from_row_slice(d, n, &x)
        })
    }

    fn check(&self, sel: &OrderStatSelector, u: &ThresholdVector, n_samples: u64) -> Result<()> {
        if sel.n() != self.spec.n() {
            return Err(Error::param(
                "r",
                format!("selector is for n={} but the array has n={}", sel.n(), self.spec.n()),
            ));
        }
        u.check(&self.spec)?;
        if n_samples < MIN_SAMPLES {
            return Err(Error::param("n_samples", format!("{n_samples} is below {MIN_SAMPLES}")));
        }
        Ok(())
    }

    /// Tally `score(z, x, antithetic)` over `units` sampling units, where `x`
    /// is scratch space of length `dim`.
    fn tally(
        units: u64,
        seed: u64,
        opts: &McOptions,
        dim: usize,
        score: impl Fn(&[f64], &mut [f64], bool) -> i64 + Sync + Send,
    ) -> Tally {
        let chunks = chunk_ranges(units, opts.chunk);
        let parts = map_indexed(chunks.len(), opts.workers, |c| {
            let (_, len) = chunks[c];
            let mut rng = stream(seed, c as u64);
            let mut z = vec![0.0; dim];
            let mut x = vec![0.0; dim];
            let mut t = Tally::default();
            for _ in 0..len {
                z.iter_mut().for_each(|v| *v = rng.sample(StandardNormal));
                t.add(score(&z, &mut x, opts.antithetic));
            }
            t
        });
        parts.into_iter().fold(Tally::default(), Tally::merge)
    }

    fn units(n_samples: u64, opts: &McOptions) -> u64 {
        n_samples.div_ceil(opts.draws_per_unit())
    }

    /// Estimate `P{X_(r) <= u}` (componentwise over rows).
    pub fn prob_le(
        &self,
        sel: &OrderStatSelector,
        u: &ThresholdVector,
        n_samples: u64,
        seed: u64,
        opts: &McOptions,
    ) -> Result<McEstimate> {
        self.check(sel, u, n_samples)?;
        let rank = sel.ascending_rank();
        let units = Self::units(n_samples, opts);
        let dim = self.spec.dim();
        let t = Self::tally(units, seed, opts, dim, |z, x, antithetic| {
            self.transform(z, x);
            let mut a = self.event(x, 1.0, rank, u.as_slice()) as i64;
            if antithetic {
                a += self.event(x, -1.0, rank, u.as_slice()) as i64;
            }
            a
        });
        let (value, stderr) = t.mean_and_stderr(opts.draws_per_unit());
        Ok(McEstimate {
            value,
            stderr,
            n_samples: units * opts.draws_per_unit(),
            seed,
            jitter: self.jitter,
        })
    }
}

/// Per-row order statistics of one `d x n` sample.
pub fn order_stat_vector(sample: &DMatrix<f64>, sel: &OrderStatSelector) -> Result<Vec<f64>> {
    if sample.ncols() != sel.n() {
        return Err(Error::param(
            "r",
            format!("selector is for n={} but the sample has {} columns", sel.n(), sample.ncols()),
        ));
    }
    let mut buf = vec![0.0; sel.n()];
    Ok((0..sample.nrows())
        .map(|i| {
            for (j, b) in buf.iter_mut().enumerate() {
                *b = sample[(i, j)];
            }
            sel.select(&mut buf)
        })
        .collect())
}

pub fn estimate_prob_le(
    spec: &GaussianArraySpec,
    sel: &OrderStatSelector,
    u: &ThresholdVector,
    n_samples: u64,
    seed: u64,
    opts: &McOptions,
) -> Result<McEstimate> {
    ArraySampler::new(spec)?.prob_le(sel, u, n_samples, seed, opts)
}

/// Both sides of a comparison, each with its own derived seed.
fn both_sides(
    x: &GaussianArraySpec,
    y: &GaussianArraySpec,
    sel: &OrderStatSelector,
    u: &ThresholdVector,
    n_samples: u64,
    seed: u64,
    opts: &McOptions,
) -> Result<(McEstimate, McEstimate)> {
    check_same_shape(x, y)?;
    let px = estimate_prob_le(x, sel, u, n_samples, derive_seed(seed, 1), opts)?;
    let py = estimate_prob_le(y, sel, u, n_samples, derive_seed(seed, 2), opts)?;
    Ok((px, py))
}

/// `Delta = P{X_(r) <= u} - P{Y_(r) <= u}` from independent streams.
pub fn estimate_delta(
    x: &GaussianArraySpec,
    y: &GaussianArraySpec,
    sel: &OrderStatSelector,
    u: &ThresholdVector,
    n_samples: u64,
    seed: u64,
    opts: &McOptions,
) -> Result<McEstimate> {
    let (px, py) = both_sides(x, y, sel, u, n_samples, seed, opts)?;
    Ok(McEstimate {
        value: px.value - py.value,
        stderr: px.stderr.hypot(py.stderr),
        n_samples: px.n_samples,
        seed,
        jitter: px.jitter.max(py.jitter),
    })
}

/// `Delta` with common random numbers: both arrays are driven by the same
/// normals. Lower variance for exploratory runs; the standard error is the
/// paired one and is not used by any bound check.
pub fn estimate_delta_crn(
    x: &GaussianArraySpec,
    y: &GaussianArraySpec,
    sel: &OrderStatSelector,
    u: &ThresholdVector,
    n_samples: u64,
    seed: u64,
    opts: &McOptions,
) -> Result<McEstimate> {
    check_same_shape(x, y)?;
    let sx = ArraySampler::new(x)?;
    let sy = ArraySampler::new(y)?;
    sx.check(sel, u, n_samples)?;
    let rank = sel.ascending_rank();
    let dim = x.dim();
    let units = ArraySampler::units(n_samples, opts);
    let t = ArraySampler::tally(units, seed, opts, dim, |z, a, antithetic| {
        let mut b = vec![0.0; dim];
        sx.transform(z, a);
        sy.transform(z, &mut b);
        let uu = u.as_slice();
        let mut score = sx.event(a, 1.0, rank, uu) as i64 - sy.event(&b, 1.0, rank, uu) as i64;
        if antithetic {
            score += sx.event(a, -1.0, rank, uu) as i64 - sy.event(&b, -1.0, rank, uu) as i64;
        }
        score
    });
    let (value, stderr) = t.mean_and_stderr(opts.draws_per_unit());
    Ok(McEstimate {
        value,
        stderr,
        n_samples: units * opts.draws_per_unit(),
        seed,
        jitter: sx.jitter.max(sy.jitter),
    })
}

/// `ln(P{X_(r) <= u} / P{Y_(r) <= u})` with a delta-method standard error.
/// Uses the same streams as [`estimate_delta`].
pub fn estimate_theta_log(
    x: &GaussianArraySpec,
    y: &GaussianArraySpec,
    sel: &OrderStatSelector,
    u: &ThresholdVector,
    n_samples: u64,
    seed: u64,
    opts: &McOptions,
) -> Result<McEstimate> {
    let (px, py) = both_sides(x, y, sel, u, n_samples, seed, opts)?;
    for (side, p) in [("X", &px), ("Y", &py)] {
        let min = MIN_RATIO_HITS / p.n_samples as f64;
        if p.value < min {
            return Err(Error::StarvedEstimate { side, p_hat: p.value, min });
        }
    }
    let rel_x = px.stderr / px.value;
    let rel_y = py.stderr / py.value;
    Ok(McEstimate {
        value: (px.value / py.value).ln(),
        stderr: rel_x.hypot(rel_y),
        n_samples: px.n_samples,
        seed,
        jitter: px.jitter.max(py.jitter),
    })
}

/// Closed-form `P{X_(r) <= u}` for shapes (1,1), (2,1) and (1,2).
pub fn exact_prob_small(
    spec: &GaussianArraySpec,
    sel: &OrderStatSelector,
    u: &ThresholdVector,
) -> Result<f64> {
    u.check(spec)?;
    let (d, n) = spec.shape();
    if sel.n() != n {
        return Err(Error::param("r", format!("selector is for n={} but the array has n={n}", sel.n())));
    }
    let rho = || Correlation::new(spec.matrix()[(0, 1)]);
    match (d, n) {
        (1, 1) => Ok(std_normal_cdf(u[0])),
        (2, 1) => Ok(bivariate_cdf(u[0], u[1], rho()?)),
        (1, 2) => {
            let both = bivariate_cdf(u[0], u[0], rho()?);
            Ok(match sel.ascending_rank() {
                2 => both,
                _ => 2.0 * std_normal_cdf(u[0]) - both,
            })
        }
        _ => Err(Error::UnsupportedShape { d, n }),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec(d: usize, n: usize, rho: f64) -> GaussianArraySpec {
        GaussianArraySpec::new(d, n, DMatrix::from_row_slice(2, 2, &[1.0, rho, rho, 1.0])).unwrap()
    }

    fn u(v: &[f64]) -> ThresholdVector {
        ThresholdVector::new(v.to_vec())
    }

    fn within(e: &McEstimate, want: f64, k: f64) -> bool {
        (e.value - want).abs() <= k * e.stderr
    }

    #[test]
    fn order_stats_of_a_row() {
        let s = DMatrix::from_row_slice(1, 3, &[3.0, 1.0, 2.0]);
        let asc = |r| order_stat_vector(&s, &OrderStatSelector::ascending(3, r).unwrap()).unwrap()[0];
        assert_eq!(asc(1), 1.0);
        assert_eq!(asc(2), 2.0);
        let top = order_stat_vector(&s, &OrderStatSelector::descending(3, 1).unwrap()).unwrap();
        assert_eq!(top[0], asc(3));
    }

    #[test]
    fn sample_moments() {
        let id = GaussianArraySpec::independent(2, 2).unwrap();
        let sampler = ArraySampler::new(&id).unwrap();
        assert_eq!(sampler.jitter(), 0.0);
        let count = 200_000;
        let (mut mean, mut cross) = (vec![0.0; 4], 0.0);
        for m in sampler.samples(3, count) {
            for p in 0..4 {
                mean[p] += m[(p / 2, p % 2)];
            }
            cross += m[(0, 0)] * m[(1, 1)];
        }
        let c = count as f64;
        let tol = 4.0 / c.sqrt();
        assert!(mean.iter().all(|v| (v / c).abs() < tol), "{mean:?}");
        assert!((cross / c).abs() < tol);

        let s = ArraySampler::new(&spec(1, 2, 0.5)).unwrap();
        let (mut sxy, mut sxx) = (0.0, 0.0);
        for m in s.samples(9, count) {
            sxy += m[(0, 0)] * m[(0, 1)];
            sxx += m[(0, 0)] * m[(0, 0)];
        }
        assert!((sxy / sxx - 0.5).abs() < 4.0 * 0.75 / c.sqrt());
    }

    #[test]
    fn samples_are_reproducible() {
        let s = ArraySampler::new(&spec(2, 1, 0.3)).unwrap();
        let a: Vec<_> = s.samples(5, 10).collect();
        let b: Vec<_> = s.samples(5, 10).collect();
        assert_eq!(a, b);
    }

    #[test]
    fn degenerate_covariance_needs_jitter() {
        let s = ArraySampler::new(&spec(1, 2, 1.0)).unwrap();
        assert!(s.jitter() > 0.0);
        for m in s.samples(1, 100) {
            assert!((m[(0, 0)] - m[(0, 1)]).abs() < 1e-5);
        }
    }

    #[test]
    fn probability_examples() {
        let opts = McOptions::default();
        let n1 = GaussianArraySpec::independent(1, 1).unwrap();
        let sel1 = OrderStatSelector::ascending(1, 1).unwrap();
        let e = estimate_prob_le(&n1, &sel1, &u(&[0.0]), 10_000, 1, &opts).unwrap();
        // antithetic pairs split exactly at the median
        assert_eq!(e.value, 0.5);

        let plain = McOptions { antithetic: false, ..opts };
        let e = estimate_prob_le(&n1, &sel1, &u(&[0.0]), 100_000, 1, &plain).unwrap();
        assert!(within(&e, 0.5, 3.0), "{e:?}");

        let max2 = OrderStatSelector::ascending(2, 2).unwrap();
        let e = estimate_prob_le(&spec(1, 2, 0.0), &max2, &u(&[0.0]), 200_000, 2, &opts).unwrap();
        assert!(within(&e, 0.25, 3.0), "{e:?}");
        let e = estimate_prob_le(&spec(1, 2, 0.5), &max2, &u(&[0.0]), 200_000, 3, &opts).unwrap();
        assert!(within(&e, 1.0 / 3.0, 3.0), "{e:?}");
        assert_eq!(e.n_samples, 200_000);
    }

    #[test]
    fn delta_and_theta_examples() {
        let opts = McOptions::default();
        let sel = OrderStatSelector::ascending(1, 1).unwrap();
        let (x, y) = (spec(2, 1, 0.5), spec(2, 1, 0.0));
        let uu = u(&[0.0, 0.0]);
        let d = estimate_delta(&x, &y, &sel, &uu, 400_000, 4, &opts).unwrap();
        assert!(within(&d, 1.0 / 12.0, 3.0), "{d:?}");
        let same = estimate_delta(&x, &x, &sel, &uu, 100_000, 4, &opts).unwrap();
        assert!(within(&same, 0.0, 3.0));
        let t = estimate_theta_log(&x, &y, &sel, &uu, 400_000, 4, &opts).unwrap();
        assert!(within(&t, (4.0f64 / 3.0).ln(), 3.0), "{t:?}");
        let crn = estimate_delta_crn(&x, &y, &sel, &uu, 100_000, 4, &opts).unwrap();
        assert!(within(&crn, 1.0 / 12.0, 3.5), "{crn:?}");
    }

    #[test]
    fn starved_ratio_names_the_side() {
        let opts = McOptions::default();
        let sel = OrderStatSelector::ascending(1, 1).unwrap();
        let (x, y) = (spec(2, 1, 0.5), spec(2, 1, 0.0));
        let far = u(&[-5.0, -5.0]);
        match estimate_theta_log(&x, &y, &sel, &far, 1000, 1, &opts) {
            Err(Error::StarvedEstimate { side, .. }) => assert_eq!(side, "X"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn parallel_results_are_identical() {
        let x = spec(2, 1, 0.4);
        let sel = OrderStatSelector::ascending(1, 1).unwrap();
        let uu = u(&[0.3, -0.2]);
        let opts = McOptions { chunk: 512, ..McOptions::default() };
        let a = estimate_prob_le(&x, &sel, &uu, 20_000, 8, &opts.with_workers(Workers::SERIAL)).unwrap();
        let b = estimate_prob_le(&x, &sel, &uu, 20_000, 8, &opts.with_workers(Workers::new(4))).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn monotone_in_thresholds_under_common_numbers() {
        let x = GaussianArraySpec::new(2, 2, crate::testutil::random_corr(4, 17)).unwrap();
        let sel = OrderStatSelector::ascending(2, 1).unwrap();
        let opts = McOptions::default();
        let mut last = 0.0;
        for k in 0..8 {
            let v = -1.0 + 0.3 * k as f64;
            let e = estimate_prob_le(&x, &sel, &u(&[v, 0.2]), 5_000, 21, &opts).unwrap();
            assert!(e.value >= last);
            last = e.value;
        }
    }

    #[test]
    fn exact_small_shapes() {
        let sel1 = OrderStatSelector::ascending(1, 1).unwrap();
        let n1 = GaussianArraySpec::independent(1, 1).unwrap();
        assert_eq!(exact_prob_small(&n1, &sel1, &u(&[0.0])).unwrap(), 0.5);
        let min2 = OrderStatSelector::ascending(2, 1).unwrap();
        let max2 = OrderStatSelector::ascending(2, 2).unwrap();
        assert!((exact_prob_small(&spec(1, 2, 0.0), &min2, &u(&[0.0])).unwrap() - 0.75).abs() < 1e-15);
        assert!((exact_prob_small(&spec(1, 2, 0.5), &max2, &u(&[0.0])).unwrap() - 1.0 / 3.0).abs() < 1e-15);
        let big = GaussianArraySpec::independent(2, 2).unwrap();
        assert!(matches!(
            exact_prob_small(&big, &min2, &u(&[0.0, 0.0])),
            Err(Error::UnsupportedShape { d: 2, n: 2 })
        ));
    }

    #[test]
    fn small_sample_budget_is_rejected() {
        let n1 = GaussianArraySpec::independent(1, 1).unwrap();
        let sel1 = OrderStatSelector::ascending(1, 1).unwrap();
        assert!(estimate_prob_le(&n1, &sel1, &u(&[0.0]), 50, 1, &McOptions::default()).is_err());
    }
}
