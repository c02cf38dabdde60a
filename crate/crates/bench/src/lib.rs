//! Fixtures shared by the kernel benchmarks in `benches/`.

use ordcmp_core::paths::{CorrelationModel, GridSpec, Method, PathSampler, TimeGrid};
use ordcmp_core::{GaussianArraySpec, OrderStatSelector, ThresholdVector};

/// A `d x n` array with exchangeable correlation `rho` between all entries.
pub fn exchangeable(d: usize, n: usize, rho: f64) -> GaussianArraySpec {
    let dim = d * n;
    let rows: Vec<Vec<f64>> =
        (0..dim).map(|p| (0..dim).map(|q| if p == q { 1.0 } else { rho }).collect()).collect();
    GaussianArraySpec::from_rows(d, n, &rows).expect("exchangeable correlation is valid for rho in [0, 1)")
}

/// Median of each row of an odd-width array, thresholded at `u` everywhere.
pub fn median_event(d: usize, n: usize, u: f64) -> (OrderStatSelector, ThresholdVector) {
    (OrderStatSelector::ascending(n, n.div_ceil(2)).unwrap(), ThresholdVector::new(vec![u; d]))
}

/// fBm on `[0, 1]` with `m` grid points, sampled by circulant embedding.
pub fn fbm_sampler(alpha: f64, m: usize) -> PathSampler {
    let grid = TimeGrid::Uniform(GridSpec::new(0.0, 1.0, m).unwrap());
    PathSampler::new(&CorrelationModel::Fbm { alpha }, grid, Method::Circulant).unwrap()
}
