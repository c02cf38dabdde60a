use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};

/// Random correlation matrix: normalized `A A^T` with `A` of size `dim x (dim+1)`.
pub fn random_corr(dim: usize, seed: u64) -> DMatrix<f64> {
    loadings_corr(dim, seed, -1.0)
}

/// Random correlation matrix with nonnegative entries.
pub fn random_nonneg_corr(dim: usize, seed: u64) -> DMatrix<f64> {
    loadings_corr(dim, seed, 0.0)
}

fn loadings_corr(dim: usize, seed: u64, lo: f64) -> DMatrix<f64> {
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let a = DMatrix::from_fn(dim, dim + 1, |_, _| rng.random_range(lo..1.0));
    let s = &a * a.transpose();
    let d = s.diagonal().map(|v: f64| 1.0 / v.sqrt());
    let mut c = DMatrix::from_fn(dim, dim, |p, q| s[(p, q)] * d[p] * d[q]);
    c.fill_diagonal(1.0);
    c
}
