//! Comparison inequalities for order statistics of Gaussian arrays.
//!
//! The crate evaluates closed-form bounds on `P{X_(r) <= u} - P{Y_(r) <= u}`
//! and on the ratio of the two probabilities, checks them by exact-sampling
//! Monte Carlo, and drives process-level experiments: lower-tail exponents of
//! fBm order-statistics processes, fractional Brownian pursuit, and
//! Gumbel-type limits for stationary order-statistics processes.

// `!(x > 0.0)` style checks are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bounds;
pub mod error;
pub mod experiments;
pub mod mc;
pub mod paths;
pub mod quadrature;
pub mod rng;
pub mod special;
pub mod stats;
pub mod types;

#[cfg(test)]
mod testutil;

pub use error::{Error, Result, Violation};
pub use types::{
    interpolate_covariance, pairwise_max_corr, validate_spec, Convention, GaussianArraySpec,
    OrderStatSelector, ThresholdVector,
};
