//! Process-level Slepian ordering: if `X` and `Y` have equal variances and
//! `cov_X <= cov_Y`, then `sup (X_{r:n} + cZ)` exceeds a level at least as
//! often as `sup (Y_{r:n} + cZ)`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mc::McEstimate;
use crate::paths::{path_max, CorrelationModel, GridSpec, PathSampler, TimeGrid};
use crate::rng::{derive_seed, map_indexed, Workers};
use crate::stats::proportion;
use crate::types::OrderStatSelector;

/// Allowed mismatch of the two variance functions on the grid.
pub const VARIANCE_TOL: f64 = 1e-9;

/// Slack for the entrywise covariance ordering on the grid.
pub const ORDERING_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SlepianParams {
    pub model_x: CorrelationModel,
    pub model_y: CorrelationModel,
    pub model_z: CorrelationModel,
    pub c: f64,
    pub level: f64,
    pub grid: GridSpec,
    pub n: usize,
    /// Rank in the process convention (`r = 1` is the maximum).
    pub r: usize,
    pub n_paths: usize,
    pub seed: u64,
    /// Also compare `Z_{r:n} + cX` with `Z_{r:n} + cY`.
    pub swapped_variant: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OrderingCheck {
    /// `P{sup > level}` on the `X` side.
    pub p_x: McEstimate,
    pub p_y: McEstimate,
    /// `p_x >= p_y - 3 * combined stderr`.
    pub ordered: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SlepianReport {
    pub direct: OrderingCheck,
    pub swapped: Option<OrderingCheck>,
    pub warnings: Vec<String>,
}

/// Check equal variances and `cov_X <= cov_Y` on the grid points.
pub fn check_preconditions(x: &CorrelationModel, y: &CorrelationModel, grid: &GridSpec) -> Result<()> {
    let t = grid.points();
    for &s in &t {
        let (vx, vy) = (x.cov(s, s)?, y.cov(s, s)?);
        if (vx - vy).abs() > VARIANCE_TOL {
            return Err(Error::param(
                "model_y",
                format!("variances differ at t={s}: {vx} vs {vy} (tolerance {VARIANCE_TOL:e})"),
            ));
        }
    }
    for (i, &s) in t.iter().enumerate() {
        for &u in &t[i + 1..] {
            let (cx, cy) = (x.cov(s, u)?, y.cov(s, u)?);
            if cx > cy + ORDERING_TOL {
                return Err(Error::param(
                    "model_x",
                    format!("cov_X({s},{u}) = {cx} exceeds cov_Y = {cy}; the ordering precondition fails"),
                ));
            }
        }
    }
    Ok(())
}

/// `P{sup_t (A_{r:n}(t) + c B(t)) > level}` with `A` from `main` and `B`
/// from `extra`; replication `g` uses stream `g` of each seed.
#[allow(clippy::too_many_arguments)]
fn exceedance(
    main: &PathSampler,
    extra: &PathSampler,
    sel: &OrderStatSelector,
    c: f64,
    level: f64,
    n_paths: usize,
    seeds: (u64, u64),
    workers: Workers,
) -> McEstimate {
    let n = sel.n();
    let hits = map_indexed(n_paths, workers, |g| {
        let a = main.block(seeds.0, g as u64, n);
        let b = if c != 0.0 { extra.block(seeds.1, g as u64, 1) } else { vec![] };
        let mut buf = vec![0.0; n];
        let combined: Vec<f64> = (0..a[0].len())
            .map(|k| {
                for (x, path) in buf.iter_mut().zip(&a) {
                    *x = path[k];
                }
                let v = sel.select(&mut buf);
                if c != 0.0 {
                    v + c * b[0][k]
                } else {
                    v
                }
            })
            .collect();
        path_max(&combined) > level
    });
    let count = hits.iter().filter(|&&h| h).count() as u64;
    let (value, stderr) = proportion(count, n_paths as u64);
    McEstimate { value, stderr, n_samples: n_paths as u64, seed: seeds.0, jitter: main.jitter().max(extra.jitter()) }
}

fn ordering(p_x: McEstimate, p_y: McEstimate) -> OrderingCheck {
    let se = p_x.stderr.hypot(p_y.stderr);
    OrderingCheck { p_x, p_y, ordered: p_x.value >= p_y.value - 3.0 * se }
}

pub fn slepian_process_check(p: &SlepianParams, workers: Workers) -> Result<SlepianReport> {
    let sel = OrderStatSelector::descending(p.n, p.r)?;
    if !(p.c >= 0.0 && p.c.is_finite()) {
        return Err(Error::param("c", format!("must be finite and >= 0, got {}", p.c)));
    }
    if !p.level.is_finite() {
        return Err(Error::param("level", "must be finite"));
    }
    if p.n_paths == 0 {
        return Err(Error::param("paths", "need at least one path"));
    }
    check_preconditions(&p.model_x, &p.model_y, &p.grid)?;
    let grid = TimeGrid::Uniform(p.grid);
    let sx = PathSampler::auto(&p.model_x, grid)?;
    let sy = PathSampler::auto(&p.model_y, grid)?;
    let sz = PathSampler::auto(&p.model_z, grid)?;
    let seed = |k| derive_seed(p.seed, k);

    let direct = ordering(
        exceedance(&sx, &sz, &sel, p.c, p.level, p.n_paths, (seed(1), seed(3)), workers),
        exceedance(&sy, &sz, &sel, p.c, p.level, p.n_paths, (seed(2), seed(4)), workers),
    );
    let swapped = p.swapped_variant.then(|| {
        ordering(
            exceedance(&sz, &sx, &sel, p.c, p.level, p.n_paths, (seed(5), seed(6)), workers),
            exceedance(&sz, &sy, &sel, p.c, p.level, p.n_paths, (seed(7), seed(8)), workers),
        )
    });
    let warnings = [&sx, &sy, &sz].iter().flat_map(|s| s.warnings().to_vec()).collect();
    Ok(SlepianReport { direct, swapped, warnings })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params(scale_x: f64, scale_y: f64) -> SlepianParams {
        SlepianParams {
            model_x: CorrelationModel::PowerExp { alpha: 1.0, scale: scale_x },
            model_y: CorrelationModel::PowerExp { alpha: 1.0, scale: scale_y },
            model_z: CorrelationModel::PowerExp { alpha: 2.0, scale: 1.0 },
            c: 0.5,
            level: 1.5,
            grid: GridSpec::new(0.0, 4.0, 65).unwrap(),
            n: 2,
            r: 1,
            n_paths: 4000,
            seed: 12,
            swapped_variant: true,
        }
    }

    #[test]
    fn identical_models_agree() {
        let rep = slepian_process_check(&params(1.0, 1.0), Workers::default()).unwrap();
        let d = rep.direct;
        assert!((d.p_x.value - d.p_y.value).abs() <= 3.0 * d.p_x.stderr.hypot(d.p_y.stderr));
        assert!(d.ordered);
    }

    #[test]
    fn weaker_correlation_exceeds_more_often() {
        let rep = slepian_process_check(&params(0.2, 2.0), Workers::default()).unwrap();
        assert!(rep.direct.ordered);
        assert!(rep.direct.p_x.value > rep.direct.p_y.value);
        assert!(rep.swapped.unwrap().ordered);
    }

    #[test]
    fn preconditions_are_enforced() {
        assert!(slepian_process_check(&params(2.0, 0.2), Workers::SERIAL).is_err());
        let mut p = params(1.0, 1.0);
        p.model_y = CorrelationModel::Fbm { alpha: 1.0 };
        assert!(slepian_process_check(&p, Workers::SERIAL).is_err());
    }
}
