//! Li-Shao type constants `-lim (1/T) ln P{sup_[0,T] (X*_{r:n} + cZ*) <= 0}`
//! from the stationary Lamperti duals of fBm.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mc::McEstimate;
use crate::paths::{CorrelationModel, GridSpec, Method, PathSampler, TimeGrid};
use crate::rng::Workers;
use crate::stats::{fit_line, proportion};
use crate::types::OrderStatSelector;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LiShaoParams {
    pub alpha: f64,
    pub n: usize,
    /// Rank in the process convention (`r = 1` is the maximum).
    pub r: usize,
    pub c: f64,
    /// Horizons `T`, increasing. All share one path per replication.
    pub horizons: Vec<f64>,
    /// Grid points per unit of dual time.
    pub points_per_unit: usize,
    pub n_paths: usize,
    pub seed: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LiShaoRung {
    pub horizon: f64,
    pub probability: McEstimate,
    /// `-(1/T) ln p` with standard error `se_p / (p T)`.
    pub constant: McEstimate,
}

/// `estimate(T2) <= estimate(T1) + 3 se` for `T2` a multiple of `T1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SubadditivityCheck {
    pub t1: f64,
    pub t2: f64,
    pub holds: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LiShaoReport {
    pub rungs: Vec<LiShaoRung>,
    /// Minus the slope of `ln p` against `T` across the ladder, which drops
    /// the `O(1/T)` bias of the single-horizon estimates.
    pub extrapolated: Option<McEstimate>,
    pub subadditivity: Vec<SubadditivityCheck>,
    pub grid_m: usize,
    pub method: Method,
    pub warnings: Vec<String>,
}

fn validate(p: &LiShaoParams) -> Result<OrderStatSelector> {
    CorrelationModel::Fbm { alpha: p.alpha }.validate()?;
    let sel = OrderStatSelector::descending(p.n, p.r)?;
    if !(p.c >= 0.0 && p.c.is_finite()) {
        return Err(Error::param("c", format!("must be finite and >= 0, got {}", p.c)));
    }
    if p.horizons.is_empty() || p.horizons.iter().any(|t| !(*t > 0.0 && t.is_finite())) {
        return Err(Error::param("t_ladder", "need at least one positive finite horizon"));
    }
    if p.horizons.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::param("t_ladder", "horizons must be strictly increasing"));
    }
    if p.points_per_unit == 0 || p.n_paths == 0 {
        return Err(Error::param("paths", "points per unit and path count must be positive"));
    }
    Ok(sel)
}

pub fn lishao_constant(p: &LiShaoParams, workers: Workers) -> Result<LiShaoReport> {
    let sel = validate(p)?;
    let ppu = p.points_per_unit as f64;
    let t_max = *p.horizons.last().expect("validated");
    let steps = (t_max * ppu).round().max(1.0) as usize;
    let grid = TimeGrid::Uniform(GridSpec::new(0.0, steps as f64 / ppu, steps + 1)?);
    let dual = CorrelationModel::LampertiDual { base: Box::new(CorrelationModel::Fbm { alpha: p.alpha }) };
    let sampler = PathSampler::auto(&dual, grid)?;
    let ends: Vec<usize> = p.horizons.iter().map(|t| ((t * ppu).round() as usize).min(steps)).collect();

    let with_z = p.c > 0.0;
    let n = p.n;
    let hits = sampler.map_groups(p.seed, p.n_paths, n + with_z as usize, workers, |paths| {
        let mut buf = vec![0.0; n];
        let mut running = f64::NEG_INFINITY;
        let mut out = Vec::with_capacity(ends.len());
        let mut next = 0;
        for k in 0..=steps {
            for (b, path) in buf.iter_mut().zip(&paths[..n]) {
                *b = path[k];
            }
            let mut v = sel.select(&mut buf);
            if with_z {
                v += p.c * paths[n][k];
            }
            running = running.max(v);
            while next < ends.len() && ends[next] == k {
                out.push(running <= 0.0);
                next += 1;
            }
        }
        out
    });

    let total = p.n_paths as u64;
    let mut rungs = Vec::with_capacity(ends.len());
    for (j, &horizon) in p.horizons.iter().enumerate() {
        let count = hits.iter().filter(|h| h[j]).count() as u64;
        if count == 0 {
            return Err(Error::ZeroSuccesses { n_samples: total });
        }
        let (pv, se) = proportion(count, total);
        let est = |value, stderr| McEstimate { value, stderr, n_samples: total, seed: p.seed, jitter: sampler.jitter() };
        rungs.push(LiShaoRung {
            horizon,
            probability: est(pv, se),
            constant: est(-pv.ln() / horizon, se / (pv * horizon)),
        });
    }

    let extrapolated = if rungs.len() >= 3 {
        let t: Vec<f64> = rungs.iter().map(|r| r.horizon).collect();
        let y: Vec<f64> = rungs.iter().map(|r| r.probability.value.ln()).collect();
        let saturated = rungs.iter().any(|r| r.probability.stderr == 0.0);
        let w: Vec<f64> = rungs.iter().map(|r| (r.probability.value / r.probability.stderr).powi(2)).collect();
        let fit = fit_line(&t, &y, (!saturated).then_some(&w[..]))?;
        Some(McEstimate {
            value: -fit.slope,
            stderr: fit.slope_stderr,
            n_samples: total,
            seed: p.seed,
            jitter: sampler.jitter(),
        })
    } else {
        None
    };

    let mut subadditivity = vec![];
    for a in &rungs {
        for b in &rungs {
            let k = b.horizon / a.horizon;
            if k >= 2.0 - 1e-9 && (k - k.round()).abs() < 1e-9 {
                let se = a.constant.stderr.hypot(b.constant.stderr);
                subadditivity.push(SubadditivityCheck {
                    t1: a.horizon,
                    t2: b.horizon,
                    holds: b.constant.value <= a.constant.value + 3.0 * se,
                });
            }
        }
    }

    Ok(LiShaoReport {
        rungs,
        extrapolated,
        subadditivity,
        grid_m: steps + 1,
        method: sampler.method(),
        warnings: sampler.warnings().to_vec(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn brownian_ladder_matches_arcsine_law() {
        // P{B <= 0 on [1, e^T]} = asin(e^{-T/2}) / pi
        let p = LiShaoParams {
            alpha: 1.0,
            n: 1,
            r: 1,
            c: 0.0,
            horizons: vec![1.0, 2.0, 4.0],
            points_per_unit: 256,
            n_paths: 20_000,
            seed: 3,
        };
        let rep = lishao_constant(&p, Workers::default()).unwrap();
        for rung in &rep.rungs {
            let want = (-rung.horizon / 2.0).exp().asin() / PI;
            let e = rung.probability;
            // the grid can only miss crossings, so allow a small upward bias
            assert!(e.value - want > -3.0 * e.stderr && e.value - want < 3.0 * e.stderr + 0.01, "{rung:?} vs {want}");
            assert!(rung.constant.value >= 0.0);
        }
        assert_eq!(rep.subadditivity.len(), 3);
        assert!(rep.subadditivity.iter().all(|c| c.holds));
        let slope = rep.extrapolated.unwrap();
        assert!((slope.value - 0.5).abs() < 4.0 * slope.stderr + 0.03, "{slope:?}");
    }

    #[test]
    fn rejects_bad_ladders() {
        let mut p = LiShaoParams {
            alpha: 1.0,
            n: 1,
            r: 1,
            c: 0.0,
            horizons: vec![2.0, 1.0],
            points_per_unit: 8,
            n_paths: 10,
            seed: 0,
        };
        assert!(lishao_constant(&p, Workers::SERIAL).is_err());
        p.horizons = vec![200.0];
        p.points_per_unit = 1;
        assert!(matches!(lishao_constant(&p, Workers::SERIAL), Err(Error::ZeroSuccesses { .. })));
    }
}
