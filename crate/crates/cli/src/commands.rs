//! Dispatch of a resolved configuration to the library operations.

use serde::Serialize;
use serde_json::{json, Value};

use ordcmp_core::bounds::{BoundKind, BoundReport, ComparisonPair};
use ordcmp_core::experiments::limits::{
    calibrate_a_const, gumbel_experiment, mixed_gumbel_experiment, norming_constants, normal_limit_experiment,
    CalibrationParams, GumbelParams, LimitCheckReport, MixtureParams,
};
use ordcmp_core::experiments::lishao::{lishao_constant, LiShaoParams};
use ordcmp_core::experiments::lowtail::{
    default_window, fit_exponent, lowtail_curve, pursuit_default_window, pursuit_exponent, pursuit_tail,
    ExponentFit, LowTailCurve, LowTailParams, PursuitParams,
};
use ordcmp_core::experiments::slepian::{slepian_process_check, OrderingCheck, SlepianParams};
use ordcmp_core::mc::{estimate_delta, estimate_delta_crn, estimate_theta_log, McEstimate, McOptions};
use ordcmp_core::paths::{write_paths_csv, CorrelationModel, GridSpec, PathSampler, TimeGrid};
use ordcmp_core::rng::Workers;
use ordcmp_core::{Convention, GaussianArraySpec, OrderStatSelector, ThresholdVector};

use crate::args::{
    get, BoundsArgs, ConstantsArgs, GumbelArgs, LishaoArgs, LowtailArgs, PursuitArgs, SlepianArgs, VerifyArgs,
};
use crate::config::{Command, RunConfig};
use crate::error::{CliError, CliResult};
use crate::specs::{parse_levels, parse_list, parse_uniform_grid, parse_window};

/// Estimates count as dominated by a bound within this many standard errors.
pub const DOMINATION_SIGMAS: f64 = 3.5;

/// Plain table for CSV output.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    fn new(header: &[&str]) -> Self {
        Table { header: header.iter().map(|s| s.to_string()).collect(), rows: vec![] }
    }

    fn push(&mut self, row: Vec<String>) {
        self.rows.push(row);
    }
}

/// Result of one run before it is wrapped into a report.
#[derive(Debug, Clone)]
pub struct Outcome {
    pub result: Value,
    /// Scalars shown as comment lines above the CSV table.
    pub summary: Value,
    pub table: Table,
    pub warnings: Vec<String>,
}

fn to_value<T: Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("report types serialize")
}

fn f(v: f64) -> String {
    format!("{v}")
}

pub fn execute(config: &RunConfig, workers: Workers) -> CliResult<Outcome> {
    let seed = config.seed;
    match &config.command {
        Command::Bounds(a) => bounds(a),
        Command::Verify(a) => verify(a, seed, workers),
        Command::Lowtail(a) => lowtail(a, seed, workers),
        Command::Pursuit(a) => pursuit(a, seed, workers),
        Command::Lishao(a) => lishao(a, seed, workers),
        Command::Slepian(a) => slepian(a, seed, workers),
        Command::Gumbel(a) => gumbel(a, seed, workers),
        Command::Constants(a) => constants(a),
    }
}

struct Pair {
    x: GaussianArraySpec,
    y: GaussianArraySpec,
    sel: OrderStatSelector,
    u: ThresholdVector,
    tol: f64,
}

fn load_pair(a: &BoundsArgs) -> CliResult<Pair> {
    let u = parse_list("u", &get(&a.u))?;
    let x = GaussianArraySpec::from_file(get(&a.cov_x), u.len())?;
    let y = GaussianArraySpec::from_file(get(&a.cov_y), u.len())?;
    let convention: Convention = get(&a.convention).parse()?;
    let sel = OrderStatSelector::new(x.n(), get(&a.r), convention)?;
    let u = ThresholdVector::for_spec(u, &x)?;
    let tol = get(&a.tolerance);
    if !(tol >= 0.0 && tol.is_finite()) {
        return Err(CliError::Usage(format!("--tolerance must be finite and >= 0, got {tol}")));
    }
    Ok(Pair { x, y, sel, u, tol })
}

fn bound_rows(bounds: &[BoundReport]) -> Table {
    let mut t = Table::new(&["kind", "value", "applicable", "violated_conditions", "u_min"]);
    for b in bounds {
        t.push(vec![b.kind.name().into(), f(b.value), b.applicable.to_string(), b.violated_conditions.join(";"), f(b.u_min)]);
    }
    t
}

fn bounds(a: &BoundsArgs) -> CliResult<Outcome> {
    let p = load_pair(a)?;
    let pair = ComparisonPair::new(&p.x, &p.y)?.with_tolerance(p.tol);
    let reports = pair.all(&p.sel, &p.u)?;
    let (holds, violated) = pair.slepian_conditions();
    let (d, n) = p.x.shape();
    let summary = json!({ "d": d, "n": n, "r": p.sel.rank(), "convention": p.sel.convention() });
    Ok(Outcome {
        result: json!({
            "d": d,
            "n": n,
            "selector": p.sel,
            "bounds": reports,
            "slepian_conditions": { "hold": holds, "violated": violated },
        }),
        summary,
        table: bound_rows(&reports),
        warnings: vec![],
    })
}

#[derive(Debug, Serialize)]
struct CheckedBound {
    #[serde(flatten)]
    bound: BoundReport,
    /// Estimate within `DOMINATION_SIGMAS` standard errors of the bound;
    /// `None` when the estimate it bounds is unavailable.
    dominated: Option<bool>,
}

fn verify(a: &VerifyArgs, seed: u64, workers: Workers) -> CliResult<Outcome> {
    let p = load_pair(&a.pair())?;
    let samples = get(&a.samples);
    let pair = ComparisonPair::new(&p.x, &p.y)?.with_tolerance(p.tol);
    let reports = pair.all(&p.sel, &p.u)?;
    let opts = McOptions::default().with_workers(workers);
    let delta = if get(&a.crn) {
        estimate_delta_crn(&p.x, &p.y, &p.sel, &p.u, samples, seed, &opts)?
    } else {
        estimate_delta(&p.x, &p.y, &p.sel, &p.u, samples, seed, &opts)?
    };
    let mut warnings = vec![];
    let log_ratio = match estimate_theta_log(&p.x, &p.y, &p.sel, &p.u, samples, seed, &opts) {
        Ok(e) => Some(e),
        Err(e @ ordcmp_core::Error::StarvedEstimate { .. }) => {
            warnings.push(format!("log ratio not estimated: {e}"));
            None
        }
        Err(e) => return Err(e.into()),
    };
    if delta.jitter > 0.0 {
        warnings.push(format!("Cholesky needed jitter {:e}", delta.jitter));
    }
    let checked: Vec<CheckedBound> = reports
        .into_iter()
        .map(|b| {
            let dominated = match b.kind {
                BoundKind::LogRatio => log_ratio.map(|e| e.value <= b.value + DOMINATION_SIGMAS * e.stderr),
                k if k.is_two_sided() => Some(delta.value.abs() <= b.value + DOMINATION_SIGMAS * delta.stderr),
                _ => Some(delta.value <= b.value + DOMINATION_SIGMAS * delta.stderr),
            };
            CheckedBound { bound: b, dominated }
        })
        .collect();
    let mut table = Table::new(&["kind", "bound", "applicable", "dominated", "estimate", "stderr"]);
    for c in &checked {
        let est = if c.bound.kind == BoundKind::LogRatio { log_ratio } else { Some(delta) };
        table.push(vec![
            c.bound.kind.name().into(),
            f(c.bound.value),
            c.bound.applicable.to_string(),
            c.dominated.map_or("".into(), |d| d.to_string()),
            est.map_or("".into(), |e| f(e.value)),
            est.map_or("".into(), |e| f(e.stderr)),
        ]);
    }
    Ok(Outcome {
        result: json!({
            "delta": delta,
            "log_ratio": log_ratio,
            "sigmas": DOMINATION_SIGMAS,
            "bounds": checked,
        }),
        summary: json!({ "delta": delta.value, "stderr": delta.stderr, "samples": delta.n_samples }),
        table,
        warnings,
    })
}

fn curve_table(first: &str, xs: &[f64], curve: &LowTailCurve) -> Table {
    let mut header = vec![first, "estimate", "stderr", "successes", "censored", "grid_delta", "delta_shrinks"];
    let names: Vec<String> = curve.grid_sizes.iter().map(|m| format!("p_m{m}")).collect();
    header.extend(names.iter().map(String::as_str));
    let mut t = Table::new(&header);
    for (x, p) in xs.iter().zip(&curve.points) {
        let mut row = vec![
            f(*x),
            f(p.estimate.value),
            f(p.estimate.stderr),
            p.successes.to_string(),
            p.censored.to_string(),
            f(p.grid_delta),
            p.delta_shrinks.map_or("".into(), |b| b.to_string()),
        ];
        row.extend(p.refinement.iter().map(|v| f(*v)));
        t.push(row);
    }
    t
}

/// Fit result or the reason it could not be made.
fn fit_or_warn(fit: ordcmp_core::Result<ExponentFit>, warnings: &mut Vec<String>) -> CliResult<Option<ExponentFit>> {
    match fit {
        Ok(f) => Ok(Some(f)),
        Err(e @ ordcmp_core::Error::InsufficientPoints { .. }) => {
            warnings.push(format!("exponent not fitted: {e}"));
            Ok(None)
        }
        Err(e) => Err(e.into()),
    }
}

fn lowtail(a: &LowtailArgs, seed: u64, workers: Workers) -> CliResult<Outcome> {
    let levels = parse_levels("x_grid", &get(&a.x_grid))?;
    let window = a.window.as_deref().map(parse_window).transpose()?;
    let params = LowTailParams {
        alpha: get(&a.alpha),
        n: get(&a.n),
        r: get(&a.r),
        c: get(&a.c),
        negate_z: false,
        levels: levels.clone(),
        n_paths: get(&a.paths),
        grid_m: get(&a.grid_m),
        seed,
    };
    let curve = lowtail_curve(&params, workers)?;
    let mut warnings = curve.warnings.clone();
    let window = match window {
        Some(w) => Ok(w),
        None => default_window(&levels),
    };
    let fit = fit_or_warn(window.and_then(|w| fit_exponent(&curve.pairs(), w)), &mut warnings)?;
    // slope estimates 2 p / alpha
    let exponent = fit.as_ref().map(|f| {
        let k = params.alpha / 2.0;
        json!({ "value": k * f.slope, "stderr": k * f.slope_stderr })
    });
    if let Some(path) = &a.dump_paths {
        let grid = TimeGrid::Uniform(GridSpec::new(0.0, 1.0, params.grid_m)?);
        let sampler = PathSampler::auto(&CorrelationModel::Fbm { alpha: params.alpha }, grid)?;
        let file = std::fs::File::create(path)
            .map_err(|source| CliError::Output { path: path.display().to_string(), source })?;
        write_paths_csv(&sampler.sample(seed, 8, workers), std::io::BufWriter::new(file))?;
    }
    Ok(Outcome {
        summary: json!({ "fit": fit, "exponent": exponent }),
        table: curve_table("x", &levels, &curve),
        result: json!({ "curve": curve, "fit": fit, "exponent": exponent }),
        warnings,
    })
}

fn pursuit(a: &PursuitArgs, seed: u64, workers: Workers) -> CliResult<Outcome> {
    let times = parse_levels("s_grid", &get(&a.s_grid))?;
    let window = a.window.as_deref().map(parse_window).transpose()?;
    let params = PursuitParams {
        alpha: get(&a.alpha),
        n: get(&a.n),
        r: get(&a.r),
        times: times.clone(),
        n_paths: get(&a.paths),
        grid_m: get(&a.grid_m),
        seed,
    };
    let curve = pursuit_tail(&params, workers)?;
    let mut warnings = curve.curve.warnings.clone();
    let window = match window {
        Some(w) => Ok(w),
        None => pursuit_default_window(&times),
    };
    let fit = fit_or_warn(window.and_then(|w| pursuit_exponent(&curve, w)), &mut warnings)?;
    Ok(Outcome {
        summary: json!({ "q": fit }),
        table: curve_table("s", &times, &curve.curve),
        result: json!({ "curve": curve, "q": fit }),
        warnings,
    })
}

fn lishao(a: &LishaoArgs, seed: u64, workers: Workers) -> CliResult<Outcome> {
    let params = LiShaoParams {
        alpha: get(&a.alpha),
        n: get(&a.n),
        r: get(&a.r),
        c: get(&a.c),
        horizons: parse_levels("t_ladder", &get(&a.t_ladder))?,
        points_per_unit: get(&a.points_per_unit),
        n_paths: get(&a.paths),
        seed,
    };
    let rep = lishao_constant(&params, workers)?;
    let mut t = Table::new(&["horizon", "probability", "probability_stderr", "constant", "constant_stderr"]);
    for r in &rep.rungs {
        t.push(vec![
            f(r.horizon),
            f(r.probability.value),
            f(r.probability.stderr),
            f(r.constant.value),
            f(r.constant.stderr),
        ]);
    }
    Ok(Outcome {
        summary: json!({ "extrapolated": rep.extrapolated, "subadditivity": rep.subadditivity }),
        table: t,
        warnings: rep.warnings.clone(),
        result: to_value(&rep),
    })
}

fn model(field: &str, s: &str) -> CliResult<CorrelationModel> {
    s.parse().map_err(|e: ordcmp_core::Error| CliError::Usage(format!("{field}: {e}")))
}

fn slepian(a: &SlepianArgs, seed: u64, workers: Workers) -> CliResult<Outcome> {
    let params = SlepianParams {
        model_x: model("model_x", &get(&a.model_x))?,
        model_y: model("model_y", &get(&a.model_y))?,
        model_z: model("model_z", &get(&a.model_z))?,
        c: get(&a.c),
        level: get(&a.level),
        grid: parse_uniform_grid("grid", &get(&a.grid))?,
        n: get(&a.n),
        r: get(&a.r),
        n_paths: get(&a.paths),
        seed,
        swapped_variant: get(&a.swapped),
    };
    let rep = slepian_process_check(&params, workers)?;
    let mut t = Table::new(&["variant", "p_x", "stderr_x", "p_y", "stderr_y", "ordered"]);
    let mut row = |name: &str, c: &OrderingCheck| {
        t.push(vec![
            name.into(),
            f(c.p_x.value),
            f(c.p_x.stderr),
            f(c.p_y.value),
            f(c.p_y.stderr),
            c.ordered.to_string(),
        ])
    };
    row("direct", &rep.direct);
    if let Some(s) = &rep.swapped {
        row("swapped", s);
    }
    Ok(Outcome {
        summary: json!({ "ordered": rep.direct.ordered, "swapped_ordered": rep.swapped.map(|s| s.ordered) }),
        table: t,
        warnings: rep.warnings.clone(),
        result: to_value(&rep),
    })
}

fn limit_table(rep: &LimitCheckReport) -> Table {
    let mut t = Table::new(&["level", "sample_quantile", "target_cdf"]);
    for q in &rep.quantiles {
        t.push(vec![f(q.level), f(q.sample), f(q.target_cdf)]);
    }
    t
}

fn gumbel(a: &GumbelArgs, seed: u64, workers: Workers) -> CliResult<Outcome> {
    let variant = get(&a.variant);
    let base = model("model", &get(&a.model))?;
    let (n, r, horizon, reps) = (get(&a.n), get(&a.r), get(&a.t), get(&a.reps));
    let (alpha, scale) = match base {
        CorrelationModel::PowerExp { alpha, scale } => (alpha, scale),
        _ => return Err(CliError::Usage("--model must be a powexp model".into())),
    };
    // every later step rejects these too; checking first keeps sampling from
    // starting on a config that cannot finish
    norming_constants(n, r, alpha, horizon / scale, get(&a.a_const))?;
    let ppu = get(&a.points_per_unit);
    let grid_m = get(&a.grid_m);
    let calibration = if get(&a.calibrate) {
        let cal_t = get(&a.cal_t);
        // same grid step as the experiment
        let step = if variant == "a" { horizon / (grid_m.max(2) - 1) as f64 } else { 1.0 / ppu.max(1) as f64 };
        let cal = CalibrationParams {
            model: base.clone(),
            n,
            r,
            level: get(&a.cal_level),
            horizon: cal_t,
            grid_m: (cal_t / step).round() as usize + 1,
            n_reps: get(&a.cal_reps),
            seed: ordcmp_core::rng::derive_seed(seed, 9),
        };
        Some(calibrate_a_const(&cal, workers)?)
    } else {
        None
    };
    let a_const = calibration.map_or(get(&a.a_const), |c: McEstimate| c.value);
    let mixture = MixtureParams { base: base.clone(), n, r, horizon, n_reps: reps, points_per_unit: ppu, a_const, seed };
    let rep = match variant.as_str() {
        "a" => gumbel_experiment(
            &GumbelParams { model: base, n, r, horizon, n_reps: reps, grid_m, a_const, seed },
            workers,
        )?,
        "b" => normal_limit_experiment(get(&a.rho_t), &mixture, workers)?,
        _ => mixed_gumbel_experiment(get(&a.gamma), &mixture, workers)?,
    };
    Ok(Outcome {
        summary: json!({ "ks_distance": rep.ks_distance, "n_replications": rep.n_replications, "a_const": a_const }),
        table: limit_table(&rep),
        warnings: rep.advisories.clone(),
        result: json!({ "variant": variant, "report": rep, "calibration": calibration, "a_const_used": a_const }),
    })
}

fn constants(a: &ConstantsArgs) -> CliResult<Outcome> {
    let c = norming_constants(get(&a.n), get(&a.r), get(&a.alpha), get(&a.t), get(&a.a_const))?;
    let mut t = Table::new(&["a", "b", "T", "n", "r", "alpha", "A_const"]);
    t.push(vec![f(c.a), f(c.b), f(c.horizon), c.n.to_string(), c.r.to_string(), f(c.alpha), f(c.a_const)]);
    Ok(Outcome { summary: json!({}), table: t, warnings: vec![], result: to_value(&c) })
}
