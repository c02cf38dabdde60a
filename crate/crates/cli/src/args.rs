//! Command-line and config-file parameters.
//!
//! Every per-subcommand struct doubles as the config-file section: fields are
//! optional so a flag can override a file value, and `resolve` fills the
//! defaults before anything runs. Resolved structs are what reports embed.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};

#[derive(Debug, Parser)]
#[command(name = "ordcmp", version, about = "Comparison bounds and experiments for order statistics of Gaussian arrays")]
pub struct Cli {
    #[command(subcommand)]
    pub command: CommandArgs,
    #[command(flatten)]
    pub common: CommonArgs,
}

#[derive(Debug, Clone, Args)]
pub struct CommonArgs {
    /// JSON config file with a top-level `seed` and one section per subcommand.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Random seed; a random one is chosen and logged when absent.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Worker threads (default: all cores).
    #[arg(long, global = true, env = "ORDCMP_WORKERS")]
    pub workers: Option<usize>,
    /// Report destination (default: stdout).
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    /// Leave the timestamp out of the report.
    #[arg(long, global = true)]
    pub no_timestamp: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Subcommand)]
pub enum CommandArgs {
    /// Evaluate every closed-form bound for a pair of covariance files.
    Bounds(BoundsArgs),
    /// Monte Carlo estimate of the difference, checked against the bounds.
    Verify(VerifyArgs),
    /// Lower-tail curve of fBm order statistics and its power-law exponent.
    Lowtail(LowtailArgs),
    /// Tail of the fractional Brownian pursuit capture time.
    Pursuit(PursuitArgs),
    /// Li-Shao type constants from the stationary Lamperti duals.
    Lishao(LishaoArgs),
    /// Process-level Slepian ordering check.
    Slepian(SlepianArgs),
    /// Limit theorems for suprema: (a) Gumbel, (b) normal, (c) mixed Gumbel.
    Gumbel(GumbelArgs),
    /// Norming constants a and b.
    Constants(ConstantsArgs),
    /// Rerun the config embedded in an earlier report.
    Replay(ReplayArgs),
}

/// Set `slot` to `default` when empty.
fn fill<T>(slot: &mut Option<T>, default: T) {
    if slot.is_none() {
        *slot = Some(default);
    }
}

fn require<T>(slot: &Option<T>, flag: &str) -> CliResult<()> {
    match slot {
        Some(_) => Ok(()),
        None => Err(CliError::Usage(format!("missing required parameter --{flag}"))),
    }
}

/// Value of a resolved field.
pub(crate) fn get<T: Clone>(slot: &Option<T>) -> T {
    slot.clone().expect("filled by resolve")
}

#[derive(Debug, Clone, Default, PartialEq, Args, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct BoundsArgs {
    /// Covariance of X (sigma^(1)), JSON or CSV.
    #[arg(long)]
    pub cov_x: Option<PathBuf>,
    /// Covariance of Y (sigma^(0)).
    #[arg(long)]
    pub cov_y: Option<PathBuf>,
    #[arg(long)]
    pub r: Option<usize>,
    /// Thresholds, one per row, comma separated.
    #[arg(long, allow_hyphen_values = true)]
    pub u: Option<String>,
    /// asc (rank 1 = row minimum) or desc.
    #[arg(long)]
    pub convention: Option<String>,
    /// Tolerance for the applicability checks.
    #[arg(long)]
    pub tolerance: Option<f64>,
}

impl BoundsArgs {
    pub fn resolve(mut self) -> CliResult<Self> {
        require(&self.cov_x, "cov-x")?;
        require(&self.cov_y, "cov-y")?;
        require(&self.r, "r")?;
        require(&self.u, "u")?;
        fill(&mut self.convention, "asc".into());
        fill(&mut self.tolerance, ordcmp_core::bounds::CONDITION_TOL);
        Ok(self)
    }
}

#[derive(Debug, Clone, Default, PartialEq, Args, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct VerifyArgs {
    #[arg(long)]
    pub cov_x: Option<PathBuf>,
    #[arg(long)]
    pub cov_y: Option<PathBuf>,
    #[arg(long)]
    pub r: Option<usize>,
    #[arg(long, allow_hyphen_values = true)]
    pub u: Option<String>,
    #[arg(long)]
    pub convention: Option<String>,
    #[arg(long)]
    pub tolerance: Option<f64>,
    #[arg(long)]
    pub samples: Option<u64>,
    /// Use common random numbers for the difference (exploratory only).
    #[arg(long, num_args = 0..=1, default_missing_value = "true")]
    pub crn: Option<bool>,
}

impl VerifyArgs {
    /// The bound-evaluation part of the parameters.
    pub fn pair(&self) -> BoundsArgs {
        BoundsArgs {
            cov_x: self.cov_x.clone(),
            cov_y: self.cov_y.clone(),
            r: self.r,
            u: self.u.clone(),
            convention: self.convention.clone(),
            tolerance: self.tolerance,
        }
    }

    pub fn resolve(mut self) -> CliResult<Self> {
        let pair = self.pair().resolve()?;
        self.convention = pair.convention;
        self.tolerance = pair.tolerance;
        fill(&mut self.samples, 1_000_000);
        fill(&mut self.crn, false);
        Ok(self)
    }
}

#[derive(Debug, Clone, Default, PartialEq, Args, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct LowtailArgs {
    #[arg(long)]
    pub alpha: Option<f64>,
    #[arg(long)]
    pub n: Option<usize>,
    /// Rank, 1 = pointwise maximum.
    #[arg(long)]
    pub r: Option<usize>,
    #[arg(long)]
    pub c: Option<f64>,
    /// Levels x (geom:, lin: or a list).
    #[arg(long)]
    pub x_grid: Option<String>,
    #[arg(long)]
    pub paths: Option<usize>,
    /// Grid points on [0, 1].
    #[arg(long)]
    pub grid_m: Option<usize>,
    /// Fit window LO:HI (default: all but the largest 20% of levels).
    #[arg(long)]
    pub window: Option<String>,
    /// Also write a few sample fBm paths as CSV (t, value, path_id).
    #[arg(long)]
    #[serde(skip)]
    pub dump_paths: Option<PathBuf>,
}

impl LowtailArgs {
    pub fn resolve(mut self) -> CliResult<Self> {
        fill(&mut self.alpha, 1.0);
        fill(&mut self.n, 1);
        fill(&mut self.r, 1);
        fill(&mut self.c, 0.0);
        fill(&mut self.x_grid, "geom:1:0.05:0.8".into());
        fill(&mut self.paths, 20_000);
        fill(&mut self.grid_m, 1025);
        Ok(self)
    }
}

#[derive(Debug, Clone, Default, PartialEq, Args, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PursuitArgs {
    #[arg(long)]
    pub alpha: Option<f64>,
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub r: Option<usize>,
    /// Times s (geom:, lin: or a list).
    #[arg(long)]
    pub s_grid: Option<String>,
    #[arg(long)]
    pub paths: Option<usize>,
    #[arg(long)]
    pub grid_m: Option<usize>,
    /// Fit window LO:HI in s (default: all but the smallest 20% of times).
    #[arg(long)]
    pub window: Option<String>,
}

impl PursuitArgs {
    pub fn resolve(mut self) -> CliResult<Self> {
        fill(&mut self.alpha, 1.0);
        fill(&mut self.n, 1);
        fill(&mut self.r, 1);
        fill(&mut self.s_grid, "geom:2:100:1.25".into());
        fill(&mut self.paths, 20_000);
        fill(&mut self.grid_m, 1025);
        Ok(self)
    }
}

#[derive(Debug, Clone, Default, PartialEq, Args, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct LishaoArgs {
    #[arg(long)]
    pub alpha: Option<f64>,
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub r: Option<usize>,
    #[arg(long)]
    pub c: Option<f64>,
    /// Horizons T (geom:, lin: or a list), increasing.
    #[arg(long)]
    pub t_ladder: Option<String>,
    #[arg(long)]
    pub points_per_unit: Option<usize>,
    #[arg(long)]
    pub paths: Option<usize>,
}

impl LishaoArgs {
    pub fn resolve(mut self) -> CliResult<Self> {
        fill(&mut self.alpha, 1.0);
        fill(&mut self.n, 1);
        fill(&mut self.r, 1);
        fill(&mut self.c, 0.0);
        fill(&mut self.t_ladder, "1,2,4".into());
        fill(&mut self.points_per_unit, 64);
        fill(&mut self.paths, 20_000);
        Ok(self)
    }
}

#[derive(Debug, Clone, Default, PartialEq, Args, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SlepianArgs {
    /// Model spec: fbm:ALPHA, powexp:ALPHA[:SCALE] or beta:BETA.
    #[arg(long)]
    pub model_x: Option<String>,
    #[arg(long)]
    pub model_y: Option<String>,
    #[arg(long)]
    pub model_z: Option<String>,
    #[arg(long)]
    pub c: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub level: Option<f64>,
    /// Uniform grid lin:START:STOP:COUNT.
    #[arg(long)]
    pub grid: Option<String>,
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub r: Option<usize>,
    #[arg(long)]
    pub paths: Option<usize>,
    /// Also compare Z_{r:n} + cX with Z_{r:n} + cY.
    #[arg(long, num_args = 0..=1, default_missing_value = "true")]
    pub swapped: Option<bool>,
}

impl SlepianArgs {
    pub fn resolve(mut self) -> CliResult<Self> {
        fill(&mut self.model_x, "powexp:1:0.5".into());
        fill(&mut self.model_y, "powexp:1:2".into());
        fill(&mut self.model_z, "powexp:2:1".into());
        fill(&mut self.c, 0.5);
        fill(&mut self.level, 1.5);
        fill(&mut self.grid, "lin:0:4:65".into());
        fill(&mut self.n, 2);
        fill(&mut self.r, 1);
        fill(&mut self.paths, 4000);
        fill(&mut self.swapped, false);
        Ok(self)
    }
}

#[derive(Debug, Clone, Default, PartialEq, Args, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GumbelArgs {
    /// a: Gumbel, b: normal, c: mixed Gumbel.
    #[arg(long)]
    pub variant: Option<String>,
    /// Limit of rho(t) ln t for variant c.
    #[arg(long)]
    pub gamma: Option<f64>,
    /// Correlation level for variant b.
    #[arg(long)]
    pub rho_t: Option<f64>,
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub r: Option<usize>,
    /// Horizon T.
    #[arg(long)]
    pub t: Option<f64>,
    /// Replications.
    #[arg(long)]
    pub reps: Option<usize>,
    /// Constant A in the norming.
    #[arg(long)]
    pub a_const: Option<f64>,
    /// Stationary base model (powexp).
    #[arg(long)]
    pub model: Option<String>,
    /// Grid points on [0, T] for variant a.
    #[arg(long)]
    pub grid_m: Option<usize>,
    /// Grid points per unit segment for variants b and c.
    #[arg(long)]
    pub points_per_unit: Option<usize>,
    /// Replace --a-const by a coarse Monte Carlo calibration.
    #[arg(long, num_args = 0..=1, default_missing_value = "true")]
    pub calibrate: Option<bool>,
    /// Level u used by the calibration.
    #[arg(long)]
    pub cal_level: Option<f64>,
    /// Horizon of the calibration runs.
    #[arg(long)]
    pub cal_t: Option<f64>,
    /// Replications for the calibration.
    #[arg(long)]
    pub cal_reps: Option<usize>,
}

impl GumbelArgs {
    pub fn resolve(mut self) -> CliResult<Self> {
        fill(&mut self.variant, "a".into());
        if !matches!(self.variant.as_deref(), Some("a" | "b" | "c")) {
            return Err(CliError::Usage(format!("--variant must be a, b or c, got {:?}", get(&self.variant))));
        }
        fill(&mut self.gamma, 1.0);
        fill(&mut self.rho_t, 0.5);
        fill(&mut self.n, 1);
        fill(&mut self.r, 1);
        fill(&mut self.t, 100.0);
        fill(&mut self.reps, 2000);
        fill(&mut self.a_const, 1.0);
        fill(&mut self.model, "powexp:1:1".into());
        fill(&mut self.grid_m, (1 << 14) + 1);
        fill(&mut self.points_per_unit, 164);
        fill(&mut self.calibrate, false);
        fill(&mut self.cal_level, 3.0);
        fill(&mut self.cal_t, 10.0);
        fill(&mut self.cal_reps, 20_000);
        Ok(self)
    }
}

#[derive(Debug, Clone, Default, PartialEq, Args, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ConstantsArgs {
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub r: Option<usize>,
    #[arg(long)]
    pub alpha: Option<f64>,
    #[arg(long)]
    pub t: Option<f64>,
    #[arg(long)]
    pub a_const: Option<f64>,
}

impl ConstantsArgs {
    pub fn resolve(mut self) -> CliResult<Self> {
        fill(&mut self.n, 1);
        fill(&mut self.r, 1);
        fill(&mut self.alpha, 1.0);
        require(&self.t, "t")?;
        fill(&mut self.a_const, 1.0);
        Ok(self)
    }
}

#[derive(Debug, Clone, Args)]
pub struct ReplayArgs {
    /// A JSON or CSV report written by an earlier run.
    pub report: PathBuf,
}
