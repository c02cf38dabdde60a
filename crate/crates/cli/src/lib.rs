//! Command-line front end for `ordcmp-core`: argument and config parsing,
//! dispatch, and JSON / CSV reports that carry their own replay config.

pub mod args;
pub mod commands;
pub mod config;
pub mod error;
pub mod output;
pub mod specs;

use std::ffi::OsString;

use clap::Parser;
use ordcmp_core::rng::Workers;

pub use args::{Cli, CommandArgs, Format};
pub use commands::{execute, Outcome};
pub use config::{Command, ConfigFile, RunConfig};
pub use error::{CliError, CliResult, EXIT_RUNTIME, EXIT_VALIDATION};
pub use output::Report;

/// Everything one invocation produced.
#[derive(Debug, Clone)]
pub struct Invocation {
    pub report: Report,
    pub rendered: String,
}

fn workers(n: Option<usize>) -> CliResult<Workers> {
    match n {
        Some(0) => Err(CliError::Usage("--workers must be at least 1".into())),
        Some(n) => Ok(Workers::new(n)),
        None => Ok(Workers::default()),
    }
}

/// Parse, run and render, without writing the report anywhere.
pub fn invoke(cli: Cli) -> CliResult<Invocation> {
    let common = cli.common;
    let workers = workers(common.workers)?;
    let config = match cli.command {
        CommandArgs::Replay(r) => output::read_config(&r.report)?,
        cmd => {
            let file = match &common.config {
                Some(p) => ConfigFile::load(p)?,
                None => ConfigFile::default(),
            };
            let command = config::build_command(cmd, &file)?;
            let deterministic = matches!(command, Command::Bounds(_) | Command::Constants(_));
            let seed = match common.seed.or(file.seed) {
                Some(s) => s,
                None if deterministic => 0,
                None => {
                    let s = rand::random::<u64>();
                    eprintln!("ordcmp: no seed given, using {s}");
                    s
                }
            };
            RunConfig { seed, command }
        }
    };
    let outcome = execute(&config, workers)?;
    let report = Report::new(config, &outcome, !common.no_timestamp);
    let rendered = output::render(&report, &outcome, common.format);
    Ok(Invocation { report, rendered })
}

/// Entry point of the binary; returns the process exit status.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_VALIDATION } else { 0 };
        }
    };
    let out = cli.common.out.clone();
    match invoke(cli).and_then(|inv| output::write(&inv.rendered, out.as_deref())) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("ordcmp: error: {e}");
            e.exit_code()
        }
    }
}
