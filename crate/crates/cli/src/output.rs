//! Reports and their JSON / CSV renderings.

use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::args::Format;
use crate::commands::Outcome;
use crate::config::RunConfig;
use crate::error::{CliError, CliResult};

pub const TOOL: &str = "ordcmp";
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

const CONFIG_PREFIX: &str = "# config: ";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub tool: String,
    pub version: String,
    /// Seconds since the Unix epoch; absent with `--no-timestamp`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub timestamp: Option<u64>,
    pub config: RunConfig,
    pub warnings: Vec<String>,
    pub result: Value,
}

impl Report {
    pub fn new(config: RunConfig, outcome: &Outcome, timestamp: bool) -> Self {
        let timestamp = timestamp.then(|| {
            std::time::SystemTime::now()
                .duration_since(std::time::UNIX_EPOCH)
                .map(|d| d.as_secs())
                .unwrap_or(0)
        });
        Report {
            tool: TOOL.into(),
            version: VERSION.into(),
            timestamp,
            config,
            warnings: outcome.warnings.clone(),
            result: outcome.result.clone(),
        }
    }
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

pub fn render(report: &Report, outcome: &Outcome, format: Format) -> String {
    match format {
        Format::Json => {
            let mut s = serde_json::to_string_pretty(report).expect("reports serialize");
            s.push('\n');
            s
        }
        Format::Csv => {
            let mut s = format!("# {} {}\n", report.tool, report.version);
            if let Some(t) = report.timestamp {
                s += &format!("# timestamp: {t}\n");
            }
            s += CONFIG_PREFIX;
            s += &serde_json::to_string(&report.config).expect("configs serialize");
            s.push('\n');
            if outcome.summary.as_object().is_some_and(|m| !m.is_empty()) {
                s += &format!("# summary: {}\n", outcome.summary);
            }
            for w in &report.warnings {
                s += &format!("# warning: {w}\n");
            }
            let line = |cells: &[String]| cells.iter().map(|c| csv_field(c)).collect::<Vec<_>>().join(",") + "\n";
            s += &line(&outcome.table.header);
            for row in &outcome.table.rows {
                s += &line(row);
            }
            s
        }
    }
}

pub fn write(text: &str, out: Option<&Path>) -> CliResult<()> {
    use std::io::Write;
    match out {
        Some(p) => std::fs::write(p, text).map_err(|source| CliError::Output { path: p.display().to_string(), source }),
        None => std::io::stdout()
            .write_all(text.as_bytes())
            .map_err(|source| CliError::Output { path: "<stdout>".into(), source }),
    }
}

/// The run configuration stored in a JSON report or in the header of a CSV
/// report.
pub fn read_config(path: &Path) -> CliResult<RunConfig> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
    let bad = |e: serde_json::Error| CliError::Config(format!("{}: {e}", path.display()));
    if text.trim_start().starts_with('#') {
        let line = text
            .lines()
            .find_map(|l| l.strip_prefix(CONFIG_PREFIX))
            .ok_or_else(|| CliError::Config(format!("{}: no config line in CSV header", path.display())))?;
        serde_json::from_str(line).map_err(bad)
    } else {
        let report: Report = serde_json::from_str(&text).map_err(bad)?;
        Ok(report.config)
    }
}
