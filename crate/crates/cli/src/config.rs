//! Config files, flag overlay and the resolved run configuration.

use std::path::Path;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use crate::args::{
    BoundsArgs, CommandArgs, ConstantsArgs, GumbelArgs, LishaoArgs, LowtailArgs, PursuitArgs, SlepianArgs,
    VerifyArgs,
};
use crate::error::{CliError, CliResult};

/// Contents of a `--config` file. Unknown keys are errors.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    pub seed: Option<u64>,
    pub bounds: Option<Map<String, Value>>,
    pub verify: Option<Map<String, Value>>,
    pub lowtail: Option<Map<String, Value>>,
    pub pursuit: Option<Map<String, Value>>,
    pub lishao: Option<Map<String, Value>>,
    pub slepian: Option<Map<String, Value>>,
    pub gumbel: Option<Map<String, Value>>,
    pub constants: Option<Map<String, Value>>,
}

impl ConfigFile {
    pub fn load(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        if text.trim().is_empty() {
            return Ok(ConfigFile::default());
        }
        serde_json::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
    }
}

/// Fully resolved parameters of one run. Embedded in every report; feeding
/// it back reproduces the report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "subcommand", content = "params", rename_all = "lowercase")]
pub enum Command {
    Bounds(BoundsArgs),
    Verify(VerifyArgs),
    Lowtail(LowtailArgs),
    Pursuit(PursuitArgs),
    Lishao(LishaoArgs),
    Slepian(SlepianArgs),
    Gumbel(GumbelArgs),
    Constants(ConstantsArgs),
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Bounds(_) => "bounds",
            Command::Verify(_) => "verify",
            Command::Lowtail(_) => "lowtail",
            Command::Pursuit(_) => "pursuit",
            Command::Lishao(_) => "lishao",
            Command::Slepian(_) => "slepian",
            Command::Gumbel(_) => "gumbel",
            Command::Constants(_) => "constants",
        }
    }

    /// Fill defaults and check required parameters.
    pub fn resolve(self) -> CliResult<Self> {
        Ok(match self {
            Command::Bounds(a) => Command::Bounds(a.resolve()?),
            Command::Verify(a) => Command::Verify(a.resolve()?),
            Command::Lowtail(a) => Command::Lowtail(a.resolve()?),
            Command::Pursuit(a) => Command::Pursuit(a.resolve()?),
            Command::Lishao(a) => Command::Lishao(a.resolve()?),
            Command::Slepian(a) => Command::Slepian(a.resolve()?),
            Command::Gumbel(a) => Command::Gumbel(a.resolve()?),
            Command::Constants(a) => Command::Constants(a.resolve()?),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub seed: u64,
    #[serde(flatten)]
    pub command: Command,
}

/// Lay the flags that were given over the file section and parse the result.
fn overlay<T: Serialize + DeserializeOwned>(section: Option<&Map<String, Value>>, flags: &T, name: &str) -> CliResult<T> {
    let mut merged = section.cloned().unwrap_or_default();
    let Value::Object(given) = serde_json::to_value(flags).expect("flag structs serialize") else {
        unreachable!("flag structs serialize to objects")
    };
    for (k, v) in given {
        if !v.is_null() {
            merged.insert(k, v);
        }
    }
    serde_json::from_value(Value::Object(merged)).map_err(|e| CliError::Config(format!("[{name}] {e}")))
}

/// Combine a parsed subcommand with an optional config file. Flags win.
/// Returns the resolved command and the seed if one was given anywhere.
pub fn build_command(args: CommandArgs, file: &ConfigFile) -> CliResult<Command> {
    let cmd = match args {
        CommandArgs::Bounds(a) => Command::Bounds(overlay(file.bounds.as_ref(), &a, "bounds")?),
        CommandArgs::Verify(a) => Command::Verify(overlay(file.verify.as_ref(), &a, "verify")?),
        CommandArgs::Lowtail(a) => {
            let dump = a.dump_paths.clone();
            let mut merged: LowtailArgs = overlay(file.lowtail.as_ref(), &a, "lowtail")?;
            merged.dump_paths = dump;
            Command::Lowtail(merged)
        }
        CommandArgs::Pursuit(a) => Command::Pursuit(overlay(file.pursuit.as_ref(), &a, "pursuit")?),
        CommandArgs::Lishao(a) => Command::Lishao(overlay(file.lishao.as_ref(), &a, "lishao")?),
        CommandArgs::Slepian(a) => Command::Slepian(overlay(file.slepian.as_ref(), &a, "slepian")?),
        CommandArgs::Gumbel(a) => Command::Gumbel(overlay(file.gumbel.as_ref(), &a, "gumbel")?),
        CommandArgs::Constants(a) => Command::Constants(overlay(file.constants.as_ref(), &a, "constants")?),
        CommandArgs::Replay(_) => return Err(CliError::Usage("replay takes a report, not parameters".into())),
    };
    cmd.resolve()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn file(json: &str) -> ConfigFile {
        serde_json::from_str(json).unwrap()
    }

    #[test]
    fn unknown_keys_are_named() {
        let err = serde_json::from_str::<ConfigFile>(r#"{"sed": 1}"#).unwrap_err().to_string();
        assert!(err.contains("sed"), "{err}");
        let f = file(r#"{"lowtail": {"alpah": 1.0}}"#);
        let err = build_command(CommandArgs::Lowtail(LowtailArgs::default()), &f).unwrap_err().to_string();
        assert!(err.contains("alpah"), "{err}");
    }

    #[test]
    fn flags_override_file_values() {
        let f = file(r#"{"seed": 7, "lowtail": {"alpha": 0.5, "paths": 10}}"#);
        let flags = LowtailArgs { alpha: Some(1.5), ..Default::default() };
        let Command::Lowtail(a) = build_command(CommandArgs::Lowtail(flags), &f).unwrap() else { panic!() };
        assert_eq!(a.alpha, Some(1.5));
        assert_eq!(a.paths, Some(10));
        assert_eq!(a.grid_m, Some(1025));
    }

    #[test]
    fn type_mismatch_is_an_error() {
        let f = file(r#"{"constants": {"t": "big"}}"#);
        assert!(build_command(CommandArgs::Constants(ConstantsArgs::default()), &f).is_err());
    }

    #[test]
    fn run_config_round_trips() {
        let cmd = build_command(
            CommandArgs::Constants(ConstantsArgs { t: Some(100.0), ..Default::default() }),
            &ConfigFile::default(),
        )
        .unwrap();
        let rc = RunConfig { seed: 3, command: cmd };
        let text = serde_json::to_string(&rc).unwrap();
        assert!(text.contains(r#""subcommand":"constants""#), "{text}");
        let back: RunConfig = serde_json::from_str(&text).unwrap();
        assert_eq!(back, rc);
    }
}
