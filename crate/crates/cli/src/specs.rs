//! Compact text specs for level lists and grids.
//!
//! * `geom:START:STOP:RATIO` geometric sequence from START towards STOP
//! * `lin:START:STOP:COUNT` COUNT evenly spaced points, both ends included
//! * `a,b,c` explicit list

use ordcmp_core::experiments::lowtail::geometric_levels;
use ordcmp_core::paths::GridSpec;

use crate::error::{CliError, CliResult};

fn number(field: &str, s: &str) -> CliResult<f64> {
    s.trim().parse::<f64>().map_err(|e| CliError::Usage(format!("{field}: `{s}` is not a number ({e})")))
}

/// Comma-separated numbers. `inf` and `-inf` are accepted.
pub fn parse_list(field: &str, s: &str) -> CliResult<Vec<f64>> {
    if s.trim().is_empty() {
        return Err(CliError::Usage(format!("{field}: empty list")));
    }
    s.split(',').map(|t| number(field, t)).collect()
}

pub fn parse_levels(field: &str, s: &str) -> CliResult<Vec<f64>> {
    let parts: Vec<&str> = s.split(':').collect();
    match parts[0].trim() {
        "geom" | "lin" if parts.len() != 4 => {
            Err(CliError::Usage(format!("{field}: `{s}` needs the form {}:START:STOP:X", parts[0])))
        }
        "geom" => {
            let (a, b, q) = (number(field, parts[1])?, number(field, parts[2])?, number(field, parts[3])?);
            Ok(geometric_levels(a, b, q)?)
        }
        "lin" => Ok(parse_uniform_grid(field, s)?.points()),
        _ => parse_list(field, s),
    }
}

/// A `lin:START:STOP:COUNT` spec as a grid.
pub fn parse_uniform_grid(field: &str, s: &str) -> CliResult<GridSpec> {
    let parts: Vec<&str> = s.split(':').collect();
    if parts.len() != 4 || parts[0].trim() != "lin" {
        return Err(CliError::Usage(format!("{field}: expected lin:START:STOP:COUNT, got `{s}`")));
    }
    let count = parts[3]
        .trim()
        .parse::<usize>()
        .map_err(|e| CliError::Usage(format!("{field}: bad point count `{}` ({e})", parts[3])))?;
    Ok(GridSpec::new(number(field, parts[1])?, number(field, parts[2])?, count)?)
}

/// `LO:HI` fit window.
pub fn parse_window(s: &str) -> CliResult<(f64, f64)> {
    match s.split_once(':') {
        Some((lo, hi)) => Ok((number("window", lo)?, number("window", hi)?)),
        None => Err(CliError::Usage(format!("window: expected LO:HI, got `{s}`"))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn level_specs() {
        let g = parse_levels("x", "geom:1:0.05:0.8").unwrap();
        assert_eq!(g.len(), 14);
        assert_eq!(g[0], 1.0);
        assert_eq!(parse_levels("x", "lin:0:1:5").unwrap(), vec![0.0, 0.25, 0.5, 0.75, 1.0]);
        assert_eq!(parse_levels("x", "1, 2,4").unwrap(), vec![1.0, 2.0, 4.0]);
        assert!(parse_list("u", "0,inf").unwrap()[1].is_infinite());
        assert!(parse_levels("x", "geom:1:2").is_err());
        assert!(parse_levels("x", "1,,2").is_err());
        assert!(parse_uniform_grid("g", "lin:0:1:1").is_err());
        assert_eq!(parse_window("0.1:0.5").unwrap(), (0.1, 0.5));
        assert!(parse_window("0.1").is_err());
    }
}
