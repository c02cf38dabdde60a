use thiserror::Error;

/// Exit status for bad input: flags, config files, parameter ranges.
pub const EXIT_VALIDATION: i32 = 1;
/// Exit status for failures after validation (factorization, starved
/// estimates, output I/O).
pub const EXIT_RUNTIME: i32 = 2;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("config: {0}")]
    Config(String),
    #[error(transparent)]
    Core(#[from] ordcmp_core::Error),
    #[error("cannot write {path}: {source}")]
    Output { path: String, source: std::io::Error },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        use ordcmp_core::Error as E;
        match self {
            CliError::Usage(_) | CliError::Config(_) => EXIT_VALIDATION,
            CliError::Core(
                E::InvalidSpec(_)
                | E::ShapeMismatch { .. }
                | E::InvalidParameter { .. }
                | E::UnsupportedShape { .. }
                | E::Io { .. }
                | E::Parse { .. },
            ) => EXIT_VALIDATION,
            CliError::Core(_) | CliError::Output { .. } => EXIT_RUNTIME,
        }
    }
}

pub type CliResult<T> = Result<T, CliError>;
