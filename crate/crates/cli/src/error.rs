use std::path::PathBuf;

use caps_core::Error as CoreError;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Clap(#[from] clap::Error),
    #[error("{0}")]
    Usage(String),
    #[error("invalid '{key}': {message}")]
    UsageKey { key: String, message: String },
    #[error(transparent)]
    Core(#[from] CoreError),
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{0}")]
    Format(String),
    #[error("{failed} validation check(s) failed")]
    Validation { failed: usize },
}

impl CliError {
    pub fn usage(key: &str, message: impl Into<String>) -> Self {
        CliError::UsageKey { key: key.to_string(), message: message.into() }
    }

    /// 1 for bad input, 2 for numerical failures, 3 for I/O.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Clap(e) if !e.use_stderr() => 0,
            CliError::Clap(_) | CliError::Usage(_) | CliError::UsageKey { .. } => 1,
            CliError::Core(e) => core_exit_code(e),
            CliError::Io { .. } | CliError::Format(_) => 3,
            CliError::Validation { .. } => 2,
        }
    }
}

/// Parameter and grid problems are the caller's input; everything else is a
/// numerical failure.
fn core_exit_code(e: &CoreError) -> i32 {
    match e {
        CoreError::InvalidGrid(_)
        | CoreError::WindowTooSmall(_)
        | CoreError::StepTooCoarse { .. }
        | CoreError::InvalidParams(_)
        | CoreError::InvalidWeights(_)
        | CoreError::InvalidCloud(_)
        | CoreError::InvalidSweep(_) => 1,
        CoreError::SweepPoint { source, .. } => core_exit_code(source),
        _ => 2,
    }
}
