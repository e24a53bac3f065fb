use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Config(String),

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Solver(#[from] ap_staggered::Error),
}

impl CliError {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.into(),
            source,
        }
    }

    /// 0 success, 2 configuration, 3 numerical blow-up, 4 I/O.
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => 2,
            CliError::Io { .. } => 4,
            CliError::Solver(ap_staggered::Error::NumericOverflow { .. }) => 3,
            CliError::Solver(_) => 2,
        }
    }

    /// Single machine-readable line for stderr.
    pub fn report_line(&self) -> String {
        match self {
            CliError::Solver(ap_staggered::Error::NumericOverflow { step, t }) => {
                format!("error: kind=numeric-overflow step={step} t={t:?}")
            }
            CliError::Solver(e) => format!("error: kind=invalid-argument message={:?}", e.to_string()),
            CliError::Config(m) => format!("error: kind=config message={m:?}"),
            CliError::Io { .. } => format!("error: kind=io message={:?}", self.to_string()),
        }
    }
}
