use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{origin}: {message}")]
    Parse { origin: String, message: String },

    #[error("{origin}: {message}")]
    Invalid { origin: String, message: String },

    #[error("unknown scenario `{0}` (not a file and not a builtin; see `geofreq list`)")]
    UnknownScenario(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: {source}")]
    Csv {
        path: PathBuf,
        #[source]
        source: csv::Error,
    },

    #[error(transparent)]
    Core(#[from] geofreq::Error),
}

impl CliError {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Self::Io {
            path: path.into(),
            source,
        }
    }

    /// Process exit code: 3 for a non-diagonalizable matrix, 1 otherwise.
    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Core(geofreq::Error::NonDiagonalizable { .. }) => 3,
            _ => 1,
        }
    }
}

pub type Result<T> = std::result::Result<T, CliError>;
