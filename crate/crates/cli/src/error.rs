use std::path::PathBuf;

use thiserror::Error;

/// Process exit codes.
pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;
pub const EXIT_INPUT: i32 = 4;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{context}: {source}")]
    Core {
        context: String,
        #[source]
        source: ionkin_core::Error,
    },

    #[error("configuration error: {0}")]
    Config(String),

    #[error("input error: {0}")]
    Input(String),

    /// A result failed a numerical check.
    #[error("numerical error: {0}")]
    Numerical(String),

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        use ionkin_core::Error as E;
        match self {
            CliError::Config(_) => EXIT_CONFIG,
            CliError::Input(_) | CliError::Io { .. } => EXIT_INPUT,
            CliError::Numerical(_) => EXIT_NUMERICAL,
            CliError::Core { source, .. } => match source {
                E::Config(_) | E::Domain(_) | E::State(_) => EXIT_CONFIG,
                E::Input(_) | E::Range(_) => EXIT_INPUT,
                E::IntegrationFailure { .. } | E::Integrity { .. } | E::Ensemble { .. } => {
                    EXIT_NUMERICAL
                }
            },
        }
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.into(),
            source,
        }
    }
}

impl From<ionkin_core::Error> for CliError {
    fn from(source: ionkin_core::Error) -> Self {
        CliError::Core {
            context: "error".into(),
            source,
        }
    }
}

pub type Result<T, E = CliError> = std::result::Result<T, E>;

/// Attaches a context string to core errors.
pub trait Context<T> {
    fn context(self, ctx: impl FnOnce() -> String) -> Result<T>;
}

impl<T> Context<T> for std::result::Result<T, ionkin_core::Error> {
    fn context(self, ctx: impl FnOnce() -> String) -> Result<T> {
        self.map_err(|source| CliError::Core {
            context: ctx(),
            source,
        })
    }
}
