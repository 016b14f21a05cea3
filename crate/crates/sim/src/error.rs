use std::path::PathBuf;

#[derive(Debug, thiserror::Error)]
pub enum SimError {
    /// Rejected before any simulation starts.
    #[error("{0}")]
    Config(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: {message}")]
    Parse { path: PathBuf, message: String },

    #[error(transparent)]
    Core(#[from] mtm_core::Error),
}

impl SimError {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        SimError::Io {
            path: path.into(),
            source,
        }
    }

    /// Configuration problems, including those only the core detects.
    pub fn is_config(&self) -> bool {
        matches!(self, SimError::Config(_) | SimError::Core(mtm_core::Error::Config(_)))
    }
}

pub type Result<T> = std::result::Result<T, SimError>;
