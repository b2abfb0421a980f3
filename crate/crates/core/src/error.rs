use thiserror::Error;

/// Failure modes shared by every construction in the crate.
///
/// Variants map onto the CLI exit-code contract: `Input`/`Malformed`/`Unsupported`
/// are input errors, `Exhausted` means the truncation horizon was too shallow,
/// and `Construction` is an internal invariant failure.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("malformed diagram: {0}")]
    Malformed(String),
    #[error("invalid input: {0}")]
    Input(String),
    #[error("level out of range: {0}")]
    LevelOutOfRange(String),
    #[error("path cap exceeded: {count} paths at depth {depth} (cap {cap})")]
    CapExceeded { depth: usize, count: usize, cap: usize },
    #[error("horizon exhausted at {stage}: {detail}")]
    Exhausted { stage: String, detail: String },
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("construction invariant violated at {stage}: {detail}")]
    Construction { stage: String, detail: String },
}

impl Error {
    pub fn exhausted(stage: impl Into<String>, detail: impl Into<String>) -> Self {
        Error::Exhausted { stage: stage.into(), detail: detail.into() }
    }

    pub fn construction(stage: impl Into<String>, detail: impl Into<String>) -> Self {
        Error::Construction { stage: stage.into(), detail: detail.into() }
    }

    /// Prefix the stage tag of a staged error; other variants pass through.
    pub fn in_stage(self, stage: &str) -> Self {
        match self {
            Error::Exhausted { stage: s, detail } => {
                Error::Exhausted { stage: format!("{stage}/{s}"), detail }
            }
            Error::Construction { stage: s, detail } => {
                Error::Construction { stage: format!("{stage}/{s}"), detail }
            }
            other => other,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
