use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("supercritical process: branching ratio {0} >= 1")]
    Supercritical(f64),

    #[error("explosion guard: more than {0} events simulated")]
    Explosion(usize),

    #[error("time {t} outside observation window [0, {horizon}]")]
    OutOfWindow { t: f64, horizon: f64 },

    #[error("invalid event sequence: {0}")]
    InvalidEvents(String),

    #[error("invalid transition matrix: {0}")]
    InvalidMatrix(String),

    #[error("chain is not ergodic: {0}")]
    NotErgodic(String),

    #[error("states without outgoing observations: {0:?} (1-based)")]
    UnvisitedStates(Vec<usize>),

    #[error("singular system (condition estimate {condition:e})")]
    Singular { condition: f64 },

    #[error("unidentifiable: {0}")]
    Unidentifiable(String),

    #[error("non-finite value: {0}")]
    NonFinite(String),

    #[error("{path}:{line}: {msg}")]
    Parse {
        path: String,
        line: usize,
        msg: String,
    },

    #[error("empty input: {0}")]
    Empty(String),

    #[error("too few windows: {0}")]
    TooFewWindows(String),

    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    #[error("io error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn io(path: impl AsRef<std::path::Path>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.as_ref().display().to_string(),
            source,
        }
    }
}
