use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid {what}: {reason}")]
    Invalid { what: &'static str, reason: String },

    #[error("actor `{0}` is already registered")]
    DuplicateActor(String),

    #[error("unknown actor `{0}`")]
    UnknownActor(String),

    #[error("actor `{id}` is a {kind}, operation requires a {expected}")]
    KindMismatch {
        id: String,
        kind: &'static str,
        expected: &'static str,
    },

    #[error("Kepler solver did not converge: M = {mean_anomaly}, e = {eccentricity}, last |dE| = {last_step:e} after {iterations} iterations")]
    KeplerNonConvergence {
        mean_anomaly: f64,
        eccentricity: f64,
        last_step: f64,
        iterations: u32,
    },

    #[error("visibility between two ground stations (`{0}`, `{1}`) is not supported")]
    UnsupportedPair(String, String),

    #[error("device has permanently failed")]
    DeviceFailed,

    #[error("activity `{activity}` already registered on actor `{actor}`")]
    DuplicateActivity { actor: String, activity: String },

    #[error("unknown activity `{activity}` on actor `{actor}`")]
    UnknownActivity { actor: String, activity: String },

    #[error("actor `{actor}` is already running activity `{running}`")]
    ActivityRunning { actor: String, running: String },

    #[error("wrong simulation mode: {0}")]
    WrongMode(&'static str),

    #[error("malformed actor record at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },

    #[error("unsupported actor schema version {0}")]
    SchemaVersion(i64),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn invalid(what: &'static str, reason: impl Into<String>) -> Self {
        Error::Invalid {
            what,
            reason: reason.into(),
        }
    }
}
