use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("inadmissible parameter `{name}` = {value}: {reason}")]
    InadmissibleParam {
        name: String,
        value: f64,
        reason: String,
    },

    #[error("hypothesis {hypothesis} declared {declared} for {model} but numeric check found {observed}")]
    HypothesisMismatch {
        model: String,
        hypothesis: &'static str,
        declared: bool,
        observed: bool,
    },

    #[error("trajectory diverged at t={t}: P={p}, H={h} exceeds {limit:e}")]
    Overflow { t: usize, p: f64, h: f64, limit: f64 },

    #[error("no sign change bracketing the interior equilibrium (a*Pn = {a_pn}); the model may violate H1/H2")]
    BracketFailure { a_pn: f64 },

    #[error("unsupported model: {0}")]
    UnsupportedModel(String),

    #[error("not found: {0}")]
    NotFound(String),

    #[error("eigenvalues are real at the unit-circle crossing (a = {a}); fold or flip, not Neimark-Sacker")]
    RealCrossing { a: f64 },

    #[error("trajectory too short: {len} post-transient samples, need at least {min}")]
    TooShort { len: usize, min: usize },

    #[error("fewer than two upward threshold crossings ({crossings})")]
    NoBursts { crossings: usize },

    #[error("usage: {0}")]
    Usage(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Process exit code: 2 for usage problems, 3 for numerical failures, 1 otherwise.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Usage(_) | Error::InadmissibleParam { .. } => 2,
            Error::Domain(_)
            | Error::HypothesisMismatch { .. }
            | Error::Overflow { .. }
            | Error::BracketFailure { .. }
            | Error::UnsupportedModel(_)
            | Error::NotFound(_)
            | Error::RealCrossing { .. }
            | Error::TooShort { .. }
            | Error::NoBursts { .. } => 3,
            Error::Io(_) | Error::Csv(_) | Error::Json(_) => 1,
        }
    }

    pub(crate) fn usage(msg: impl Into<String>) -> Self {
        Error::Usage(msg.into())
    }
}
