use thiserror::Error;

/// Library-wide error type.
#[derive(Debug, Error)]
pub enum Error {
    /// An argument lies outside the domain of the operation (|z| > 1, r outside [0, 1], ...).
    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid argument: {0}")]
    Argument(String),

    /// Malformed symbol description. `path` locates the offending field, e.g. `analytic[0].coef.mod`.
    #[error("parse error at `{path}`: {message}")]
    Parse { path: String, message: String },

    /// A hypothesis required by a decision procedure fails.
    #[error("hypothesis not satisfied: {0}")]
    Hypothesis(String),

    #[error("symbol is not a normalized harmonic polynomial: {0}")]
    NotNormalized(String),

    #[error("radial series needs {required} moments but only {available} are available")]
    InsufficientMoments { required: usize, available: usize },

    #[error("quadrature refused: {0}")]
    QuadratureRefused(String),

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn parse(path: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Parse {
            path: path.into(),
            message: message.into(),
        }
    }

    /// True for errors caused by the input (bad symbol, unmet hypothesis, out-of-domain
    /// argument) rather than by a failure inside the library.
    pub fn is_user_facing(&self) -> bool {
        !matches!(self, Error::Numerical(_) | Error::Io(_))
    }
}

pub type Result<T> = std::result::Result<T, Error>;
