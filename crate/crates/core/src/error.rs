use thiserror::Error;

/// Errors raised by the estimation library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    Parameter { name: &'static str, reason: String },

    #[error("dimension mismatch in {context}: expected {expected}, got {actual}")]
    Dimension {
        context: &'static str,
        expected: String,
        actual: String,
    },

    #[error("matrix is singular or ill-conditioned (condition estimate {condition:.3e})")]
    Singular { condition: f64 },

    #[error("rank-deficient Gram matrix: {0}")]
    RankDeficient(String),

    #[error("estimator state corrupted: {0}; re-initialize the recursion")]
    StateCorrupted(String),

    #[error("insufficient data on the {branch} branch of the error-norm stream")]
    InsufficientData { branch: &'static str },

    #[error("degenerate steady-state regime: denominator {denominator:.3e} too close to zero")]
    Degenerate { denominator: f64 },

    #[error("at bound γ = {gamma}: {source}")]
    AtGridPoint {
        gamma: f64,
        #[source]
        source: Box<Error>,
    },

    #[error("i/o error: {0}")]
    Io(String),

    #[error("output validation failed: {0}")]
    InvalidOutput(String),

    #[error("trial {trial}, iteration {iteration}: {source}")]
    InRun {
        trial: usize,
        iteration: usize,
        #[source]
        source: Box<Error>,
    },
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn parameter(name: &'static str, reason: impl Into<String>) -> Self {
        Error::Parameter {
            name,
            reason: reason.into(),
        }
    }

    pub(crate) fn dimension(context: &'static str, expected: impl ToString, actual: impl ToString) -> Self {
        Error::Dimension {
            context,
            expected: expected.to_string(),
            actual: actual.to_string(),
        }
    }

    pub(crate) fn at_gamma(self, gamma: f64) -> Self {
        Error::AtGridPoint {
            gamma,
            source: Box::new(self),
        }
    }

    pub(crate) fn in_run(self, trial: usize, iteration: usize) -> Self {
        Error::InRun {
            trial,
            iteration,
            source: Box::new(self),
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
