use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    Dimension { expected: usize, found: usize },

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("matrix is not unitary (defect {defect:.3e} exceeds {tolerance:.1e})")]
    NotUnitary { defect: f64, tolerance: f64 },

    #[error("invalid graph: {0}")]
    Graph(String),

    #[error("graph file, line {line}, field `{field}`: {message}")]
    GraphFile {
        line: usize,
        field: String,
        message: String,
    },

    #[error("rational input {0} has no Markov constant")]
    Rational(String),

    #[error("numerical non-convergence: {0}")]
    NonConvergence(String),

    #[error("parse error: {0}")]
    Parse(String),
}

impl Error {
    pub(crate) fn param(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }
}
