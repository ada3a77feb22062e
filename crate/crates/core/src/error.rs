use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("objective returned a non-finite value")]
    NonFiniteEvaluation,

    /// The repeated-querying loop hit its round cap without separating the
    /// outcome frequency from 1/2; the function gap is below resolution.
    #[error("comparison inconclusive after {rounds} rounds")]
    Inconclusive { rounds: u32 },

    #[error("query budget exhausted")]
    BudgetExhausted,

    #[error("line search step exceeded 2^{max_doublings}; objective appears unbounded along the direction")]
    UnboundedDescent { max_doublings: u32 },

    #[error("config error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }
}
