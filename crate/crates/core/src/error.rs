use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid interval [{lo}, {hi}]")]
    InvalidInterval { lo: f64, hi: f64 },

    #[error("division by an interval containing zero")]
    DivisionByZeroInterval,

    #[error("hull of an empty set")]
    EmptySet,

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("index {index} out of range 1..={len}")]
    IndexOutOfRange { index: usize, len: usize },

    #[error("range of the divisor contains zero")]
    ZeroInRange,

    #[error("matrix is singular to working precision")]
    SingularMatrix,

    #[error("zero pivot at step {0} of unpivoted LU")]
    ZeroPivot(usize),

    #[error("{0} did not converge")]
    ConvergenceFailure(&'static str),

    #[error("parse error at {position}: {message}")]
    Parse { position: usize, message: String },

    #[error("unknown parameter `{0}`")]
    UnknownParameter(String),

    #[error("parameter {0} is not of class one")]
    NotClassOne(usize),

    #[error("midpoint matrix is singular")]
    SingularMidpoint,

    #[error("vectors are linearly dependent (rank {rank} < {expected})")]
    DependentColumns { rank: usize, expected: usize },

    #[error("system is not strongly regular for this preconditioner (rho = {rho})")]
    NotStronglyRegular { rho: f64 },

    #[error("interval is not contained in the reference interval")]
    NotNested,

    #[error("reference interval has zero width")]
    ZeroWidthReference,

    #[error("all {0} sampled parameter points gave singular matrices")]
    AllSamplesSingular(usize),

    #[error("unknown example `{0}`")]
    UnknownExample(String),

    #[error("unknown strategy `{0}`")]
    UnknownStrategy(String),

    #[error("unknown method `{0}`")]
    UnknownMethod(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),
}

impl Error {
    pub(crate) fn dims(msg: impl Into<String>) -> Self {
        Error::DimensionMismatch(msg.into())
    }
}
