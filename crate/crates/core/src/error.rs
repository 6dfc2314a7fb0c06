use thiserror::Error;

/// Errors raised by the linear-algebra core, the scenario builders and the
/// ontic-model machinery.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("subsystem label `{0}` appears more than once")]
    DuplicateLabel(String),
    #[error("subsystem `{label}` has invalid dimension {dim}")]
    InvalidDimension { label: String, dim: usize },
    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },
    #[error("layout mismatch: {left} vs {right}")]
    LayoutMismatch { left: String, right: String },
    #[error("state is not normalized (norm {0})")]
    NotNormalized(f64),
    #[error("operator is not unitary (max deviation {0:e})")]
    NotUnitary(f64),
    #[error("invalid POVM: {0}")]
    InvalidPovm(String),
    #[error("basis is not orthonormal (max deviation {0:e})")]
    NotOrthonormal(f64),
    #[error("outcome {0} has zero probability and cannot be projected onto")]
    ZeroProbability(usize),
    #[error("invalid direction: {0}")]
    InvalidDirection(String),
    #[error("invalid friend model: {0}")]
    InvalidFriendModel(String),
    #[error("no record for basis {basis} outcome {outcome} in friend model")]
    MissingRecord { basis: String, outcome: String },
    #[error("unknown state label `{0}`")]
    UnknownLabel(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("ontic space of {size} assignments exceeds the enumeration cap {cap}")]
    CapExceeded { size: u128, cap: usize },
    #[error("invalid epistemic state `{label}`: {reason}")]
    InvalidEpistemicState { label: String, reason: String },
    #[error("ontic space mismatch")]
    SpaceMismatch,
    #[error("malformed linear program: {0}")]
    MalformedLp(String),
    #[error("linear program is infeasible")]
    Infeasible,
    #[error("linear program is unbounded")]
    Unbounded,
    #[error("simplex stalled after {0} iterations")]
    Stalled(usize),
    #[error("serialization: {0}")]
    Serialization(String),
}

impl Error {
    /// True for failures of the numerical machinery rather than of the inputs.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::Infeasible | Error::Unbounded | Error::Stalled(_) | Error::ZeroProbability(_)
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
