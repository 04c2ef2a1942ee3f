use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("initial data must contain at least one particle")]
    EmptyInput,

    #[error("field `{field}` has {got} entries, expected {expected}")]
    LengthMismatch {
        field: &'static str,
        expected: usize,
        got: usize,
    },

    #[error("non-finite value in `{field}` at index {index}")]
    NonFinite { field: &'static str, index: usize },

    #[error("positions must be strictly increasing (index {index}: {left} >= {right})")]
    NonIncreasingPositions { index: usize, left: f64, right: f64 },

    #[error("mass at index {index} must be strictly positive, got {mass}")]
    NonPositiveMass { index: usize, mass: f64 },

    #[error("index range [{first}, {last}] out of range for {len} particles")]
    IndexOutOfRange {
        first: usize,
        last: usize,
        len: usize,
    },

    #[error("paths are identical; they must be treated as already merged")]
    IdenticalPaths,

    #[error("precondition violated: {0}")]
    PreconditionViolated(String),

    #[error("time {t} outside the simulated horizon [0, {t_end}]")]
    TimeOutOfRange { t: f64, t_end: f64 },

    #[error("window [{t1}, {t2}] invalid for horizon (0, {t_end}]")]
    WindowOutOfRange { t1: f64, t2: f64, t_end: f64 },

    #[error(
        "initial accelerations are not non-increasing (index {index}: {left} < {right}); \
         the variational characterization does not apply"
    )]
    InadmissibleData { index: usize, left: f64, right: f64 },

    #[error("inconsistent cluster endpoints at t = {t}: {detail}")]
    InconsistentEndpoints { t: f64, detail: String },

    #[error("point {point} is not in the support of the measure at t = {t}")]
    OutsideSupport { point: f64, t: f64 },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}
