use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("variable count mismatch: {0} vs {1}")]
    NvarsMismatch(usize, usize),
    #[error("index {index} out of range for {bound} variables")]
    IndexOutOfRange { index: usize, bound: usize },
    #[error("true set is not contained in the ground set")]
    NotSubset,
    #[error("partial assignment sets overlap")]
    OverlappingAssignment,
    #[error("point has length {got}, expected {expected}")]
    PointLength { got: usize, expected: usize },
    #[error("size guard: {0}")]
    SizeGuard(String),
    #[error("row {0} has empty support")]
    EmptyRow(usize),
    #[error("negative data: {0}")]
    NegativeData(String),
    #[error("covering inequality cannot be satisfied by the all-ones point")]
    NoFinitePitch,
    #[error("invalid input: {0}")]
    Invalid(String),
    #[error("no core satisfies the three core conditions")]
    NoCore,
    #[error("inequality pitch {pitch} exceeds parameter {limit}")]
    PitchTooLarge { pitch: usize, limit: usize },
    #[error("certificate construction failed: {0}")]
    Construction(String),
    #[error("linear program is {0}")]
    Lp(String),
    #[error("parse error: {0}")]
    Parse(String),
}
