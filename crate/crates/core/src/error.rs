use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("measure space has no points")]
    EmptySpace,
    #[error("duplicate point id `{0}`")]
    DuplicatePointId(String),
    #[error("point `{id}` has non-positive or non-finite weight {weight}")]
    NonPositiveWeight { id: String, weight: f64 },
    #[error("unknown point id `{0}`")]
    UnknownPointId(String),

    #[error("EmptyFirstMissing: chain must start with the empty set")]
    EmptyFirstMissing,
    #[error("NotNested: chain set {index} is not a proper superset of its predecessor")]
    NotNested { index: usize },
    #[error("DuplicateChainSet: chain sets {first} and {second} are equal")]
    DuplicateChainSet { first: usize, second: usize },
    #[error("NotFull: the last chain set misses {missing} point(s)")]
    NotFull { missing: usize },
    #[error("IndexOutOfRange: index {index} with {len} points")]
    IndexOutOfRange { index: usize, len: usize },

    #[error("LengthMismatch: expected {expected} values, got {found}")]
    LengthMismatch { expected: usize, found: usize },
    #[error("NonFinite: value at position {index} is not finite")]
    NonFinite { index: usize },
    #[error("NegativeValue: value {value} at position {index} is negative")]
    NegativeValue { index: usize, value: f64 },
    #[error("NegativeFunction: value {value} at point {index} is negative")]
    NegativeFunction { index: usize, value: f64 },

    #[error("NotSorted: gamma must be strictly increasing (position {index})")]
    NotSorted { index: usize },
    #[error("NegativeEntry: gamma contains negative entry {value}")]
    NegativeEntry { value: f64 },
    #[error("MissingOrigin: gamma must start at 0, found {value}")]
    MissingOrigin { value: f64 },
    #[error("NotIncreasingMass: cumulative mass must be strictly increasing (position {index})")]
    NotIncreasingMass { index: usize },

    #[error("NegativeGamma: gamma = {0}")]
    NegativeGamma(f64),
    #[error("BadExponent: p = {0} (need 1 <= p <= inf)")]
    BadExponent(f64),
    #[error("NegativeT: t = {0}")]
    NegativeT(f64),
    #[error("EmptyGrid: decomposition gamma grid is empty")]
    EmptyGrid,
    #[error("BadGrid: {0}")]
    BadGrid(String),
    #[error("CurveShape: K-curve violates {0}")]
    CurveShape(&'static str),

    #[error("TooManyAtoms: {found} atoms, oracle limit is {limit}")]
    TooManyAtoms { found: usize, limit: usize },
    #[error("TooManyPoints: {found} points, oracle limit is {limit}")]
    TooManyPoints { found: usize, limit: usize },
    #[error("GNotDecreasing: comparison function is not core decreasing")]
    GNotDecreasing,
    #[error("DeadlineExceeded: oracle search cancelled")]
    DeadlineExceeded,

    #[error("instance: {0}")]
    Instance(String),
}
