use thiserror::Error;

/// Errors raised when a construction or a verification request violates the
/// preconditions of the operation.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("scale factor must be at least 1")]
    ZeroScale,
    #[error("prefix length must be at least 1")]
    EmptyPrefix,
    #[error("invalid window schedule: {0}")]
    Schedule(String),
    #[error("radicand {0} is not square-free (or is < 2)")]
    NotSquareFree(u64),
    #[error("duplicate radicand {0}")]
    DuplicateRadicand(u64),
    #[error("family must be nonempty")]
    EmptyFamily,
    #[error("duplicate member name `{0}`")]
    DuplicateName(String),
    #[error("unknown member `{0}`")]
    UnknownName(String),
    #[error("member `{0}` has no declared density")]
    MissingDensity(String),
    #[error("{what} must lie strictly inside (0, 1), got {value}")]
    OutOfUnitInterval { what: &'static str, value: String },
    #[error("subfamily of size {size} exceeds the limit {limit}")]
    TooLarge { size: usize, limit: usize },
    #[error("depth limit {0} exceeds the supported maximum 5")]
    DepthTooLarge(u32),
    #[error("gap target {0} must lie strictly inside (1/2, 1)")]
    GapTarget(String),
    #[error("member `{name}` has an empty prefix at n = {n}")]
    EmptyReference { name: String, n: u64 },
    #[error("unparsable number `{0}`")]
    Parse(String),
    #[error("pattern `{0}` is not a binary string of the required length")]
    BadPattern(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
