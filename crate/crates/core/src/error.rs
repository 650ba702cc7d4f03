use thiserror::Error;

/// Errors raised by numeration, spectral, and experiment operations.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("principal block must have at least two entries, got {0}")]
    BlockTooShort(usize),
    #[error("principal block must start with a positive entry")]
    LeadingZeroBlock,
    #[error("expected a positive integer, got {0}")]
    NonPositive(String),
    #[error("digits {digits:?} are not a member of the collection for block {block:?}")]
    NotAMember { digits: Vec<u32>, block: Vec<u32> },
    #[error("block {0:?} is not a leading block of length {1}")]
    NotInFamily(Vec<u32>, usize),
    #[error("empty input")]
    EmptyInput,
    #[error("samples must be increasing with endpoints 0 and 1")]
    NonMonotone,
    #[error("no sign change of the characteristic polynomial on ({lo}, {hi}]")]
    NoBracket { lo: f64, hi: f64 },
    #[error("did not converge after {0} iterations")]
    NonConvergence(usize),
    #[error("limit value {0} lies on a block boundary")]
    BoundaryCollision(f64),
    #[error("leading-block family of length {s} has {size} members, above the limit {limit}")]
    FamilyTooLarge { s: usize, size: String, limit: u64 },
    #[error("invalid sequence specification: {0}")]
    InvalidSpec(String),
    #[error("argument out of range: {0}")]
    OutOfRange(String),
    #[error("internal invariant violated: {0}")]
    Internal(String),
}

pub type Result<T> = std::result::Result<T, Error>;
