use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("degenerate lattice: matrix is singular")]
    DegenerateLattice,
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("prime mismatch: {0} vs {1}")]
    PrimeMismatch(u64, u64),
    #[error("{0} is not prime")]
    NotPrime(u64),
    #[error("{0} is not an odd prime")]
    NotOddPrime(u64),
    #[error("{0} is not a negative fundamental discriminant")]
    NotFundamental(i64),
    #[error("discriminant mismatch: {0} vs {1}")]
    DiscriminantMismatch(String, String),
    #[error("invalid form: {0}")]
    InvalidForm(String),
    #[error("invalid prime of K: {0}")]
    InvalidPrime(String),
    #[error("invalid polynomial: {0}")]
    InvalidPolynomial(String),
    #[error("prime above {0} is inert in K and has no degree-one local model")]
    InertDeviation(u64),
    #[error("prime above {0} is not split in K; deviations live at split primes only")]
    UnsupportedDeviation(u64),
    #[error("frame does not contain the reference vertex at the prime above {0}")]
    FrameOffReference(u64),
    #[error("search bound exceeded after {scanned} primes: {what}")]
    SearchBoundExceeded { scanned: usize, what: String },
    #[error("indeterminate: {0}")]
    Indeterminate(String),
    #[error("factorization failed for {0}")]
    FactorizationFailed(String),
    #[error("{0}")]
    Invalid(String),
}

pub type Result<T> = std::result::Result<T, Error>;
