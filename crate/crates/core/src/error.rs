use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("{0} is not an odd prime")]
    NotAnOddPrime(u64),
    #[error("no inverse of zero")]
    InverseOfZero,
    #[error("binomial C({m},{u}) requested with u > m")]
    BinomialOutOfRange { m: u64, u: u64 },
    #[error("skew-symmetric matrix must have even order, got {0}")]
    OddOrder(usize),
    #[error("matrix is not skew-symmetric at ({row},{col})")]
    NotSkewSymmetric { row: usize, col: usize },
    #[error("oracle size limit: order {order} exceeds {limit}")]
    OracleSizeLimit { order: usize, limit: usize },
    #[error("invalid graph: {0}")]
    InvalidGraph(String),
    #[error("invalid instance: {0}")]
    InvalidInstance(String),
    #[error("grid too large: {size} Pfaffian evaluations per trial exceed the cap of {cap}")]
    GridTooLarge { size: u128, cap: u64 },
    #[error("prime override {p} rejected: must be prime and at least {required}")]
    PrimeOverrideRejected { p: u64, required: u64 },
    #[error("enumeration budget exceeded: {0}")]
    OverBudget(String),
    #[error("not a perfect matching of the graph")]
    NotPerfectMatching,
    #[error("construction failed (Monte-Carlo) after {attempts} attempts")]
    ConstructionFailed { attempts: usize },
    #[error("solution failed re-validation: {0}")]
    Certification(String),
}

pub type Result<T> = std::result::Result<T, Error>;
