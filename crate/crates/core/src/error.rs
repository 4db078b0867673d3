use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("parse error: {0}")]
    Parse(String),
    #[error("dimension mismatch: expected {expected} variables, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("monomial support is empty")]
    EmptySupport,
    #[error("invalid type: {0}")]
    InvalidType(String),
    #[error("vector is not in the lattice N of {0}")]
    NotInLattice(String),
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("family {family} does not apply to r = {r}: {reason}")]
    FamilyInapplicable {
        family: String,
        r: u64,
        reason: String,
    },
    #[error("no pairing certificate exists for {0}")]
    NoPairing(String),
}

pub type Result<T> = std::result::Result<T, Error>;
