use thiserror::Error;

/// Errors raised across the library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("generator spaces do not match")]
    SpaceMismatch,
    #[error("generator {0} is not part of this space")]
    UnknownGenerator(String),
    #[error("generator {0} appears more than once in the integration list")]
    RepeatedGenerator(String),
    #[error("space has no conjugate partner for generator {0}")]
    MissingConjugate(String),
    #[error("parity violation: {0}")]
    Parity(String),
    #[error("variable `{0}` has no assigned value")]
    MissingVariable(String),
    #[error("expression is not algebraic in `{0}`: {1}")]
    NonAlgebraic(String, String),
    #[error("invalid model field `{field}`: {reason}")]
    InvalidModel { field: String, reason: String },
    #[error("operator is not Hermitian (relative deviation {0:.3e})")]
    NotHermitian(f64),
    #[error("operator is not number conserving (off-sector weight {0:.3e})")]
    NotNumberConserving(f64),
    #[error("linear system is singular: {0}")]
    Singular(String),
    #[error("Berezin integration left generator content behind (norm {0:.3e})")]
    LeftoverGenerators(f64),
    #[error("integrator failed to reach tolerance: {0}")]
    Tolerance(String),
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("pair potential is not symmetric under (p,r)<->(q,s) (relative deviation {0:.3e})")]
    AsymmetricPotential(f64),
}

pub type Result<T> = std::result::Result<T, Error>;
