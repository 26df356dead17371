//! Elliptic curves over Q: integral models, reduction modulo primes, point
//! counting and the Dirichlet coefficients of the Hasse-Weil L-function.

pub mod count;
pub mod minimal;
mod model;
pub mod point;
pub mod series;

pub use model::{known, CurveQ, Weierstrass, VALIDATION_BOUND};
pub use point::RationalPoint;
pub use series::{an_series, AnSeries, ApTable, Provenance};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum EcError {
    #[error("conductor must be positive, got {0}")]
    InvalidConductor(u64),
    #[error("singular model (discriminant 0)")]
    Singular,
    #[error("conductor inconsistent with model at p = {p}: {reason}")]
    ConductorMismatch { p: u64, reason: &'static str },
    #[error("{0} is not prime")]
    NotPrime(u64),
    #[error("p = {p} exceeds the point counting ceiling {max}")]
    PrimeTooLarge { p: u64, max: u64 },
    #[error("reduction mod {0} is singular")]
    SingularReduction(u64),
    #[error("extension degree {0} unsupported (only 1 and 2)")]
    UnsupportedExtension(u32),
    #[error("no singular point found mod {0}")]
    NoSingularPoint(u64),
    #[error("bad reduction at {0}")]
    BadReduction(u64),
    #[error("a_{p} disagrees between sources: {left} vs {right}")]
    Inconsistent { p: u64, left: i64, right: i64 },
}
