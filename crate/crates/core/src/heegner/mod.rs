//! Heegner points on `X_0(N)` and their images on `E`: CM points, the
//! modular parametrization, traces down to `K`, canonical heights and the
//! numeric trace and height-vs-L-value checks.

pub mod checks;
pub mod height;
pub mod lattice;
pub mod orbit;
pub mod param;

pub use checks::{
    gz_correspondence, is_torsion, trace_relation_check, trace_relation_check_with_terms, trace_to_k, GzReport,
    TraceRelationReport, TraceToK,
};
pub use height::{canonical_height, doubling_height, recognize_rational, Recognized};
pub use lattice::{CPoint, PeriodLattice};
pub use orbit::{extend_class, heegner_beta, heegner_orbit, HeegnerOrbit, HeegnerTau};
pub use param::{modular_param, tail_bound, terms_for, ParamPoint, Parametrization, MIN_IM_TAU, TERM_CEILING};

use crate::ec::{CurveQ, EcError};
use crate::lseries::LError;
use crate::quadforms::QfError;

/// Period lattice of the given curve.
pub fn period_lattice(curve: &CurveQ) -> PeriodLattice {
    PeriodLattice::new(curve.model())
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum HeegnerError {
    #[error("Heegner hypothesis fails: {p} does not split in Q(sqrt({d}))")]
    HeegnerHypothesis { p: u64, d: i64 },
    #[error("{d} has no square root modulo 4*{n}")]
    NoSquareRoot { n: u64, d: i64 },
    #[error("conductor {c} rejected: {reason}")]
    BadConductor { c: u64, reason: &'static str },
    #[error("{0} is not a prime inert in K and prime to N d_K")]
    BadAuxiliaryPrime(u64),
    #[error("class search for discriminant {d} did not cover the class group")]
    ClassSearch { d: i64 },
    #[error("precision unreachable: Im tau = {im_tau:e} needs {terms} terms")]
    PrecisionUnreachable { im_tau: f64, terms: usize },
    #[error(transparent)]
    Ec(#[from] EcError),
    #[error(transparent)]
    Qf(#[from] QfError),
    #[error(transparent)]
    L(LError),
}

impl From<LError> for HeegnerError {
    fn from(e: LError) -> Self {
        match e {
            LError::HeegnerHypothesis { p, d } => HeegnerError::HeegnerHypothesis { p, d },
            other => HeegnerError::L(other),
        }
    }
}
