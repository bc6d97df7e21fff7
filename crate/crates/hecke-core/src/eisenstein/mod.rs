//! Eisenstein–Kronecker series and the operators acting on elliptic
//! rational functions.  The `rows` submodule holds the shared row-sum
//! primitives (closed forms and certified tail bounds) that the lattice
//! evaluations in this crate are built on; `series` evaluates
//! `E_{j,k}(z, L)` and its smoothed variant; `djk` realizes the
//! log-derivative operators on products of shifted Weierstrass factors.

pub mod djk;
pub mod rows;
pub mod series;

pub use djk::{cross_check_djk, djk_via_log_derivative, zeta_log_factors, LogFactor};
pub use series::{a_const, eis_jk, eis_jk_smoothed, EisParams};

use crate::cm_curve::CurveError;
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum EisError {
    #[error("lattice basis is not positively oriented")]
    BasisOrientation,
    #[error("parameters outside the absolute convergence region")]
    ConvergenceRegion,
    #[error("requested precision not reachable within the row budget")]
    PrecisionExhausted,
    #[error("evaluation point is a zero or pole")]
    PoleOrZeroAtPoint,
    #[error("curve layer: {0}")]
    Curve(CurveError),
    #[error("invalid input: {0}")]
    Invalid(String),
}

impl From<CurveError> for EisError {
    fn from(e: CurveError) -> EisError {
        match e {
            CurveError::PoleAtLatticePoint => EisError::PoleOrZeroAtPoint,
            CurveError::PrecisionExhausted => EisError::PrecisionExhausted,
            CurveError::BadBasis => EisError::BasisOrientation,
            other => EisError::Curve(other),
        }
    }
}

pub type Result<T> = std::result::Result<T, EisError>;
