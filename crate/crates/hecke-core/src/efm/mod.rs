//! Elliptic rational functions and their measures: the zeta and gamma
//! functions attached to an auxiliary ideal, theta sums built from
//! log-derivative images, p-adic orders via sampling on q-power torsion, and
//! the bridge turning a rational function into a finite measure through its
//! Fourier values on torsion.

mod bridge;
mod modp;
mod ord;
mod ratfn;
mod theta;

pub use bridge::{delta_basis, measure_of_ratfn};
pub use modp::{combo_point, nonzero_torsion, reduce_ratfn, ReducedRatFn};
pub use ord::{ord_pi_ratfn, OrdReport};
pub use ratfn::{
    gamma_fn, kernel_coords, zeta_fn, DjkTerm, ProductFactor, RatFnForm, RatFnProduct,
};
pub use theta::{aux_modulus, quad_to_cyc, ray_class_degree, reference_v, theta_psi_build, ThetaPsiSpec};

use crate::arith::ArithError;
use crate::cm_curve::CurveError;
use crate::eisenstein::EisError;
use crate::measures::MeasureError;
use rug::Rational;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum EfmError {
    #[error("auxiliary ideal fails the coprimality requirements")]
    BadAuxiliaryIdeal,
    #[error("normalization constants from two endomorphisms disagree")]
    NormalizationInconsistent,
    #[error("order did not stabilize across levels: minima {0:?}")]
    NotStabilized(Vec<(u32, Rational)>),
    #[error("hypothesis violated: {0}")]
    HypothesisViolation(String),
    #[error("value not recognized as an exact cyclotomic number")]
    RecognitionFailed,
    #[error("pole met on the sampled torsion")]
    PoleOnTorsion,
    #[error("arithmetic layer: {0}")]
    Arith(#[from] ArithError),
    #[error("curve layer: {0}")]
    Curve(CurveError),
    #[error("series layer: {0}")]
    Eis(EisError),
    #[error("measure layer: {0}")]
    Measure(#[from] MeasureError),
    #[error("invalid input: {0}")]
    Invalid(String),
}

impl From<CurveError> for EfmError {
    fn from(e: CurveError) -> EfmError {
        match e {
            CurveError::PoleAtLatticePoint => EfmError::PoleOnTorsion,
            other => EfmError::Curve(other),
        }
    }
}

impl From<EisError> for EfmError {
    fn from(e: EisError) -> EfmError {
        match e {
            EisError::PoleOrZeroAtPoint => EfmError::PoleOnTorsion,
            other => EfmError::Eis(other),
        }
    }
}

pub type Result<T> = std::result::Result<T, EfmError>;
