//! Hecke characters of the split-prime reference shape and their L-series:
//! direct ideal summation with certified tails, the Eisenstein-series route,
//! algebraic L-values with attached valuations, and the scan over finite
//! twists.

mod charspec;
mod direct;
mod eisen;
mod scan;
mod value;

pub use charspec::{kappa_list, HeckeCharSpec};
pub use direct::{class_sums, imprimitive_l, partial_l_direct, partial_l_from_sums, ClassSums};
pub use eisen::{imprimitive_via_eisenstein, l_via_eisenstein, partials_via_eisenstein, recombine};
pub use scan::{table_csv, table_json, theorem_scan, RouteSel, ScanConfig, ScanRow, ScanTable};
pub use value::{
    alg_l_value, factor_valuation, ord_p_orbit_norm, reinstated_euler_factors, sweep_recognize,
    AlgValue, EulerFactor, ValCertificate,
};

use crate::arith::ArithError;
use crate::cm_curve::CurveError;
use crate::efm::EfmError;
use crate::eisenstein::EisError;
use crate::measures::MeasureError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum LvalError {
    #[error("tail bound exceeds the requested tolerance at this norm bound")]
    TailTooLarge,
    #[error("the value family does not form a full Galois orbit")]
    OrbitIncomplete,
    #[error("orbit norm not recognized as an exact algebraic number")]
    NormNotRecognized,
    #[error("arithmetic layer: {0}")]
    Arith(#[from] ArithError),
    #[error("curve layer: {0}")]
    Curve(#[from] CurveError),
    #[error("series layer: {0}")]
    Eis(#[from] EisError),
    #[error("measure layer: {0}")]
    Measure(#[from] MeasureError),
    #[error("elliptic function layer: {0}")]
    Efm(#[from] EfmError),
    #[error("invalid input: {0}")]
    Invalid(String),
}

pub type Result<T> = std::result::Result<T, LvalError>;
