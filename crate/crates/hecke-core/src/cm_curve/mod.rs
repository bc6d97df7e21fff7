//! CM elliptic curve contexts over the class-number-one fields: period
//! lattices, certified Weierstrass evaluation, q-power torsion through exact
//! lattice coordinates, the endomorphism action, isogenies attached to
//! ideals, and reduction to finite fields.

mod config;
mod ctx;
mod finite;
pub(crate) mod lattice;

pub use config::{parse_curve_config, REFERENCE_CONFIG};
pub use ctx::{eigenbasis, CMCurveCtx, IsogenyData, TorsionPoint};
pub use finite::{reduce_curve, FqCtx, FqElem, FqPoint, ReducedCurve};
pub use lattice::{agm, lattice_invariants, real_root, wp_eval, wp_jet, Lattice};

use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum CurveError {
    #[error("evaluation point lies on the lattice")]
    PoleAtLatticePoint,
    #[error("requested precision not reachable within the row budget")]
    PrecisionExhausted,
    #[error("basis is not positively oriented")]
    BadBasis,
    #[error("prime of bad reduction")]
    BadReduction,
    #[error("torsion field degree exceeds the cap")]
    TorsionNotRational,
    #[error("invalid configuration: {0}")]
    BadConfig(String),
    #[error("invalid input: {0}")]
    Invalid(String),
}

pub type Result<T> = std::result::Result<T, CurveError>;
