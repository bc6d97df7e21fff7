//! Workbench for studying p-adic valuations of Hecke L-values over
//! imaginary quadratic fields of class number one.
//!
//! The library is organised in layers:
//!
//! * [`arith`] — exact arithmetic: quadratic integers, principal ideals,
//!   cyclotomic field elements, certified complex ball arithmetic, and
//!   valuations at a chosen prime above `p`.
//! * [`measures`] — finite-level measures on `Z_q^2`, Fourier and Gamma
//!   transforms, unit actions and the beta construction.
//! * [`cm_curve`] — CM elliptic curve contexts: period lattices, the
//!   Weierstrass functions with certified tails, q-power torsion,
//!   endomorphism action, isogenies and finite-field reduction.
//! * [`eisenstein`] — Eisenstein–Kronecker series and the log-derivative
//!   operators acting on rational functions of the curve.
//! * [`efm`] — elliptic rational functions (the zeta/gamma products and the
//!   theta sums) and the bridge from rational functions to measures.
//! * [`lvalues`] — Hecke L-series by direct ideal summation and by the
//!   Eisenstein route, algebraic L-values, orbit-norm valuations, and the
//!   valuation scan driver.
//! * [`density`] — finite-level character grids, Diophantine approximation,
//!   and exhaustive independence testing over finite fields.

pub mod arith;
pub mod cm_curve;
pub mod density;
pub mod efm;
pub mod eisenstein;
pub mod lvalues;
pub mod measures;
