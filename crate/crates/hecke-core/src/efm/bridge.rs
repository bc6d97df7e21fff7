//! From rational functions to finite measures: the Fourier values of an
//! elliptic function measure are the function's values at torsion points
//! through the eigenbasis splitting, so inverting the transform on exact
//! recognized values produces the measure.

use super::ratfn::RatFnProduct;
use super::{EfmError, Result};
use crate::arith::cyc::CycElem;
use crate::arith::quad::QuadElem;
use crate::arith::recognize::recognize_cyclotomic;
use crate::arith::ArithError;
use crate::cm_curve::{eigenbasis, CMCurveCtx};
use crate::measures::{measure_from_fourier, FiniteMeasure};
use rug::Rational;
use std::collections::HashMap;

fn frac(r: Rational) -> Rational {
    let fl = r.clone().floor();
    r - fl
}

/// The eigenbasis coordinates realizing `delta`: `(P1, P2)` with `P1` of
/// order `q^level.0` on the nu side and `P2` of order `q^level.1` on the
/// conjugate side, so that `delta(zeta1^x1, zeta2^x2) = x1 P1 + x2 P2`.
pub fn delta_basis(
    ctx: &CMCurveCtx,
    level: (u32, u32),
) -> Result<((Rational, Rational), (Rational, Rational))> {
    let nu = QuadElem::new(ctx.field, 2, 1);
    let top = level.0.max(level.1).max(1);
    let (p1, p2) = eigenbasis(ctx, &nu, top)?;
    let d1 = Rational::from(ctx.q.pow(top - level.0));
    let d2 = Rational::from(ctx.q.pow(top - level.1));
    Ok((
        (frac(p1.r1 * d1.clone()), frac(p1.r2 * d1)),
        (frac(p2.r1 * d2.clone()), frac(p2.r2 * d2)),
    ))
}

/// The finite measure whose Fourier transform at `(zeta1^x1, zeta2^x2)` is
/// `R(x1 P1 + x2 P2)`, with values recognized in `Q(zeta_cyc_order)`.  The
/// trivial character points at the origin; when `R` has a pole there the
/// trivial Fourier value is taken to be 0 (the measure is then determined
/// only up to a multiple of Haar mass, which is the standard convention for
/// functions with a polar part at the origin).
pub fn measure_of_ratfn(
    ctx: &CMCurveCtx,
    r: &RatFnProduct,
    level: (u32, u32),
    cyc_order: u64,
    den_bound: i64,
) -> Result<FiniteMeasure> {
    let (b1, b2) = delta_basis(ctx, level)?;
    let qm = ctx.q.pow(level.0);
    let qn = ctx.q.pow(level.1);
    let mut table: HashMap<(u64, u64), CycElem> = HashMap::new();
    for x1 in 0..qm {
        for x2 in 0..qn {
            let (c1, c2) = (Rational::from(x1), Rational::from(x2));
            let r1 = frac(b1.0.clone() * c1.clone() + b2.0.clone() * c2.clone());
            let r2 = frac(b1.1.clone() * c1 + b2.1.clone() * c2);
            if r1 == 0 && r2 == 0 {
                let v = match r.eval(ctx, &r1, &r2) {
                    Ok(ball) => recognize(&ball, cyc_order, den_bound)?,
                    Err(EfmError::PoleOnTorsion) => CycElem::zero(1),
                    Err(e) => return Err(e),
                };
                table.insert((x1, x2), v);
                continue;
            }
            let ball = r.eval(ctx, &r1, &r2)?;
            table.insert((x1, x2), recognize(&ball, cyc_order, den_bound)?);
        }
    }
    Ok(measure_from_fourier(ctx.q, level, &table)?)
}

fn recognize(ball: &crate::arith::ball::ComplexBall, n: u64, den_bound: i64) -> Result<CycElem> {
    match recognize_cyclotomic(ball, n, den_bound) {
        Ok(v) => Ok(v),
        Err(ArithError::RecognitionFailed) => Err(EfmError::RecognitionFailed),
        Err(e) => Err(EfmError::Arith(e)),
    }
}
