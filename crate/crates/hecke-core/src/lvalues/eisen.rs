//! The Eisenstein route to partial L-values.  At class number one with
//! [R(f) : K] = 1 the partial series collapses to a single lattice sum:
//!
//!   L_h(phibar^(k-j), k, tau_c)
//!     = rho^(k-j) (2 pi / (Nh sqrt(d)))^j E_{j,k}(gamma rho, L) / (k-1)!
//!
//! with rho = Omega / alpha for any generator alpha of h and gamma the
//! normalized generator of a representative of the class.  The choice of
//! alpha and gamma drops out: replacing either by a unit multiple u scales
//! E_{j,k} by conj(u)^(k-j), which cancels against rho^(k-j).

use super::charspec::HeckeCharSpec;
use super::Result;
use crate::arith::ball::{ComplexBall, RealBall};
use crate::cm_curve::CMCurveCtx;
use crate::eisenstein::{eis_jk, EisParams};
use rug::Rational;

fn factorial(n: u32) -> Rational {
    let mut r = Rational::from(1);
    for i in 2..=n {
        r *= i;
    }
    r
}

/// The scalar in front of the Eisenstein value, shared by every class:
/// rho^(k-j) (2 pi / (Nh sqrt|d|))^j / (k-1)!.
fn prefactor(ctx: &CMCurveCtx, spec: &HeckeCharSpec, rho: &ComplexBall, prec: u32) -> ComplexBall {
    let two_pi = ComplexBall::from_re_im(RealBall::pi(prec).mul_i64(2), RealBall::zero(prec), prec);
    let nh = ComplexBall::from_i128(spec.h_ideal().norm(), prec);
    let root = ComplexBall::from_re_im(
        RealBall::from_i64(-ctx.field.disc, prec).sqrt(),
        RealBall::zero(prec),
        prec,
    );
    let weight = two_pi.div(&nh.mul(&root)).powi(spec.j);
    rho.powi(spec.w() as i32)
        .mul(&weight)
        .scale_rational(&(Rational::from(1) / factorial(spec.k - 1)))
}

/// Partial L-value of one class through the Eisenstein series.
pub fn l_via_eisenstein(
    ctx: &CMCurveCtx,
    spec: &HeckeCharSpec,
    tau_c: (u64, u64),
    prec: u32,
) -> Result<ComplexBall> {
    let alpha = spec.h_gen().embed(prec);
    let omega = ComplexBall::from_re_im(ctx.omega.clone(), RealBall::zero(prec), prec);
    let rho = omega.div(&alpha);
    let gamma = spec.class_generator(tau_c)?;
    let z = gamma.embed(prec).mul(&rho);
    let params = EisParams::new(z, ctx.lattice.clone(), spec.j, spec.k)?;
    let e = eis_jk(&params, prec)?;
    Ok(prefactor(ctx, spec, &rho, prec).mul(&e))
}

/// Partial values for every class, in the canonical class order.  These do
/// not depend on kappa, only on the level, so one table serves all twists.
pub fn partials_via_eisenstein(
    ctx: &CMCurveCtx,
    spec: &HeckeCharSpec,
) -> Result<Vec<((u64, u64), ComplexBall)>> {
    let prec = spec.prec;
    let alpha = spec.h_gen().embed(prec);
    let omega = ComplexBall::from_re_im(ctx.omega.clone(), RealBall::zero(prec), prec);
    let rho = omega.div(&alpha);
    let pref = prefactor(ctx, spec, &rho, prec);
    let mut out = Vec::new();
    for c in spec.classes() {
        let gamma = spec.class_generator(c)?;
        let z = gamma.embed(prec).mul(&rho);
        let params = EisParams::new(z, ctx.lattice.clone(), spec.j, spec.k)?;
        let e = eis_jk(&params, prec)?;
        out.push((c, pref.mul(&e)));
    }
    Ok(out)
}

/// upsilonbar-weighted recombination of partial values into the imprimitive
/// series of phibar^(k-j) kappabar.
pub fn recombine(
    spec: &HeckeCharSpec,
    partials: &[((u64, u64), ComplexBall)],
) -> Result<ComplexBall> {
    let prec = partials
        .first()
        .map(|(_, b)| b.prec())
        .unwrap_or(spec.prec);
    let mut acc = ComplexBall::zero(prec);
    for (c, ball) in partials {
        let u = spec.upsilon(*c)?.inv();
        acc = acc.add(&ball.mul(&ComplexBall::root_of_unity(u.exp as i64, u.order, prec)));
    }
    Ok(acc)
}

/// The imprimitive L-value at s = k via the Eisenstein route.
pub fn imprimitive_via_eisenstein(ctx: &CMCurveCtx, spec: &HeckeCharSpec) -> Result<ComplexBall> {
    let partials = partials_via_eisenstein(ctx, spec)?;
    recombine(spec, &partials)
}
