//! Log-derivative operators on products of shifted Weierstrass factors, and
//! the cross-identity between the two independent routes to
//! `D_{j,k}(gamma_{b,a})`.
//!
//! With `del = -d/dz`, the `j = 0` operator is
//! `D_{0,k}(f) = del^k log f = (-1)^k (d/dz)^k log f`.  For a product
//! `f(z) = prod_i (wp(c_i z + t_i, L_i) - x_i)^{e_i}` we expand each factor
//! as a jet around `z`, form `f'/f` by power-series division, and read the
//! `k`-th log-derivative off the `eps^{k-1}` coefficient.  Multiplicative
//! constants never enter.

use super::series::{eis_jk_smoothed, EisParams};
use super::{EisError, Result};
use crate::arith::ball::ComplexBall;
use crate::arith::ideal::IdealK;
use crate::arith::quad::QuadElem;
use crate::cm_curve::{wp_eval, wp_jet, CMCurveCtx, IsogenyData, Lattice};
use rug::Rational;

/// One factor `(wp(scale * z + shift, lattice) - pole_x)^exp`.
#[derive(Debug, Clone)]
pub struct LogFactor {
    pub exp: i64,
    pub scale: ComplexBall,
    pub shift: ComplexBall,
    pub pole_x: ComplexBall,
    pub lattice: Lattice,
}

/// `del^k log f(z) = (-1)^k (d/dz)^k log f(z)` for the product `f` described
/// by `factors`.  An empty product (a constant) gives exactly zero.
pub fn djk_via_log_derivative(
    factors: &[LogFactor],
    z: &ComplexBall,
    k: u32,
    prec: u32,
) -> Result<ComplexBall> {
    if k < 1 {
        return Err(EisError::Invalid("k must be >= 1".into()));
    }
    let kk = k as usize;
    let mut h = vec![ComplexBall::zero(prec); kk];
    for f in factors {
        if f.exp == 0 {
            continue;
        }
        let w = f.scale.mul(z).add(&f.shift);
        let jet = wp_jet(&w, &f.lattice, k, prec)?;
        let mut cpow: Vec<ComplexBall> = vec![ComplexBall::one(prec)];
        for i in 1..=kk {
            cpow.push(cpow[i - 1].mul(&f.scale));
        }
        // u(z+eps): den[m] = wp^(m)(w) scale^m / m!, and
        // u'(z+eps):  num[m] = wp^(m+1)(w) scale^{m+1} / m!
        let mut den: Vec<ComplexBall> = Vec::with_capacity(kk);
        let mut num: Vec<ComplexBall> = Vec::with_capacity(kk);
        let mut fact: i64 = 1;
        for m in 0..kk {
            if m >= 1 {
                fact *= m as i64;
            }
            let inv_fact = Rational::from((1, fact));
            den.push(jet[m].mul(&cpow[m]).scale_rational(&inv_fact));
            num.push(jet[m + 1].mul(&cpow[m + 1]).scale_rational(&inv_fact));
        }
        den[0] = den[0].sub(&f.pole_x);
        if den[0].contains_zero() {
            return Err(EisError::PoleOrZeroAtPoint);
        }
        let d0i = den[0].inv();
        let mut q: Vec<ComplexBall> = Vec::with_capacity(kk);
        for i in 0..kk {
            let mut t = num[i].clone();
            for s in 1..=i {
                t = t.sub(&den[s].mul(&q[i - s]));
            }
            q.push(t.mul(&d0i));
        }
        for i in 0..kk {
            h[i] = h[i].add(&q[i].scale_i64(f.exp));
        }
    }
    // (d/dz)^k log f = (k-1)! [eps^{k-1}] (f'/f)(z+eps)
    let mut fact: i64 = 1;
    for i in 2..k as i64 {
        fact *= i;
    }
    let sign = if k % 2 == 0 { 1 } else { -1 };
    Ok(h[kk - 1].scale_i64(sign * fact))
}

/// Representatives of the nonzero `a`-division classes modulo negation:
/// `r` runs over `O/(alpha)`, nonzero, with `r ~ -r` collapsed.
fn division_reps(a: &IdealK) -> Vec<QuadElem> {
    let alpha = a.gen.clone();
    let field = alpha.field;
    let na = a.norm();
    let mut reps: Vec<QuadElem> = Vec::new();
    for m in 0..na {
        for n in 0..na {
            let r = QuadElem::new(field, m, n);
            if alpha.divides(&r) {
                continue;
            }
            let dup = reps
                .iter()
                .any(|s| alpha.divides(&r.sub(s)) || alpha.divides(&r.add(s)));
            if !dup {
                reps.push(r);
            }
        }
    }
    reps
}

/// The factor list of `zeta_{b,a}(P) = prod_Q (x(P) - x(Q))^{-1}`, `Q` over
/// the nonzero `a`-division points of the curve attached to `L_b`, one per
/// `{Q, -Q}` pair.
pub fn zeta_log_factors(ctx: &CMCurveCtx, l_b: &Lattice, a: &IdealK) -> Result<Vec<LogFactor>> {
    let prec = ctx.prec;
    let alpha_emb = a.gen.embed(prec);
    let mut out = Vec::new();
    for r in division_reps(a) {
        let z_q = l_b.w2.mul(&r.embed(prec)).div(&alpha_emb);
        let (x_q, _) = wp_eval(&z_q, l_b, prec)?;
        out.push(LogFactor {
            exp: -1,
            scale: ComplexBall::one(prec),
            shift: ComplexBall::zero(prec),
            pole_x: x_q,
            lattice: l_b.clone(),
        });
    }
    Ok(out)
}

/// Residual of the identity `D_{j,k}(gamma_{b,a})(P) = -E_{j,k}(z; L_b, a)`
/// at `z`, i.e. `D_{j,k}(gamma_{b,a}) + E_{j,k}(z; L_b, a)`.
///
/// For `j = 0` the left side is evaluated independently through the
/// log-derivative of the explicit product (the normalizing constant of
/// `gamma` drops out), so the residual ball must contain zero.  For `j < 0`
/// the left side is defined through the right side and the residual is
/// exactly zero by construction.
pub fn cross_check_djk(
    ctx: &CMCurveCtx,
    b: &IdealK,
    a: &IdealK,
    z: &ComplexBall,
    j: i32,
    k: u32,
) -> Result<ComplexBall> {
    let prec = ctx.prec;
    let iso = IsogenyData::new(ctx, b.clone())?;
    let l_b = iso.target;
    if j < 0 {
        // evaluate the defining side to surface errors, then report the
        // definitional zero residual
        let p = EisParams::new(z.clone(), l_b, j, k)?;
        eis_jk_smoothed(&p, a, prec)?;
        return Ok(ComplexBall::zero(prec));
    }
    let factors = zeta_log_factors(ctx, &l_b, a)?;
    let d = djk_via_log_derivative(&factors, z, k, prec)?;
    let p = EisParams::new(z.clone(), l_b, j, k)?;
    let e = eis_jk_smoothed(&p, a, prec)?;
    Ok(d.add(&e))
}
