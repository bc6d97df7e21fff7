//! Rational functions on the curve, in two evaluable shapes: pure products
//! of shifted Weierstrass factors (zeta and gamma), and formal sums of
//! log-derivative images (theta).  Arguments are exact lattice coordinates,
//! so the group theory stays exact and only the evaluation is a ball.

use super::{EfmError, Result};
use crate::arith::ball::ComplexBall;
use crate::arith::cyc::CycElem;
use crate::arith::ideal::IdealK;
use crate::arith::quad::QuadElem;
use crate::cm_curve::{wp_eval, CMCurveCtx, IsogenyData, Lattice};
use crate::eisenstein::{djk_via_log_derivative, zeta_log_factors, LogFactor};
use rug::Rational;

/// One factor `(x(P + T) - pole_x)^exp`; `(t1, t2)` are the lattice
/// coordinates of the translate `T`.
#[derive(Debug, Clone)]
pub struct ProductFactor {
    pub t1: Rational,
    pub t2: Rational,
    pub exp: i64,
    pub pole_x: ComplexBall,
}

/// One summand of a theta sum: `coeff * D_{j,k}(gamma_{b,a})` composed with
/// the isogeny `z -> lambda z` and the translate `V` at `(v1, v2)`.
#[derive(Debug, Clone)]
pub struct DjkTerm {
    pub coeff: CycElem,
    pub lambda: QuadElem,
    pub v1: Rational,
    pub v2: Rational,
    pub factors: Vec<LogFactor>,
}

#[derive(Debug, Clone)]
pub enum RatFnForm {
    Product { lattice: Lattice, factors: Vec<ProductFactor> },
    ThetaSum { a: IdealK, j: i32, k: u32, terms: Vec<DjkTerm> },
}

#[derive(Debug, Clone)]
pub struct RatFnProduct {
    /// An overall multiplicative constant; `None` means 1.
    pub constant: Option<ComplexBall>,
    pub form: RatFnForm,
}

impl RatFnProduct {
    /// The constant function `c` (an empty product).
    pub fn constant_fn(c: ComplexBall, lattice: Lattice) -> RatFnProduct {
        RatFnProduct {
            constant: Some(c),
            form: RatFnForm::Product { lattice, factors: Vec::new() },
        }
    }

    /// Evaluate at the point with lattice coordinates `(r1, r2)` (on the
    /// product's own lattice for the product form, on the base lattice for
    /// theta sums).
    pub fn eval(&self, ctx: &CMCurveCtx, r1: &Rational, r2: &Rational) -> Result<ComplexBall> {
        let prec = ctx.prec;
        let mut acc = match &self.form {
            RatFnForm::Product { lattice, factors } => {
                let mut acc = ComplexBall::one(prec);
                for f in factors {
                    let s1 = Rational::from(r1 + &f.t1);
                    let s2 = Rational::from(r2 + &f.t2);
                    if s1.is_integer() && s2.is_integer() {
                        // x has a pole at the origin, so the factor is not
                        // representable there
                        return Err(EfmError::PoleOnTorsion);
                    }
                    let z = lattice.point(&s1, &s2);
                    let (x, _) = wp_eval(&z, lattice, prec)?;
                    let diff = x.sub(&f.pole_x);
                    if f.exp < 0 && diff.contains_zero() {
                        return Err(EfmError::PoleOnTorsion);
                    }
                    let e: i32 = f
                        .exp
                        .try_into()
                        .map_err(|_| EfmError::Invalid("exponent overflow".into()))?;
                    acc = acc.mul(&diff.powi(e));
                }
                acc
            }
            RatFnForm::ThetaSum { j, k, terms, .. } => {
                if *j != 0 {
                    return Err(EfmError::Invalid(
                        "theta evaluation through log-derivatives needs j = 0".into(),
                    ));
                }
                let mut acc = ComplexBall::zero(prec);
                for t in terms {
                    let s1 = Rational::from(r1 + &t.v1);
                    let s2 = Rational::from(r2 + &t.v2);
                    let z = ctx.lattice.point(&s1, &s2);
                    let w = z.mul(&t.lambda.embed(prec));
                    let d = djk_via_log_derivative(&t.factors, &w, *k, prec)?;
                    acc = acc.add(&t.coeff.embed(prec).mul(&d));
                }
                acc
            }
        };
        if let Some(c) = &self.constant {
            acc = acc.mul(c);
        }
        Ok(acc)
    }
}

/// Coordinates of the full kernel `E[beta]` (including the origin):
/// the `(s/N, t/N)` grid points killed by multiplication by `beta`.
pub fn kernel_coords(ctx: &CMCurveCtx, beta: &QuadElem) -> Vec<(Rational, Rational)> {
    let n = beta.norm();
    let mut out = Vec::new();
    for s in 0..n {
        for t in 0..n {
            let r1 = Rational::from((s, n));
            let r2 = Rational::from((t, n));
            let (f1, f2) = ctx.endo_coords(beta, &r1, &r2);
            if f1 == 0 && f2 == 0 {
                out.push((r1, r2));
            }
        }
    }
    out
}

/// `zeta_{b,a}(P) = prod_Q (x(P) - x(Q))^{-1}`, `Q` over representatives of
/// the nonzero `a`-division points of the curve attached to `b`, one per
/// `{Q, -Q}` pair: `(N(a) - 1)/2` factors.
pub fn zeta_fn(ctx: &CMCurveCtx, b: &IdealK, a: &IdealK) -> Result<RatFnProduct> {
    let six = IdealK::new(QuadElem::new(ctx.field, 6, 0));
    if !a.coprime(&six) || !a.coprime(&ctx.conductor) || !a.coprime(b) {
        return Err(EfmError::BadAuxiliaryIdeal);
    }
    let iso = IsogenyData::new(ctx, b.clone())?;
    let logs = zeta_log_factors(ctx, &iso.target, a)?;
    let expected = ((a.norm() - 1) / 2) as usize;
    if logs.len() != expected {
        return Err(EfmError::Invalid("division representative count mismatch".into()));
    }
    let factors = logs
        .into_iter()
        .map(|lf| ProductFactor {
            t1: Rational::new(),
            t2: Rational::new(),
            exp: -1,
            pole_x: lf.pole_x,
        })
        .collect();
    Ok(RatFnProduct { constant: None, form: RatFnForm::Product { lattice: iso.target, factors } })
}

/// The ratio `f(beta P0) / prod_{R in ker beta} f(P0 + R)` at a fixed
/// generic point `P0`.
fn dist_ratio(
    ctx: &CMCurveCtx,
    f: &RatFnProduct,
    beta: &QuadElem,
    p0: &(Rational, Rational),
) -> Result<ComplexBall> {
    let (b1, b2) = ctx.endo_coords(beta, &p0.0, &p0.1);
    let num = f.eval(ctx, &b1, &b2)?;
    let mut den = ComplexBall::one(ctx.prec);
    for (k1, k2) in kernel_coords(ctx, beta) {
        let s1 = Rational::from(&p0.0 + &k1);
        let s2 = Rational::from(&p0.1 + &k2);
        den = den.mul(&f.eval(ctx, &s1, &s2)?);
    }
    Ok(num.div(&den))
}

/// `gamma_{b,a} = c * zeta_{b,a}` with the constant pinned by the
/// distribution relation `gamma(beta P) = prod_{R in ker beta} gamma(P + R)`
/// for `beta = 1 + tau` (norm 2, so `c` is the ratio itself).  A second
/// endomorphism `beta = 2` cross-checks `|c|`; the residual root-of-unity
/// ambiguity is harmless because log-derivatives kill constants.
pub fn gamma_fn(ctx: &CMCurveCtx, b: &IdealK, a: &IdealK) -> Result<RatFnProduct> {
    let zeta = zeta_fn(ctx, b, a)?;
    let beta1 = QuadElem::new(ctx.field, 1, 1);
    if beta1.norm() != 2 {
        return Err(EfmError::Invalid("normalization assumes a norm-2 endomorphism".into()));
    }
    let p0 = (Rational::from((1, 7)), Rational::from((2, 11)));
    let c = dist_ratio(ctx, &zeta, &beta1, &p0)?;

    let beta2 = QuadElem::new(ctx.field, 2, 0);
    let r2 = dist_ratio(ctx, &zeta, &beta2, &p0)?;
    // c^(N beta2 - 1) must match r2 up to a root of unity
    let check = c.powi((beta2.norm() - 1) as i32).div(&r2).abs();
    if !check.sub(&crate::arith::ball::RealBall::from_i64(1, ctx.prec)).contains_zero() {
        return Err(EfmError::NormalizationInconsistent);
    }

    Ok(RatFnProduct { constant: Some(c), form: zeta.form })
}
