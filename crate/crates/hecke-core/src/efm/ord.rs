//! p-adic order of a rational function: the minimum valuation of its values
//! on q-power torsion.  Individual values on torsion live in ray class
//! fields that are not abelian over Q, so they are not recognizable one by
//! one; instead the function is reduced at the pinned prime and evaluated on
//! the reduced torsion.  A nonzero reduced value certifies a sample of
//! valuation exactly zero, which pins the minimum; when every sample reduces
//! to zero only a lower bound is known and the computation reports failure
//! to stabilize rather than a guess.

use super::modp::{nonzero_torsion, reduce_ratfn};
use super::ratfn::{RatFnForm, RatFnProduct};
use super::{EfmError, Result};
use crate::arith::ball::ComplexBall;
use crate::arith::prime::{PrimeContext, Valuation};
use crate::arith::recognize::{recognize_cyclotomic, recognize_rational};
use crate::cm_curve::CMCurveCtx;
use rug::Rational;

#[derive(Debug, Clone)]
pub struct OrdReport {
    pub ord: Rational,
    /// (level, minimum over that level's samples).
    pub level_minima: Vec<(u32, Rational)>,
    /// How many top-level samples attain the reported order.
    pub attained: usize,
    pub sampled: usize,
}

fn try_recognized_valuation(
    pctx: &PrimeContext,
    ball: &ComplexBall,
    orders: &[u64],
    den_bound: i64,
) -> Option<Valuation> {
    if let Ok(r) = recognize_rational(ball, den_bound) {
        return Some(pctx.val_rational(&r));
    }
    for &n in orders {
        if let Ok(c) = recognize_cyclotomic(ball, n, den_bound) {
            if let Ok(v) = pctx.cyc_valuation(&c) {
                return Some(v);
            }
        }
    }
    None
}

/// Minimum valuation of `R` over the full torsion at the given levels.  The
/// multiplicative constant is recognized exactly and its valuation added;
/// the rest of the function is settled through the finite-field reduction,
/// so the reported order is certified whenever it is reported at all.
pub fn ord_pi_ratfn(
    ctx: &CMCurveCtx,
    r: &RatFnProduct,
    pctx: &PrimeContext,
    levels: &[u32],
    den_bound: i64,
) -> Result<OrdReport> {
    if levels.is_empty() {
        return Err(EfmError::Invalid("need at least one sample level".into()));
    }
    let mut base = Rational::new();
    if let Some(c) = &r.constant {
        let v = try_recognized_valuation(pctx, c, &[4, 8], den_bound)
            .ok_or(EfmError::RecognitionFailed)?;
        match v {
            Valuation::Infinite => {
                return Err(EfmError::Invalid("the function is identically zero".into()))
            }
            Valuation::Finite(x) => base = x,
        }
    }
    if let RatFnForm::Product { factors, .. } = &r.form {
        if factors.is_empty() {
            // a constant: every value has the constant's valuation
            return Ok(OrdReport {
                ord: base.clone(),
                level_minima: levels.iter().map(|&m| (m, base.clone())).collect(),
                attained: 1,
                sampled: 1,
            });
        }
    }
    let stripped = RatFnProduct { constant: None, form: r.form.clone() };
    let mut level_minima: Vec<(u32, Rational)> = Vec::new();
    let mut attained = 0usize;
    let mut sampled = 0usize;
    for &m in levels {
        let rr = reduce_ratfn(ctx, &stripped, pctx, m, 64, den_bound)?;
        let mut nonzero = 0usize;
        let mut total = 0usize;
        for (_, pt) in nonzero_torsion(&rr.red) {
            let v = rr.eval(&pt)?;
            total += 1;
            if !rr.red.fq.is_zero(&v) {
                nonzero += 1;
            }
        }
        if nonzero == 0 {
            // every reduced value vanished: only ord >= base + 1 is known
            level_minima.push((m, base.clone() + Rational::from(1)));
            return Err(EfmError::NotStabilized(level_minima));
        }
        level_minima.push((m, base.clone()));
        attained = nonzero;
        sampled = total;
    }
    Ok(OrdReport { ord: base, level_minima, attained, sampled })
}
