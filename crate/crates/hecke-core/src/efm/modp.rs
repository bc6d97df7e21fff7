//! Evaluation of a rational function after reduction at the pinned prime
//! above p.  The divisor data (pole x-coordinates grouped into a Galois
//! stable polynomial, translate points, coefficients) is recognized exactly
//! in Q(i) and pushed onto the reduced curve; values on reduced torsion are
//! then computed by truncated jets over F_{p^r}.
//!
//! A nonzero reduced value certifies that the sample has order exactly zero
//! at the prime; a zero value only bounds the order below by one.  The
//! identification of complex torsion with reduced torsion is not pinned
//! down, which is harmless for sums and minima over full torsion levels.

use super::ratfn::{RatFnForm, RatFnProduct};
use super::{EfmError, Result};
use crate::arith::ball::ComplexBall;
use crate::arith::cyc::CycElem;
use crate::arith::prime::PrimeContext;
use crate::arith::recognize::recognize_cyclotomic;
use crate::arith::ArithError;
use crate::cm_curve::{reduce_curve, wp_eval, CMCurveCtx, FqCtx, FqElem, FqPoint, ReducedCurve};
use rug::ops::RemRounding;
use rug::{Integer, Rational};
use std::collections::BTreeMap;

fn rational_fq(fq: &FqCtx, r: &Rational) -> Result<FqElem> {
    let l = Integer::from(fq.l);
    let num = r
        .numer()
        .clone()
        .rem_euc(l.clone())
        .to_u64()
        .ok_or_else(|| EfmError::Invalid("residue out of range".into()))?;
    let den = r
        .denom()
        .clone()
        .rem_euc(l)
        .to_u64()
        .ok_or_else(|| EfmError::Invalid("residue out of range".into()))?;
    let d = fq.from_u64(den);
    if fq.is_zero(&d) {
        return Err(EfmError::Invalid("denominator not a unit at p".into()));
    }
    Ok(fq.mul(&fq.from_u64(num), &fq.inv(&d)?))
}

fn cyc_fq(fq: &FqCtx, iota: &Option<FqElem>, c: &CycElem) -> Result<FqElem> {
    match c.order {
        1 | 2 => rational_fq(fq, &c.coeffs[0]),
        4 => {
            let i = iota
                .as_ref()
                .ok_or_else(|| EfmError::Invalid("no square root of -1 available".into()))?;
            let c0 = rational_fq(fq, &c.coeffs[0])?;
            let c1 = rational_fq(fq, &c.coeffs[1])?;
            Ok(fq.add(&c0, &fq.mul(&c1, i)))
        }
        _ => Err(EfmError::Invalid("coefficient order not supported in reduction".into())),
    }
}

fn recognize_gauss(ball: &ComplexBall, den_bound: i64) -> Result<CycElem> {
    match recognize_cyclotomic(ball, 4, den_bound) {
        Ok(v) => Ok(v),
        Err(ArithError::RecognitionFailed) => Err(EfmError::RecognitionFailed),
        Err(e) => Err(EfmError::Arith(e)),
    }
}

fn poly_deriv(fq: &FqCtx, f: &[FqElem]) -> Vec<FqElem> {
    if f.len() <= 1 {
        return vec![fq.zero()];
    }
    f.iter().enumerate().skip(1).map(|(i, c)| fq.scalar(c, i as u64)).collect()
}

fn poly_eval(fq: &FqCtx, f: &[FqElem], x: &FqElem) -> FqElem {
    let mut acc = fq.zero();
    for c in f.iter().rev() {
        acc = fq.add(&fq.mul(&acc, x), c);
    }
    acc
}

fn series_mul(fq: &FqCtx, a: &[FqElem], b: &[FqElem], len: usize) -> Vec<FqElem> {
    let mut out = vec![fq.zero(); len];
    for (i, x) in a.iter().enumerate() {
        if i >= len || fq.is_zero(x) {
            continue;
        }
        for (j, y) in b.iter().enumerate() {
            if i + j >= len {
                break;
            }
            out[i + j] = fq.add(&out[i + j], &fq.mul(x, y));
        }
    }
    out
}

/// `poly(u(eps))` truncated to the given length; `u` is a jet with constant
/// term `u[0]`.
fn compose_series(fq: &FqCtx, poly: &[FqElem], u: &[FqElem], len: usize) -> Vec<FqElem> {
    let mut res = vec![fq.zero(); len];
    for c in poly.iter().rev() {
        res = series_mul(fq, &res, u, len);
        res[0] = fq.add(&res[0], c);
    }
    res
}

/// Derivative polynomials of `wp` on `Y^2 = X^3 + aX + b`: index m gives
/// `wp^(m)` as a polynomial in `X` for even m, and as that polynomial times
/// `wp'` for odd m, from `wp'' = 6X^2 + 2a` and `(wp')^2 = 4(X^3 + aX + b)`.
fn wp_deriv_polys(fq: &FqCtx, a: &FqElem, b: &FqElem, upto: usize) -> Vec<Vec<FqElem>> {
    let s = vec![fq.scalar(b, 4), fq.scalar(a, 4), fq.zero(), fq.from_u64(4)];
    let t = vec![fq.scalar(a, 2), fq.zero(), fq.from_u64(6)];
    let mut out: Vec<Vec<FqElem>> = vec![vec![fq.zero(), fq.from_u64(1)]];
    for m in 1..=upto {
        let prev = &out[m - 1];
        if m % 2 == 1 {
            out.push(poly_deriv(fq, prev));
        } else {
            let dp = poly_deriv(fq, prev);
            let mut next = series_mul(fq, &dp, &s, dp.len() + s.len());
            let bt = series_mul(fq, prev, &t, prev.len() + t.len());
            if next.len() < bt.len() {
                next.resize(bt.len(), fq.zero());
            }
            for (i, c) in bt.iter().enumerate() {
                next[i] = fq.add(&next[i], c);
            }
            out.push(next);
        }
    }
    out
}

struct RedTerm {
    coeff: FqElem,
    lambda: (i128, i128),
    v: FqPoint,
    /// `(exp, monic polynomial)`: the factors with a common exponent grouped
    /// into one Galois stable polynomial in `x`.
    polys: Vec<(i64, Vec<FqElem>)>,
}

/// A rational function pushed onto the reduced curve at the prime of the
/// given `PrimeContext`, evaluable on the reduced q-power torsion.
pub struct ReducedRatFn {
    pub red: ReducedCurve,
    iota: Option<FqElem>,
    /// `None` for a plain product value, `Some(k)` for the k-th
    /// log-derivative of a theta sum.
    k: Option<u32>,
    group_order: u128,
    constant: Option<FqElem>,
    terms: Vec<RedTerm>,
}

fn divisor_polys(
    fq: &FqCtx,
    iota: &Option<FqElem>,
    pairs: Vec<(i64, ComplexBall)>,
    den_bound: i64,
) -> Result<Vec<(i64, Vec<FqElem>)>> {
    let mut groups: BTreeMap<i64, Vec<ComplexBall>> = BTreeMap::new();
    for (e, root) in pairs {
        if e != 0 {
            groups.entry(e).or_default().push(root);
        }
    }
    let mut out = Vec::new();
    for (e, roots) in groups {
        let prec = roots[0].prec();
        let mut coeffs = vec![ComplexBall::one(prec)];
        for r in &roots {
            let mut next = vec![ComplexBall::zero(prec); coeffs.len() + 1];
            for (i, c) in coeffs.iter().enumerate() {
                next[i + 1] = next[i + 1].add(c);
                next[i] = next[i].sub(&c.mul(r));
            }
            coeffs = next;
        }
        let mut poly = Vec::with_capacity(coeffs.len());
        for c in &coeffs {
            poly.push(cyc_fq(fq, iota, &recognize_gauss(c, den_bound)?)?);
        }
        out.push((e, poly));
    }
    Ok(out)
}

/// The reduced translate point: `wp` and `wp'` at the lattice coordinates
/// are recognized in Q(i) and reduced, with `Y = y/2`.
fn reduce_translate(
    ctx: &CMCurveCtx,
    red: &ReducedCurve,
    iota: &Option<FqElem>,
    v1: &Rational,
    v2: &Rational,
    den_bound: i64,
) -> Result<FqPoint> {
    if v1.is_integer() && v2.is_integer() {
        return Ok(None);
    }
    let z = ctx.lattice.point(v1, v2);
    let (x, y) = wp_eval(&z, &ctx.lattice, ctx.prec)?;
    let fq = &red.fq;
    let xr = cyc_fq(fq, iota, &recognize_gauss(&x, den_bound)?)?;
    let yr = cyc_fq(fq, iota, &recognize_gauss(&y, den_bound)?)?;
    let half = fq.inv(&fq.from_u64(2))?;
    let pt = Some((xr, fq.mul(&yr, &half)));
    if !red.on_curve(&pt) {
        return Err(EfmError::Invalid("translate does not reduce onto the curve".into()));
    }
    Ok(pt)
}

/// Prepare `r` for evaluation on the reduced `E[q^level]`.  Product factors
/// must be untranslated and theta terms must carry a unit isogeny scalar;
/// everything that has to be exact is recognized in Q(i), so a function
/// whose divisor is not rational over K is reported as unrecognizable.
pub fn reduce_ratfn(
    ctx: &CMCurveCtx,
    r: &RatFnProduct,
    pctx: &PrimeContext,
    level: u32,
    r_cap: u32,
    den_bound: i64,
) -> Result<ReducedRatFn> {
    let red = reduce_curve(ctx, pctx.p, level, r_cap)?;
    let fq = red.fq.clone();
    let iota = if ctx.field.disc == -4 {
        let cand = fq.from_u64(pctx.r_tau % pctx.p);
        if fq.mul(&cand, &cand) != fq.neg(&fq.one()) {
            return Err(EfmError::Invalid("tau residue is not a square root of -1".into()));
        }
        Some(cand)
    } else {
        None
    };
    let group_order = red.frob.pow(red.r).sub(&ctx.field.one()).norm().unsigned_abs();
    if group_order > i128::MAX as u128 {
        return Err(EfmError::Invalid("reduced group too large".into()));
    }
    let constant = match &r.constant {
        None => None,
        Some(c) => Some(cyc_fq(&fq, &iota, &recognize_gauss(c, den_bound)?)?),
    };
    let (k, terms) = match &r.form {
        RatFnForm::Product { factors, .. } => {
            let mut pairs = Vec::new();
            for f in factors {
                if f.t1 != 0 || f.t2 != 0 {
                    return Err(EfmError::Invalid(
                        "translated product factors not supported in reduction".into(),
                    ));
                }
                pairs.push((f.exp, f.pole_x.clone()));
            }
            let polys = divisor_polys(&fq, &iota, pairs, den_bound)?;
            (None, vec![RedTerm { coeff: fq.one(), lambda: (1, 0), v: None, polys }])
        }
        RatFnForm::ThetaSum { j, k, terms, .. } => {
            if *j != 0 {
                return Err(EfmError::Invalid("reduction route needs j = 0".into()));
            }
            let mut out = Vec::new();
            for t in terms {
                if t.lambda.norm().unsigned_abs() != 1 {
                    return Err(EfmError::Invalid(
                        "isogeny-scaled terms not supported in reduction".into(),
                    ));
                }
                if t.lambda.b != 0 && !fq.is_zero(&red.b) {
                    return Err(EfmError::Invalid(
                        "tau action needs the reduced curve in the form Y^2 = X^3 + aX".into(),
                    ));
                }
                let pairs = t.factors.iter().map(|lf| (lf.exp, lf.pole_x.clone())).collect();
                out.push(RedTerm {
                    coeff: cyc_fq(&fq, &iota, &t.coeff)?,
                    lambda: (t.lambda.a, t.lambda.b),
                    v: reduce_translate(ctx, &red, &iota, &t.v1, &t.v2, den_bound)?,
                    polys: divisor_polys(&fq, &iota, pairs, den_bound)?,
                });
            }
            (Some(*k), out)
        }
    };
    Ok(ReducedRatFn { red, iota, k, group_order, constant, terms })
}

impl ReducedRatFn {
    fn apply_lambda(&self, lam: &(i128, i128), p: &FqPoint) -> Result<FqPoint> {
        if *lam == (1, 0) {
            return Ok(p.clone());
        }
        let red = &self.red;
        let go = self.group_order as i128;
        let pa = red.scalar_mul(lam.0.rem_euclid(go) as u128, p);
        if lam.1 == 0 {
            return Ok(pa);
        }
        let i = self
            .iota
            .as_ref()
            .ok_or_else(|| EfmError::Invalid("no square root of -1 available".into()))?;
        let ip = p.as_ref().map(|(x, y)| (red.fq.neg(x), red.fq.mul(i, y)));
        let pb = red.scalar_mul(lam.1.rem_euclid(go) as u128, &ip);
        Ok(red.add(&pa, &pb))
    }

    /// Value at a point of the reduced curve; zero only bounds the order of
    /// the corresponding complex value from below.
    pub fn eval(&self, p: &FqPoint) -> Result<FqElem> {
        let red = &self.red;
        let fq = &red.fq;
        let mut acc = match self.k {
            None => {
                let mut prod = fq.one();
                for t in &self.terms {
                    let u = red.add(&t.v, p);
                    let w = self.apply_lambda(&t.lambda, &u)?;
                    let (x, _) = w.ok_or(EfmError::PoleOnTorsion)?;
                    for (e, poly) in &t.polys {
                        let val = poly_eval(fq, poly, &x);
                        if fq.is_zero(&val) && *e < 0 {
                            return Err(EfmError::PoleOnTorsion);
                        }
                        let powed = if *e >= 0 {
                            fq.pow(&val, *e as u128)
                        } else {
                            fq.pow(&fq.inv(&val)?, (-*e) as u128)
                        };
                        prod = fq.mul(&prod, &powed);
                    }
                }
                prod
            }
            Some(k) => {
                let kk = k as usize;
                if kk == 0 {
                    return Err(EfmError::Invalid("k must be >= 1".into()));
                }
                let derivs = wp_deriv_polys(fq, &red.a, &red.b, kk);
                let mut sum = fq.zero();
                for t in &self.terms {
                    let u = red.add(&t.v, p);
                    let w = self.apply_lambda(&t.lambda, &u)?;
                    let (x, yhalf) = w.ok_or(EfmError::PoleOnTorsion)?;
                    let wp_prime = fq.scalar(&yhalf, 2);
                    // jet of wp at the point: xs[m] = wp^(m) / m!
                    let mut xs = Vec::with_capacity(kk + 1);
                    let mut fact = fq.one();
                    for (m, dp) in derivs.iter().enumerate() {
                        if m >= 1 {
                            let fm = fq.from_u64(m as u64);
                            if fq.is_zero(&fm) {
                                return Err(EfmError::Invalid(
                                    "k too large for the residue characteristic".into(),
                                ));
                            }
                            fact = fq.mul(&fact, &fm);
                        }
                        let pv = poly_eval(fq, dp, &x);
                        let v = if m % 2 == 1 { fq.mul(&pv, &wp_prime) } else { pv };
                        xs.push(fq.mul(&v, &fq.inv(&fact)?));
                    }
                    let mut h = vec![fq.zero(); kk];
                    for (e, poly) in &t.polys {
                        let fe = compose_series(fq, poly, &xs, kk + 1);
                        if fq.is_zero(&fe[0]) {
                            return Err(EfmError::PoleOnTorsion);
                        }
                        let d0i = fq.inv(&fe[0])?;
                        let mut q: Vec<FqElem> = Vec::with_capacity(kk);
                        for i in 0..kk {
                            let mut num = fq.scalar(&fe[i + 1], (i as u64) + 1);
                            for s in 1..=i {
                                num = fq.sub(&num, &fq.mul(&fe[s], &q[i - s]));
                            }
                            q.push(fq.mul(&num, &d0i));
                        }
                        let em = fq.from_u64(e.rem_euclid(fq.l as i64) as u64);
                        for i in 0..kk {
                            h[i] = fq.add(&h[i], &fq.mul(&em, &q[i]));
                        }
                    }
                    // (-1)^k (k-1)! [eps^{k-1}] f'/f
                    let mut val = h[kk - 1].clone();
                    let mut fct = fq.one();
                    for i in 2..kk as u64 {
                        fct = fq.mul(&fct, &fq.from_u64(i));
                    }
                    val = fq.mul(&val, &fct);
                    if kk % 2 == 1 {
                        val = fq.neg(&val);
                    }
                    sum = fq.add(&sum, &fq.mul(&t.coeff, &val));
                }
                sum
            }
        };
        if let Some(c) = &self.constant {
            acc = fq.mul(&acc, c);
        }
        Ok(acc)
    }
}

/// `i P1 + j P2` in the reduced torsion basis.
pub fn combo_point(red: &ReducedCurve, i: u64, j: u64) -> FqPoint {
    let a = red.scalar_mul(i as u128, &red.basis.0);
    let b = red.scalar_mul(j as u128, &red.basis.1);
    red.add(&a, &b)
}

/// All nonzero points of the reduced `E[q^n]`, tagged by basis coordinates,
/// in a fixed deterministic order.
pub fn nonzero_torsion(red: &ReducedCurve) -> Vec<((u64, u64), FqPoint)> {
    let mut out = Vec::new();
    let mut rowp: FqPoint = None;
    for i in 0..red.qn {
        let mut cur = rowp.clone();
        for j in 0..red.qn {
            if i != 0 || j != 0 {
                out.push(((i, j), cur.clone()));
            }
            cur = red.add(&cur, &red.basis.1);
        }
        rowp = red.add(&rowp, &red.basis.0);
    }
    out
}
