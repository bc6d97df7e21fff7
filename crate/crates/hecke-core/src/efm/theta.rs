//! Theta sums: formal sums of log-derivative images of gamma functions,
//! translated by a fixed division point V, with the coefficient and Galois
//! data that the class-number-one reference configuration collapses almost
//! entirely.

use super::ratfn::{DjkTerm, RatFnForm, RatFnProduct};
use super::{EfmError, Result};
use crate::arith::cyc::CycElem;
use crate::arith::ideal::{normalize_generator, IdealK};
use crate::arith::quad::QuadElem;
use crate::cm_curve::{CMCurveCtx, IsogenyData};
use crate::eisenstein::zeta_log_factors;
use rug::Rational;

/// `a + b i` as an element of `Q(zeta_4)`.
pub fn quad_to_cyc(x: &QuadElem) -> CycElem {
    assert_eq!(x.field.disc, -4, "cyclotomic embedding implemented for Q(i)");
    let mut out = CycElem::zero(4);
    out.coeffs[0] = Rational::from(x.a);
    out.coeffs[1] = Rational::from(x.b);
    out
}

/// Residue classes modulo the ideal `f`, one canonical representative each.
fn residue_classes(f: &IdealK) -> Vec<QuadElem> {
    let alpha = &f.gen;
    let n = f.norm();
    let mut reps: Vec<QuadElem> = Vec::new();
    for m in 0..n {
        for k in 0..n {
            let r = QuadElem::new(f.field(), m, k);
            if !reps.iter().any(|s| alpha.divides(&r.sub(s))) {
                reps.push(r);
            }
        }
    }
    reps
}

/// `[R(f) : K]`: the order of the residue unit group modulo the image of the
/// global units.
pub fn ray_class_degree(f: &IdealK) -> u64 {
    let reps = residue_classes(f);
    let coprime: Vec<&QuadElem> = reps
        .iter()
        .filter(|r| !r.is_zero() && IdealK::new((*r).clone()).coprime(f))
        .collect();
    let mut unit_classes: Vec<QuadElem> = Vec::new();
    for u in f.field().units() {
        if !unit_classes.iter().any(|s| f.gen.divides(&u.sub(s))) {
            unit_classes.push(u);
        }
    }
    coprime.len() as u64 / unit_classes.len() as u64
}

/// The auxiliary modulus: the conductor itself when it is coprime to `pq`,
/// else its smallest rational multiple that is.
pub fn aux_modulus(ctx: &CMCurveCtx) -> Result<IdealK> {
    let pq = IdealK::new(QuadElem::new(ctx.field, (ctx.p * ctx.q) as i128, 0));
    if ctx.conductor.coprime(&pq) {
        return Ok(ctx.conductor.clone());
    }
    for m in 2..1000i128 {
        let cand = IdealK::new(ctx.conductor.gen.mul(&QuadElem::new(ctx.field, m, 0)));
        if cand.coprime(&pq) {
            return Ok(cand);
        }
    }
    Err(EfmError::Invalid("no small auxiliary modulus coprime to pq".into()))
}

/// Norm of the annihilator of the coordinate pair `(r1, r2)` (the smallest
/// norm of a nonzero endomorphism killing the point).
fn annihilator_norm(ctx: &CMCurveCtx, n: i128, r1: &Rational, r2: &Rational) -> i128 {
    let mut best = i128::MAX;
    for m in -n..=n {
        for k in -n..=n {
            if m == 0 && k == 0 {
                continue;
            }
            let x = QuadElem::new(ctx.field, m, k);
            let (f1, f2) = ctx.endo_coords(&x, r1, r2);
            if f1 == 0 && f2 == 0 {
                best = best.min(x.norm());
            }
        }
    }
    best
}

/// The canonical primitive division point of the auxiliary modulus: the
/// lexicographically smallest lattice coordinates among the points whose
/// annihilator is exactly that modulus.
pub fn reference_v(ctx: &CMCurveCtx) -> Result<(Rational, Rational)> {
    let g = aux_modulus(ctx)?;
    let n = g.norm();
    for s in 0..n {
        for t in 0..n {
            if s == 0 && t == 0 {
                continue;
            }
            let r1 = Rational::from((s, n));
            let r2 = Rational::from((t, n));
            let (f1, f2) = ctx.endo_coords(&g.gen, &r1, &r2);
            if f1 != 0 || f2 != 0 {
                continue;
            }
            if annihilator_norm(ctx, n, &r1, &r2) == n {
                return Ok((r1, r2));
            }
        }
    }
    Err(EfmError::Invalid("no primitive division point found".into()))
}

/// The data of a theta sum: the auxiliary ideal `a`, the translate `V`, the
/// operator indices, the per-ideal coefficients over the class
/// representatives `I`, and the Galois translates (division-point shifts of
/// `V`).
#[derive(Debug, Clone)]
pub struct ThetaPsiSpec {
    pub a: IdealK,
    pub v: (Rational, Rational),
    pub j: i32,
    pub k: u32,
    /// `(chi0(b) Lambda(b)^{k-j} / phi(b)^{k-j}, b)` per class representative.
    pub coeffs: Vec<(CycElem, IdealK)>,
    /// Shifts realizing the Galois translates of `V`; `(0, 0)` alone when the
    /// relevant relative extension is trivial.
    pub deltas: Vec<(Rational, Rational)>,
}

impl ThetaPsiSpec {
    /// The reference configuration: class number one collapses the class sum
    /// to the trivial ideal with coefficient 1, and the auxiliary modulus
    /// equals the conductor so the translate set is `{V}` itself.  The
    /// auxiliary ideal is the smallest one congruent to 1 modulo the
    /// conductor and coprime to `6 p q` times the conductor.
    pub fn reference(ctx: &CMCurveCtx, k: u32, j: i32) -> Result<ThetaPsiSpec> {
        let a = IdealK::new(QuadElem::new(ctx.field, 1, 4));
        let v = reference_v(ctx)?;
        Ok(ThetaPsiSpec {
            a,
            v,
            j,
            k,
            coeffs: vec![(CycElem::one(1), IdealK::one(ctx.field))],
            deltas: vec![(Rational::new(), Rational::new())],
        })
    }
}

/// Assemble the evaluable theta sum, after checking the hypotheses: `q` must
/// not divide `[R(f) : K]`, and `a` must be principal with a generator
/// congruent to 1 mod the conductor and coprime to `6 q p`, the auxiliary
/// modulus, and every class representative.
pub fn theta_psi_build(ctx: &CMCurveCtx, spec: &ThetaPsiSpec) -> Result<RatFnProduct> {
    let deg = ray_class_degree(&ctx.conductor);
    if deg % ctx.q == 0 {
        return Err(EfmError::HypothesisViolation(format!(
            "q = {} divides [R(f):K] = {}",
            ctx.q, deg
        )));
    }
    let g = aux_modulus(ctx)?;
    let mut must_be_coprime = vec![
        IdealK::new(QuadElem::new(ctx.field, 6, 0)),
        IdealK::new(QuadElem::new(ctx.field, ctx.q as i128, 0)),
        IdealK::new(QuadElem::new(ctx.field, ctx.p as i128, 0)),
        g,
    ];
    for (_, b) in &spec.coeffs {
        must_be_coprime.push(b.clone());
    }
    for m in &must_be_coprime {
        if !spec.a.coprime(m) {
            return Err(EfmError::HypothesisViolation(
                "auxiliary ideal shares a factor with 6 q p g or a class representative".into(),
            ));
        }
    }
    if normalize_generator(&spec.a, &ctx.conductor).is_err() {
        return Err(EfmError::HypothesisViolation(
            "auxiliary ideal has no generator congruent to 1 mod the conductor".into(),
        ));
    }

    let mut terms = Vec::new();
    for (coeff, b) in &spec.coeffs {
        let iso = IsogenyData::new(ctx, b.clone())?;
        let factors = zeta_log_factors(ctx, &iso.target, &spec.a)?;
        for d in &spec.deltas {
            terms.push(DjkTerm {
                coeff: coeff.clone(),
                lambda: iso.lambda.clone(),
                v1: Rational::from(&spec.v.0 + &d.0),
                v2: Rational::from(&spec.v.1 + &d.1),
                factors: factors.clone(),
            });
        }
    }
    Ok(RatFnProduct {
        constant: None,
        form: RatFnForm::ThetaSum { a: spec.a.clone(), j: spec.j, k: spec.k, terms },
    })
}
