//! Curve contexts and torsion points.
//!
//! A context fixes a class-number-one field, exact invariants `g2, g3`, and
//! the period `Omega` with lattice `L = Omega * O_K`.  The period is pinned
//! from a low-accuracy hint by exact homogeneity: `g2(c L) = c^{-4} g2(L)`,
//! so one invariant computation on the unit-shaped lattice determines the
//! real positive `Omega` to working precision.  Both invariants of the
//! resulting lattice are then re-checked against the exact inputs.
//!
//! Torsion points carry exact lattice coordinates `(r1, r2)` with q-power
//! denominators; the complex `x, y` are derived balls.  The group structure
//! (addition, endomorphism action, eigenbasis splitting) is therefore exact,
//! and only the geometry is approximate.

use super::lattice::{agm, lattice_invariants, real_root, wp_eval, Lattice};
use super::{CurveError, Result};
use crate::arith::ball::{ComplexBall, RealBall};
use crate::arith::ideal::{normalize_generator, IdealK};
use crate::arith::quad::{Field, QuadElem};
use rug::{Integer, Rational};

#[derive(Debug, Clone)]
pub struct CMCurveCtx {
    pub field: Field,
    pub g2: Rational,
    pub g3: Rational,
    pub omega: RealBall,
    pub lattice: Lattice,
    pub conductor: IdealK,
    pub q: u64,
    pub p: u64,
    pub prec: u32,
}

#[derive(Debug, Clone)]
pub struct TorsionPoint {
    /// Lattice coordinates, reduced to `[0, 1)`.
    pub r1: Rational,
    pub r2: Rational,
    /// `None` marks the point at infinity.
    pub xy: Option<(ComplexBall, ComplexBall)>,
}

impl TorsionPoint {
    pub fn is_infinity(&self) -> bool {
        self.xy.is_none()
    }

    pub fn same_coords(&self, other: &TorsionPoint) -> bool {
        self.r1 == other.r1 && self.r2 == other.r2
    }
}

fn frac_part(r: &Rational) -> Rational {
    let fl = r.clone().floor();
    Rational::from(r - fl)
}

fn is_q_power_denom(r: &Rational, q: u64) -> bool {
    let mut d = r.denom().clone();
    let qq = Integer::from(q);
    while d.clone() % qq.clone() == 0 {
        d /= qq.clone();
    }
    d == 1
}

impl CMCurveCtx {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        field: Field,
        g2: Rational,
        g3: Rational,
        conductor: IdealK,
        q: u64,
        p: u64,
        omega_hint: f64,
        prec: u32,
    ) -> Result<CMCurveCtx> {
        if conductor.field() != field {
            return Err(CurveError::BadConfig("conductor field mismatch".into()));
        }
        let disc = g2.clone() * g2.clone() * g2.clone()
            - Rational::from(27) * g3.clone() * g3.clone();
        if disc == 0 {
            return Err(CurveError::BadConfig("singular invariants".into()));
        }

        // invariants of the unit-shaped lattice Z + Z tau
        let unit_lat = Lattice::new(field.tau_ball(prec), ComplexBall::one(prec))?;
        let (c4, c6) = lattice_invariants(&unit_lat, prec)?;

        // Omega from homogeneity; the imaginary parts of c4, c6 are certified
        // zero because conjugation preserves O_K
        let omega = if g2 != 0 {
            let ratio = c4.re().div(&RealBall::from_rational(&g2, prec));
            real_root(&ratio, 4)?
        } else {
            let ratio = c6.re().div(&RealBall::from_rational(&g3, prec));
            real_root(&ratio, 6)?
        };
        if (omega.to_f64() - omega_hint).abs() > 1e-10 {
            return Err(CurveError::BadConfig(format!(
                "period hint {omega_hint} disagrees with computed {}",
                omega.to_f64()
            )));
        }

        let om = ComplexBall::from_re_im(omega.clone(), RealBall::zero(prec), prec);
        let lattice = Lattice::new(unit_lat.w1.mul(&om), om)?;

        // both invariants of the scaled lattice must recover the inputs
        let (g2l, g3l) = lattice_invariants(&lattice, prec)?;
        let zero = Rational::new();
        let g2_pt = ComplexBall::from_rationals(&g2, &zero, prec);
        let g3_pt = ComplexBall::from_rationals(&g3, &zero, prec);
        if !g2l.contains(&g2_pt) || !g3l.contains(&g3_pt) {
            return Err(CurveError::BadConfig(
                "invariants do not match a lattice of shape Omega*O_K".into(),
            ));
        }

        // independent AGM route for the real-root family y^2 = 4x^3 - g2 x
        if g3 == 0 && g2 > 0 {
            // roots e1 = sqrt(g2)/2, e2 = 0, e3 = -e1:
            // Omega = pi / agm(sqrt(2 e1), sqrt(e1))
            let e1 = RealBall::from_rational(&g2, prec).sqrt().div_u32(2);
            let m = agm(&e1.mul_i64(2).sqrt(), &e1.sqrt())?;
            let om_agm = RealBall::pi(prec).div(&m);
            let a = ComplexBall::from_re_im(om_agm, RealBall::zero(prec), prec);
            let b = ComplexBall::from_re_im(omega.clone(), RealBall::zero(prec), prec);
            if !a.overlaps(&b) {
                return Err(CurveError::BadConfig(
                    "AGM period disagrees with homogeneity period".into(),
                ));
            }
        }

        Ok(CMCurveCtx { field, g2, g3, omega, lattice, conductor, q, p, prec })
    }

    pub fn infinity(&self) -> TorsionPoint {
        TorsionPoint { r1: Rational::new(), r2: Rational::new(), xy: None }
    }

    /// The point `z = r1*w1 + r2*w2 mod L` with its derived `x, y` balls.
    pub fn torsion_point(&self, r1: &Rational, r2: &Rational) -> Result<TorsionPoint> {
        if !is_q_power_denom(r1, self.q) || !is_q_power_denom(r2, self.q) {
            return Err(CurveError::Invalid("denominators must be q-powers".into()));
        }
        let r1 = frac_part(r1);
        let r2 = frac_part(r2);
        if r1 == 0 && r2 == 0 {
            return Ok(self.infinity());
        }
        let z = self.lattice.point(&r1, &r2);
        let (x, y) = wp_eval(&z, &self.lattice, self.prec)?;
        // defensive Weierstrass residual check
        let rhs = x
            .powi(3)
            .scale_i64(4)
            .sub(&x.scale_rational(&self.g2))
            .sub(&ComplexBall::from_rationals(&self.g3, &Rational::new(), self.prec));
        if !y.mul(&y).sub(&rhs).contains_zero() {
            return Err(CurveError::PrecisionExhausted);
        }
        Ok(TorsionPoint { r1, r2, xy: Some((x, y)) })
    }

    /// Group addition: exact on lattice coordinates.
    pub fn tp_add(&self, a: &TorsionPoint, b: &TorsionPoint) -> Result<TorsionPoint> {
        self.torsion_point(
            &Rational::from(&a.r1 + &b.r1),
            &Rational::from(&a.r2 + &b.r2),
        )
    }

    pub fn tp_neg(&self, a: &TorsionPoint) -> Result<TorsionPoint> {
        self.torsion_point(&Rational::from(-&a.r1), &Rational::from(-&a.r2))
    }

    pub fn tp_scalar(&self, n: i64, a: &TorsionPoint) -> Result<TorsionPoint> {
        let n = Rational::from(n);
        self.torsion_point(
            &Rational::from(&a.r1 * &n),
            &Rational::from(&a.r2 * &n),
        )
    }

    /// Exact order of the point (a q-power).
    pub fn tp_order(&self, a: &TorsionPoint) -> Integer {
        a.r1.denom().clone().lcm(a.r2.denom())
    }

    /// New coordinates of `mu * z`: with `mu = a + b tau` and
    /// `tau^2 = t1 tau + t0`, `mu w1 = (a + b t1) w1 + b t0 w2` and
    /// `mu w2 = b w1 + a w2`.
    pub fn endo_coords(&self, mu: &QuadElem, r1: &Rational, r2: &Rational) -> (Rational, Rational) {
        let (t1, t0) = self.field.tau_sq();
        let a = Rational::from(mu.a);
        let b = Rational::from(mu.b);
        let n1 = r1.clone() * (a.clone() + b.clone() * Rational::from(t1)) + r2.clone() * b.clone();
        let n2 = r1.clone() * b * Rational::from(t0) + r2.clone() * a;
        (frac_part(&n1), frac_part(&n2))
    }

    /// Complex multiplication by `mu` on a torsion point.
    pub fn endo_act(&self, mu: &QuadElem, pt: &TorsionPoint) -> Result<TorsionPoint> {
        if mu.field != self.field {
            return Err(CurveError::Invalid("endomorphism from a different field".into()));
        }
        let (n1, n2) = self.endo_coords(mu, &pt.r1, &pt.r2);
        self.torsion_point(&n1, &n2)
    }
}

#[derive(Debug, Clone)]
pub struct IsogenyData {
    pub b: IdealK,
    /// The normalized generator of `b` modulo the conductor.
    pub lambda: QuadElem,
    /// `lambda / gen(b)`, a root of unity.
    pub unit: QuadElem,
    /// `L_b = lambda * b^{-1} * L = unit * L`.
    pub target: Lattice,
}

impl IsogenyData {
    pub fn new(ctx: &CMCurveCtx, b: IdealK) -> Result<IsogenyData> {
        let lambda = normalize_generator(&b, &ctx.conductor)
            .map_err(|e| CurveError::Invalid(e.to_string()))?;
        let unit = lambda
            .div_exact(&b.gen)
            .ok_or_else(|| CurveError::Invalid("generator does not divide lambda".into()))?;
        let target = ctx.lattice.scale(&unit.embed(ctx.prec));
        Ok(IsogenyData { b, lambda, unit, target })
    }

    /// Whether `pt` lies in the kernel `E[b]`: exact test on coordinates.
    pub fn in_kernel(&self, ctx: &CMCurveCtx, pt: &TorsionPoint) -> bool {
        let (n1, n2) = ctx.endo_coords(&self.b.gen, &pt.r1, &pt.r2);
        n1 == 0 && n2 == 0
    }

    /// `xi_b(lambda * z)` on the target lattice; `None` is the point at
    /// infinity (exactly the kernel `E[b]`).
    pub fn apply(
        &self,
        ctx: &CMCurveCtx,
        pt: &TorsionPoint,
    ) -> Result<Option<(ComplexBall, ComplexBall)>> {
        if pt.is_infinity() || self.in_kernel(ctx, pt) {
            return Ok(None);
        }
        let z = ctx.lattice.point(&pt.r1, &pt.r2);
        let w = z.mul(&self.lambda.embed(ctx.prec));
        Ok(Some(wp_eval(&w, &self.target, ctx.prec)?))
    }
}

/// The canonical eigenbasis of `E[q^n]` for the splitting attached to a
/// degree-one prime `(nu)` above `q`.  Scans the exact coordinate grid for
/// points fixed by the idempotent `alpha` (`alpha = 1 mod nu^n`,
/// `alpha = 0 mod conj(nu)^n`) of exact order `q^n`, and returns the
/// lexicographically smallest generator on each side (the `nu`-side first).
pub fn eigenbasis(
    ctx: &CMCurveCtx,
    nu: &QuadElem,
    n: u32,
) -> Result<(TorsionPoint, TorsionPoint)> {
    if nu.norm() != ctx.q as i128 {
        return Err(CurveError::Invalid("nu must generate a degree-one prime above q".into()));
    }
    let qn = (ctx.q as i128).pow(n);
    let pq = IdealK::new(nu.clone()).pow(n);
    let pqc = IdealK::new(nu.conj()).pow(n);
    let one = ctx.field.one();
    let mut alpha = None;
    'outer: for a in 0..qn {
        for b in 0..qn {
            let x = QuadElem::new(ctx.field, a, b);
            if pqc.contains(&x) && pq.contains(&x.sub(&one)) {
                alpha = Some(x);
                break 'outer;
            }
        }
    }
    let alpha = alpha.ok_or_else(|| CurveError::Invalid("no splitting idempotent".into()))?;
    let beta = one.sub(&alpha);

    let pick = |idem: &QuadElem| -> Option<(Rational, Rational)> {
        let mut best: Option<(Rational, Rational)> = None;
        for i in 0..qn {
            for j in 0..qn {
                if i == 0 && j == 0 {
                    continue;
                }
                let r1 = Rational::from((i, qn));
                let r2 = Rational::from((j, qn));
                let (f1, f2) = ctx.endo_coords(idem, &r1, &r2);
                if f1 != r1 || f2 != r2 {
                    continue;
                }
                // exact order q^n
                let ord = r1.denom().clone().lcm(r2.denom());
                if ord != Integer::from(qn) {
                    continue;
                }
                match &best {
                    Some((b1, b2)) if (b1, b2) <= (&r1, &r2) => {}
                    _ => best = Some((r1, r2)),
                }
            }
        }
        best
    };

    let (a1, a2) = pick(&alpha).ok_or_else(|| CurveError::Invalid("empty nu eigenspace".into()))?;
    let (b1, b2) = pick(&beta).ok_or_else(|| CurveError::Invalid("empty conj eigenspace".into()))?;
    Ok((ctx.torsion_point(&a1, &a2)?, ctx.torsion_point(&b1, &b2)?))
}
