//! Algebraic L-values and their pi-adic valuations.  The imprimitive value
//! is normalized by the period and the power of 2 pi; scaling away the known
//! transcendence leaves a sum of Eisenstein values at torsion points, which
//! is recognized exactly through a small sweep (an integer power to kill the
//! twist ambiguity, a root of unity to rotate into Q(i)).  Euler factors at
//! primes dividing the modulus are reinstated explicitly: ramification of
//! the primitive character is tested on the congruence subgroup, never
//! assumed.

use super::charspec::HeckeCharSpec;
use super::eisen::{partials_via_eisenstein, recombine};
use super::{LvalError, Result};
use crate::arith::ball::{ComplexBall, RealBall};
use crate::arith::cyc::{lcm, CycElem};
use crate::arith::ideal::IdealK;
use crate::arith::prime::{PrimeContext, Valuation};
use crate::arith::quad::QuadElem;
use crate::arith::recognize::recognize_cyclotomic;
use crate::cm_curve::CMCurveCtx;
use crate::efm::quad_to_cyc;
use crate::measures::mul_root;
use rug::ops::Pow;
use rug::Rational;

fn factorial(n: u32) -> Rational {
    let mut r = Rational::from(1);
    for i in 2..=n {
        r *= i;
    }
    r
}

fn cmul(a: &CycElem, b: &CycElem) -> Result<CycElem> {
    let n = lcm(a.order, b.order);
    Ok(a.lift_to_order(n)?.mul(&b.lift_to_order(n)?))
}

fn is_one(c: &CycElem) -> bool {
    c.eq_value(&CycElem::one(c.order))
}

/// The finite part of the summed character at a principal ideal: for gamma
/// coprime to h, epsbar((gamma)) = W(gamma) conj(gamma)^(k-j), and this
/// returns W(gamma).
fn finite_part(spec: &HeckeCharSpec, gamma: &QuadElem) -> Result<CycElem> {
    for u in spec.field.units() {
        let g = u.mul(gamma);
        if spec.f.congruent(&g, &spec.field.one()) {
            let ub = spec.upsilon(spec.class_of(&g))?.inv();
            return Ok(mul_root(&quad_to_cyc(&u.conj().pow(spec.w())), &ub));
        }
    }
    Err(LvalError::Invalid("no unit normalizes gamma modulo f".into()))
}

/// One reinstated Euler factor: the prime, its multiplicity in h, and the
/// exact character value when the primitive character is unramified there.
#[derive(Debug, Clone)]
pub struct EulerFactor {
    pub prime: IdealK,
    pub mult: u32,
    /// epsbar at the prime; None when the character ramifies there.
    pub eps: Option<CycElem>,
}

/// Distinct prime ideals dividing h, each with its multiplicity.
fn prime_factors(spec: &HeckeCharSpec) -> Result<Vec<(IdealK, u32)>> {
    let h = spec.h_ideal();
    let mut primes: Vec<IdealK> = Vec::new();
    let mut n = h.norm();
    let mut ell = 2i128;
    while ell * ell <= n {
        if n % ell == 0 {
            while n % ell == 0 {
                n /= ell;
            }
            primes.extend(primes_above(spec, ell, &h));
        }
        ell += 1;
    }
    if n > 1 {
        primes.extend(primes_above(spec, n, &h));
    }
    let mut out = Vec::new();
    for pr in primes {
        let mut e = 0u32;
        let mut pw = pr.clone();
        while pw.divides_ideal(&h) {
            e += 1;
            pw = IdealK::new(pw.gen.mul(&pr.gen));
        }
        out.push((pr, e));
    }
    Ok(out)
}

/// Prime ideals above the rational prime ell that divide h.
fn primes_above(spec: &HeckeCharSpec, ell: i128, h: &IdealK) -> Vec<IdealK> {
    let mut found: Vec<IdealK> = Vec::new();
    // split or ramified: a generator of norm ell in the first quadrant
    for a in 0..=ell {
        for b in 0..=ell {
            let g = QuadElem::new(spec.field, a, b);
            if g.norm() == ell {
                let pr = IdealK::new(g);
                if !found.iter().any(|x| x.eq_ideal(&pr)) {
                    found.push(pr);
                }
            }
        }
    }
    if found.is_empty() {
        // inert
        found.push(IdealK::new(QuadElem::new(spec.field, ell, 0)));
    }
    found.retain(|pr| pr.divides_ideal(h));
    found
}

/// The Euler data at every prime dividing h.  For each prime the primitive
/// character is tested for ramification by evaluating the finite part on
/// the full congruence subgroup 1 + (h / r^e) O; when trivial there, the
/// character value at the prime is computed through any lift of its
/// generator that is coprime to h.
pub fn reinstated_euler_factors(spec: &HeckeCharSpec) -> Result<Vec<EulerFactor>> {
    let h = spec.h_ideal();
    let one = spec.field.one();
    let mut out = Vec::new();
    for (pr, e) in prime_factors(spec)? {
        let hp = IdealK::new(
            h.gen
                .div_exact(&pr.gen.pow(e))
                .ok_or_else(|| LvalError::Invalid("inexact division of h by a prime power".into()))?,
        );
        let span = pr.norm().pow(e);
        let mut unramified = true;
        'outer: for x in 0..span {
            for y in 0..span {
                let gamma = one.add(&hp.gen.mul(&QuadElem::new(spec.field, x, y)));
                if !IdealK::new(gamma.clone()).coprime(&h) {
                    continue;
                }
                if !is_one(&finite_part(spec, &gamma)?) {
                    unramified = false;
                    break 'outer;
                }
            }
        }
        let eps = if unramified {
            let beta = &pr.gen;
            let mut value = None;
            'search: for x in 0..span {
                for y in 0..span {
                    let gamma = beta.add(&hp.gen.mul(&QuadElem::new(spec.field, x, y)));
                    if IdealK::new(gamma.clone()).coprime(&h) {
                        let w = finite_part(spec, &gamma)?;
                        value = Some(cmul(&w, &quad_to_cyc(&beta.conj().pow(spec.w())))?);
                        break 'search;
                    }
                }
            }
            Some(value.ok_or_else(|| {
                LvalError::Invalid("no coprime lift of the prime generator".into())
            })?)
        } else {
            None
        };
        out.push(EulerFactor { prime: pr, mult: e, eps });
    }
    Ok(out)
}

/// Recognize z (or a small power of it, rotated by a 20th root of unity)
/// as an element of Q(i).  Returns the exact value together with the power
/// and rotation used.
pub fn sweep_recognize(z: &ComplexBall, den_bound: i64) -> Result<(CycElem, u32, i64)> {
    let prec = z.prec();
    for e in [1u32, 2, 4] {
        let xe = z.powi(e as i32);
        for t in 0..20i64 {
            let y = xe.mul(&ComplexBall::root_of_unity(t, 20, prec));
            if let Ok(c) = recognize_cyclotomic(&y, 4, den_bound) {
                return Ok((c, e, t));
            }
        }
    }
    Err(LvalError::NormNotRecognized)
}

/// How the valuation of an algebraic value was certified.
#[derive(Debug, Clone)]
pub enum ValCertificate {
    /// The descaled value, raised to `power` and rotated by zeta_20^zeta20,
    /// was recognized as the exact element `exact` of Q(i).
    Recognized { power: u32, zeta20: i64, exact: CycElem },
}

/// The algebraically normalized imprimitive L-value with a certified
/// pi-adic valuation (normalized so ord(p) = 1).
#[derive(Debug, Clone)]
pub struct AlgValue {
    /// Enclosure of L_h(upsilonbar phibar^(k-j), k) / ((2 pi)^j Omega^(k-j)).
    pub ball: ComplexBall,
    /// Enclosure of the descaled value alpha^(k-j) (k-1)! (Nh sqrt|d|)^j
    /// times `ball`, the quantity actually recognized.
    pub descaled: ComplexBall,
    pub val_p: Valuation,
    pub cert: ValCertificate,
}

fn finite(v: Valuation) -> Result<Rational> {
    match v {
        Valuation::Finite(x) => Ok(x),
        Valuation::Infinite => Err(LvalError::Invalid("unexpected zero in a scaling factor".into())),
    }
}

/// The algebraic imprimitive L-value of the spec's character at s = k.
/// Everything transcendental in the Eisenstein route cancels against the
/// normalization, so the descaled value is an algebraic number; it is
/// recognized exactly and its valuation transported back through the exact
/// scaling factors.
pub fn alg_l_value(
    ctx: &CMCurveCtx,
    spec: &HeckeCharSpec,
    pctx: &PrimeContext,
    den_bound: i64,
) -> Result<AlgValue> {
    let partials = partials_via_eisenstein(ctx, spec)?;
    alg_from_partials(ctx, spec, &partials, pctx, den_bound)
}

/// As `alg_l_value`, but from precomputed per-class partials (they do not
/// depend on the twist, so a scan shares them across rows).
pub(crate) fn alg_from_partials(
    ctx: &CMCurveCtx,
    spec: &HeckeCharSpec,
    partials: &[((u64, u64), ComplexBall)],
    pctx: &PrimeContext,
    den_bound: i64,
) -> Result<AlgValue> {
    let prec = spec.prec;
    let l = recombine(spec, partials)?;
    let two_pi = ComplexBall::from_re_im(RealBall::pi(prec).mul_i64(2), RealBall::zero(prec), prec);
    let omega = ComplexBall::from_re_im(ctx.omega.clone(), RealBall::zero(prec), prec);
    let ball = l
        .mul(&two_pi.powi(-spec.j))
        .mul(&omega.powi(spec.j - spec.k as i32));
    // descale: alpha^(k-j) (k-1)! (Nh sqrt|d|)^j, all exact in Q(i)
    if ctx.field.disc != -4 {
        return Err(LvalError::Invalid("exact recognition needs the reference field".into()));
    }
    let alpha = spec.h_gen();
    let kj = spec.w();
    let nh_root = Rational::from(2 * spec.h_ideal().norm()).pow(-spec.j as u32);
    let fact = factorial(spec.k - 1);
    let descaled = ball
        .mul(&alpha.embed(prec).powi(kj as i32))
        .scale_rational(&(fact.clone() / nh_root.clone()));
    let (exact, power, zeta20) = sweep_recognize(&descaled, den_bound)?;
    let val_descaled = pctx.cyc_valuation(&exact)?;
    let val_p = match val_descaled {
        Valuation::Infinite => Valuation::Infinite,
        Valuation::Finite(v) => {
            let mut shift = finite(pctx.val_quad(&alpha))? * Rational::from(kj);
            shift += finite(pctx.val_rational(&fact))?;
            shift -= finite(pctx.val_rational(&nh_root))?;
            Valuation::Finite(v / Rational::from(power) - shift)
        }
    };
    Ok(AlgValue {
        ball,
        descaled,
        val_p,
        cert: ValCertificate::Recognized { power, zeta20, exact },
    })
}

/// Valuation of the product of a complete family of conjugate values; the
/// family must be Galois-stable, since only the product is recognized.
pub fn ord_p_orbit_norm(
    values: &[ComplexBall],
    pctx: &PrimeContext,
    den_bound: i64,
) -> Result<Valuation> {
    let first = values.first().ok_or(LvalError::OrbitIncomplete)?;
    let mut prod = ComplexBall::one(first.prec());
    for v in values {
        prod = prod.mul(v);
    }
    let (exact, power, _) = sweep_recognize(&prod, den_bound)?;
    match pctx.cyc_valuation(&exact)? {
        Valuation::Infinite => Ok(Valuation::Infinite),
        Valuation::Finite(v) => Ok(Valuation::Finite(v / Rational::from(power))),
    }
}

/// Total valuation of the reinstated Euler factors 1 - epsbar(r) Nr^(-k) at
/// the unramified primes dividing h; subtracting it from the imprimitive
/// valuation gives the primitive one.
pub(crate) fn euler_valuation_sum(spec: &HeckeCharSpec, pctx: &PrimeContext) -> Result<Valuation> {
    let mut total = Rational::new();
    for f in reinstated_euler_factors(spec)? {
        if let Some(eps) = f.eps {
            let nk = Rational::from(1) / Rational::from(f.prime.norm()).pow(spec.k);
            let factor = CycElem::one(eps.order).sub(&eps.mul_rational(&nk));
            match pctx.cyc_valuation(&factor)? {
                Valuation::Infinite => return Ok(Valuation::Infinite),
                Valuation::Finite(v) => total += v,
            }
        }
    }
    Ok(Valuation::Finite(total))
}

/// Exact valuation of the interpolation factor Na - phi(a)^(k-j) upsilon(tau_a)
/// attached to a coprime auxiliary ideal.
pub fn factor_valuation(
    spec: &HeckeCharSpec,
    a: &IdealK,
    pctx: &PrimeContext,
) -> Result<(CycElem, Valuation)> {
    if !a.coprime(&spec.h_ideal()) {
        return Err(LvalError::Invalid("auxiliary ideal must be coprime to h".into()));
    }
    let phi = spec.phi(a)?;
    let ups = spec.upsilon(spec.class_of(&phi))?;
    let twisted = cmul(&quad_to_cyc(&phi.pow(spec.w())), &ups.to_cyc())?;
    let na = CycElem::from_rational(twisted.order, Rational::from(a.norm()));
    let factor = na.sub(&twisted);
    let val = pctx.cyc_valuation(&factor)?;
    Ok((factor, val))
}
