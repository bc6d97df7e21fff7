//! Elliptic function measures: zeta and gamma products, the distribution
//! relation pinning the gamma constant, theta sums in the reference
//! configuration, the finite-field reduction route for p-adic orders, and
//! the measure bridge.

use hecke_core::arith::ball::ComplexBall;
use hecke_core::arith::cyc::CycElem;
use hecke_core::arith::ideal::IdealK;
use hecke_core::arith::prime::PrimeContext;
use hecke_core::arith::quad::QuadElem;
use hecke_core::cm_curve::{parse_curve_config, CMCurveCtx, REFERENCE_CONFIG};
use hecke_core::efm::{
    aux_modulus, delta_basis, gamma_fn, kernel_coords, measure_of_ratfn, nonzero_torsion,
    ord_pi_ratfn, ray_class_degree, reduce_ratfn, reference_v, theta_psi_build, zeta_fn, EfmError,
    RatFnForm, RatFnProduct, ThetaPsiSpec,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rug::Rational;

const PREC: u32 = 192;
const DEN_BOUND: i64 = 1_000_000_000_000;

fn ctx() -> CMCurveCtx {
    parse_curve_config(REFERENCE_CONFIG, PREC).unwrap()
}

fn ideal(c: &CMCurveCtx, a: i128, b: i128) -> IdealK {
    IdealK::new(QuadElem::new(c.field, a, b))
}

fn theta(c: &CMCurveCtx) -> RatFnProduct {
    let spec = ThetaPsiSpec::reference(c, 5, 0).unwrap();
    theta_psi_build(c, &spec).unwrap()
}

#[test]
fn zeta_factor_counts() {
    let c = ctx();
    let one = IdealK::one(c.field);
    let z1 = zeta_fn(&c, &one, &ideal(&c, 2, 1)).unwrap();
    let z2 = zeta_fn(&c, &one, &ideal(&c, 1, 4)).unwrap();
    let count = |r: &RatFnProduct| match &r.form {
        RatFnForm::Product { factors, .. } => factors.len(),
        _ => usize::MAX,
    };
    assert_eq!(count(&z1), 2, "(N(2+i) - 1)/2");
    assert_eq!(count(&z2), 8, "(N(1+4i) - 1)/2");
}

#[test]
fn zeta_is_even() {
    let c = ctx();
    let one = IdealK::one(c.field);
    let z = zeta_fn(&c, &one, &ideal(&c, 2, 1)).unwrap();
    let p = (Rational::from((3, 7)), Rational::from((2, 7)));
    let m = (Rational::from((4, 7)), Rational::from((5, 7)));
    let a = z.eval(&c, &p.0, &p.1).unwrap();
    let b = z.eval(&c, &m.0, &m.1).unwrap();
    assert!(a.sub(&b).contains_zero(), "zeta(-P) = zeta(P)");
}

#[test]
fn zeta_rejects_bad_auxiliary_ideals() {
    let c = ctx();
    let one = IdealK::one(c.field);
    // shares a factor with 6
    assert!(matches!(
        zeta_fn(&c, &one, &ideal(&c, 3, 0)),
        Err(EfmError::BadAuxiliaryIdeal)
    ));
    // divides the conductor
    assert!(matches!(
        zeta_fn(&c, &one, &ideal(&c, 1, 1)),
        Err(EfmError::BadAuxiliaryIdeal)
    ));
    // not coprime to b
    assert!(matches!(
        zeta_fn(&c, &ideal(&c, 2, 1), &ideal(&c, 2, 1)),
        Err(EfmError::BadAuxiliaryIdeal)
    ));
}

#[test]
fn zeta_flags_poles_on_division_points() {
    let c = ctx();
    let one = IdealK::one(c.field);
    let z = zeta_fn(&c, &one, &ideal(&c, 2, 1)).unwrap();
    // (1/5, 3/5) is killed by 2 + i, so it carries a pole of zeta
    let r = z.eval(&c, &Rational::from((1, 5)), &Rational::from((3, 5)));
    assert!(matches!(r, Err(EfmError::PoleOnTorsion)));
}

#[test]
fn kernel_coordinate_counts() {
    let c = ctx();
    assert_eq!(kernel_coords(&c, &QuadElem::new(c.field, 1, 1)).len(), 2);
    assert_eq!(kernel_coords(&c, &QuadElem::new(c.field, 2, 0)).len(), 4);
    assert_eq!(kernel_coords(&c, &QuadElem::new(c.field, 2, 1)).len(), 5);
}

/// The distribution relation `gamma(beta P) = prod_{R in ker beta}
/// gamma(P + R)` holds on the nose (root of unity 1) once the constant is
/// pinned by the norm-2 endomorphism; the norm-4 one must then follow.
#[test]
fn gamma_distribution_relation() {
    let c = ctx();
    let one = IdealK::one(c.field);
    let g = gamma_fn(&c, &one, &ideal(&c, 1, 4)).unwrap();
    let betas = [QuadElem::new(c.field, 1, 1), QuadElem::new(c.field, 2, 0)];
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_efa1);
    for trial in 0..5 {
        let d = [7i64, 11, 13][trial % 3];
        let p = (
            Rational::from((rng.gen_range(1..d), d)),
            Rational::from((rng.gen_range(1..d), d)),
        );
        for beta in &betas {
            let (b1, b2) = c.endo_coords(beta, &p.0, &p.1);
            let num = g.eval(&c, &b1, &b2).unwrap();
            let mut den = ComplexBall::one(PREC);
            for (k1, k2) in kernel_coords(&c, beta) {
                let s1 = Rational::from(&p.0 + &k1);
                let s2 = Rational::from(&p.1 + &k2);
                den = den.mul(&g.eval(&c, &s1, &s2).unwrap());
            }
            let resid = num.div(&den).sub(&ComplexBall::one(PREC));
            let bound = resid.abs().upper().to_f64();
            assert!(
                bound < 1e-20,
                "distribution relation at trial {trial}, |ratio - 1| <= {bound:.3e}"
            );
        }
    }
}

#[test]
fn reference_configuration_collapses() {
    let c = ctx();
    assert_eq!(ray_class_degree(&c.conductor), 1);
    let g = aux_modulus(&c).unwrap();
    assert_eq!(g.norm(), c.conductor.norm());
    assert!(g.gen.divides(&c.conductor.gen));
    let v = reference_v(&c).unwrap();
    assert_eq!(v, (Rational::from((1, 4)), Rational::from((1, 4))));
}

#[test]
fn theta_hypothesis_checks() {
    let c = ctx();
    assert!(theta_psi_build(&c, &ThetaPsiSpec::reference(&c, 5, 0).unwrap()).is_ok());
    let mut bad = ThetaPsiSpec::reference(&c, 5, 0).unwrap();
    bad.a = ideal(&c, 5, 0); // shares a factor with q
    assert!(matches!(
        theta_psi_build(&c, &bad),
        Err(EfmError::HypothesisViolation(_))
    ));
    let mut bad6 = ThetaPsiSpec::reference(&c, 5, 0).unwrap();
    bad6.a = ideal(&c, 3, 0); // shares a factor with 6
    assert!(matches!(
        theta_psi_build(&c, &bad6),
        Err(EfmError::HypothesisViolation(_))
    ));
}

#[test]
fn delta_basis_splits_into_eigenlines() {
    let c = ctx();
    let (p1, p2) = delta_basis(&c, (1, 1)).unwrap();
    // P1 spans the nu-kernel line, P2 the conjugate one
    let nu = QuadElem::new(c.field, 2, 1);
    let nu_bar = QuadElem::new(c.field, 2, -1);
    let (a1, a2) = c.endo_coords(&nu, &p1.0, &p1.1);
    assert!(a1 == 0 && a2 == 0, "nu kills P1");
    let (b1, b2) = c.endo_coords(&nu_bar, &p2.0, &p2.1);
    assert!(b1 == 0 && b2 == 0, "nu-bar kills P2");
}

/// The sum of theta over all nonzero 5-torsion is Galois stable, hence lands
/// in Q(i).  The exact value is frozen; its reduction at the pinned prime
/// must then agree with the independently computed finite-field sum, which
/// cross-checks the divisor recognition, the translate reduction, and the
/// jet evaluation in one shot.
#[test]
fn theta_trace_matches_reduction() {
    let c = ctx();
    let pctx = PrimeContext::new(c.field, c.p).unwrap();
    let th = theta(&c);
    let mut sum = ComplexBall::zero(PREC);
    for s in 0..5i64 {
        for t in 0..5i64 {
            if s == 0 && t == 0 {
                continue;
            }
            let v = th
                .eval(&c, &Rational::from((s, 5)), &Rational::from((t, 5)))
                .unwrap();
            sum = sum.add(&v);
        }
    }
    let mut frozen = CycElem::zero(4);
    frozen.coeffs[0] = Rational::from(-113063808);
    frozen.coeffs[1] = Rational::from(52483200);
    assert!(
        sum.sub(&frozen.embed(PREC)).contains_zero(),
        "trace of theta over E[5] minus its frozen value must contain zero"
    );

    let rr = reduce_ratfn(&c, &th, &pctx, 1, 64, DEN_BOUND).unwrap();
    let fq = rr.red.fq.clone();
    let mut fsum = fq.zero();
    for (_, pt) in nonzero_torsion(&rr.red) {
        fsum = fq.add(&fsum, &rr.eval(&pt).unwrap());
    }
    // reduce the frozen value: c0 + c1 * r_tau mod p
    let p = pctx.p as i128;
    let c0 = frozen.coeffs[0].numer().to_i128().unwrap().rem_euclid(p);
    let c1 = frozen.coeffs[1].numer().to_i128().unwrap().rem_euclid(p);
    let want = (c0 + c1 * pctx.r_tau as i128).rem_euclid(p) as u64;
    assert_eq!(fsum, fq.from_u64(want), "reduced trace consistency");
}

#[test]
fn ord_of_constants() {
    let c = ctx();
    let pctx = PrimeContext::new(c.field, c.p).unwrap();
    let cases: [(i64, i64, Rational); 4] = [
        (13, 0, Rational::from(1)),
        (1, 0, Rational::new()),
        (24, 0, Rational::new()), // (k-1)! for k = 5
        (3, 2, Rational::new()),  // 3 + 2i generates the conjugate prime
    ];
    for (re, im, want) in cases {
        let ball = ComplexBall::from_re_im(
            hecke_core::arith::ball::RealBall::from_i64(re, PREC),
            hecke_core::arith::ball::RealBall::from_i64(im, PREC),
            PREC,
        );
        let f = RatFnProduct::constant_fn(ball, c.lattice.clone());
        let rep = ord_pi_ratfn(&c, &f, &pctx, &[1], DEN_BOUND).unwrap();
        assert_eq!(rep.ord, want, "ord of constant {re} + {im}i");
    }
}

/// `ord_pi(theta) = ord_pi((k-1)!) = 0`, certified by nonzero reduced values
/// at both sampling levels.
#[test]
fn theta_order_is_zero() {
    let c = ctx();
    let pctx = PrimeContext::new(c.field, c.p).unwrap();
    let th = theta(&c);
    let rep = ord_pi_ratfn(&c, &th, &pctx, &[1, 2], DEN_BOUND).unwrap();
    assert_eq!(rep.ord, Rational::new());
    assert_eq!(rep.attained, rep.sampled, "every sample is a unit at the prime");
    assert_eq!(rep.level_minima.len(), 2);

    // scaling by p shifts the order by exactly one
    let scaled = RatFnProduct {
        constant: Some(ComplexBall::from_i64(13, PREC)),
        form: th.form.clone(),
    };
    let rep13 = ord_pi_ratfn(&c, &scaled, &pctx, &[1], DEN_BOUND).unwrap();
    assert_eq!(rep13.ord, Rational::from(1));
}

#[test]
fn constant_measure_is_a_dirac_mass() {
    let c = ctx();
    let f = RatFnProduct::constant_fn(ComplexBall::from_i64(7, PREC), c.lattice.clone());
    let m = measure_of_ratfn(&c, &f, (1, 1), 4, DEN_BOUND).unwrap();
    let vals = &m.values;
    assert_eq!(vals.len(), 25);
    for (i, v) in vals.iter().enumerate() {
        if i == 0 {
            assert_eq!(v.coeffs[0], Rational::from(7));
        } else {
            assert!(v.is_zero(), "off-origin cell {i} must vanish");
        }
    }
}

/// Individual theta values live in a field that is not abelian over Q, so
/// the cellwise recognition of the bridge must refuse rather than guess.
#[test]
fn theta_measure_recognition_fails_honestly() {
    let c = ctx();
    let th = theta(&c);
    let r = measure_of_ratfn(&c, &th, (1, 1), 40, DEN_BOUND);
    assert!(matches!(r, Err(EfmError::RecognitionFailed)));
}
