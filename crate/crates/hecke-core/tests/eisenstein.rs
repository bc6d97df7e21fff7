//! Eisenstein–Kronecker series: oracles against the Weierstrass layer,
//! symmetry and homogeneity properties, the smoothing identity, and the
//! two-route cross-check of the log-derivative operator.

use hecke_core::arith::ball::{ComplexBall, RealBall};
use hecke_core::arith::ideal::IdealK;
use hecke_core::arith::quad::QuadElem;
use hecke_core::cm_curve::{
    parse_curve_config, wp_eval, wp_jet, CMCurveCtx, Lattice, REFERENCE_CONFIG,
};
use hecke_core::eisenstein::{
    a_const, cross_check_djk, djk_via_log_derivative, eis_jk, eis_jk_smoothed,
    zeta_log_factors, EisError, EisParams,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rug::{Float, Rational};

const PREC: u32 = 192;

fn ctx() -> CMCurveCtx {
    parse_curve_config(REFERENCE_CONFIG, PREC).unwrap()
}

fn cb(re: i64, im: i64) -> ComplexBall {
    ComplexBall::from_re_im(
        RealBall::from_i64(re, PREC),
        RealBall::from_i64(im, PREC),
        PREC,
    )
}

fn assert_small(b: &ComplexBall, bound: f64, what: &str) {
    let u = b.abs().upper().to_f64();
    assert!(u < bound, "{what}: |ball| <= {u:.3e}, wanted < {bound:.1e}");
}

/// A generic point of the reference lattice span, away from small torsion.
fn generic_z(c: &CMCurveCtx, rng: &mut ChaCha8Rng) -> ComplexBall {
    let n1 = rng.gen_range(1..96i64);
    let n2 = rng.gen_range(1..96i64);
    c.lattice
        .point(&Rational::from((n1, 97)), &Rational::from((n2, 97)))
}

#[test]
fn a_const_reference_and_scaling() {
    let l = Lattice::new(ComplexBall::i(PREC), ComplexBall::one(PREC)).unwrap();
    let a = a_const(&l).unwrap();
    let pi_inv = ComplexBall::from_re_im(RealBall::pi(PREC), RealBall::zero(PREC), PREC).inv();
    assert_small(&a.sub(&pi_inv), 1e-40, "A(Z+Zi) = 1/pi");

    // A(lambda L) = |lambda|^2 A(L) for lambda = 2+i
    let lam = cb(2, 1);
    let a2 = a_const(&l.scale(&lam)).unwrap();
    assert_small(&a2.sub(&a.scale_i64(5)), 1e-40, "A scales by the norm");

    // swapped orientation never constructs
    assert!(Lattice::new(ComplexBall::one(PREC), ComplexBall::i(PREC)).is_err());
}

#[test]
fn params_validation() {
    let c = ctx();
    let z = generic_z(&c, &mut ChaCha8Rng::seed_from_u64(1));
    let mk = |j: i32, k: u32| EisParams::new(z.clone(), c.lattice.clone(), j, k);
    assert!(mk(0, 3).is_ok());
    assert!(mk(-2, 5).is_ok());
    assert_eq!(mk(0, 1).unwrap_err(), EisError::ConvergenceRegion);
    assert_eq!(mk(0, 2).unwrap_err(), EisError::ConvergenceRegion);
    assert_eq!(mk(-1, 3).unwrap_err(), EisError::ConvergenceRegion);
    assert_eq!(mk(-3, 3).unwrap_err(), EisError::ConvergenceRegion);
    assert_eq!(mk(1, 5).unwrap_err(), EisError::ConvergenceRegion);
    // lattice argument is a pole
    let p = EisParams::new(ComplexBall::zero(PREC), c.lattice.clone(), 0, 3).unwrap();
    assert_eq!(eis_jk(&p, PREC).unwrap_err(), EisError::PoleOrZeroAtPoint);
}

#[test]
fn eis_0k_matches_weierstrass() {
    // E_{0,3} = -wp', E_{0,4} = wp'' = 6 wp^2 - g2/2, E_{0,5} = -12 wp wp'
    let c = ctx();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let g2 = ComplexBall::from_rationals(&c.g2, &Rational::new(), PREC);
    for _ in 0..5 {
        let z = generic_z(&c, &mut rng);
        let (wp, wpp) = wp_eval(&z, &c.lattice, PREC).unwrap();
        let e3 = eis_jk(&EisParams::new(z.clone(), c.lattice.clone(), 0, 3).unwrap(), PREC)
            .unwrap();
        assert_small(&e3.add(&wpp), 1e-35, "E_{0,3} + wp'");
        let e4 = eis_jk(&EisParams::new(z.clone(), c.lattice.clone(), 0, 4).unwrap(), PREC)
            .unwrap();
        let wp2 = wp.mul(&wp).scale_i64(6).sub(&g2.scale_rational(&Rational::from((1, 2))));
        assert_small(&e4.sub(&wp2), 1e-33, "E_{0,4} - (6 wp^2 - g2/2)");
        let e5 = eis_jk(&EisParams::new(z.clone(), c.lattice.clone(), 0, 5).unwrap(), PREC)
            .unwrap();
        assert_small(&e5.add(&wp.mul(&wpp).scale_i64(12)), 1e-31, "E_{0,5} + 12 wp wp'");
    }
}

#[test]
fn wp_jet_matches_known_derivatives() {
    let c = ctx();
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let g2 = ComplexBall::from_rationals(&c.g2, &Rational::new(), PREC);
    for _ in 0..3 {
        let z = generic_z(&c, &mut rng);
        let (wp, wpp) = wp_eval(&z, &c.lattice, PREC).unwrap();
        let jet = wp_jet(&z, &c.lattice, 4, PREC).unwrap();
        assert_small(&jet[0].sub(&wp), 1e-35, "jet[0] = wp");
        assert_small(&jet[1].sub(&wpp), 1e-35, "jet[1] = wp'");
        let d2 = wp.mul(&wp).scale_i64(6).sub(&g2.scale_rational(&Rational::from((1, 2))));
        assert_small(&jet[2].sub(&d2), 1e-33, "jet[2] = 6 wp^2 - g2/2");
        let d3 = wp.mul(&wpp).scale_i64(12);
        assert_small(&jet[3].sub(&d3), 1e-31, "jet[3] = 12 wp wp'");
        let d4 = wpp.mul(&wpp).scale_i64(12).add(&wp.mul(&d2).scale_i64(12));
        assert_small(&jet[4].sub(&d4), 1e-29, "jet[4] = 12 wp'^2 + 12 wp wp''");
    }
}

#[test]
fn unit_symmetry_and_periodicity() {
    let c = ctx();
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    let i = ComplexBall::i(PREC);
    for (j, k) in [(0i32, 3u32), (-1, 4), (-2, 5)] {
        let z = generic_z(&c, &mut rng);
        let e = eis_jk(&EisParams::new(z.clone(), c.lattice.clone(), j, k).unwrap(), PREC)
            .unwrap();
        // i L = L, so E(iz, L) = i^{j-k} E(z, L)
        let eu = eis_jk(
            &EisParams::new(z.mul(&i), c.lattice.clone(), j, k).unwrap(),
            PREC,
        )
        .unwrap();
        assert_small(&eu.sub(&e.mul(&i.powi(j - k as i32))), 1e-30, "unit symmetry");
        // periodicity under both basis vectors
        let ep = eis_jk(
            &EisParams::new(z.add(&c.lattice.w1), c.lattice.clone(), j, k).unwrap(),
            PREC,
        )
        .unwrap();
        assert_small(&ep.sub(&e), 1e-30, "periodicity w1");
        let eq = eis_jk(
            &EisParams::new(z.add(&c.lattice.w2), c.lattice.clone(), j, k).unwrap(),
            PREC,
        )
        .unwrap();
        assert_small(&eq.sub(&e), 1e-30, "periodicity w2");
    }
}

#[test]
fn homogeneity() {
    // E_{j,k}(lambda z, lambda L) = lambda^{j-k} E_{j,k}(z, L), lambda = 2+i
    let c = ctx();
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    let lam = cb(2, 1);
    for (j, k) in [(0i32, 3u32), (-1, 4), (-1, 5), (-2, 5)] {
        let z = generic_z(&c, &mut rng);
        let e = eis_jk(&EisParams::new(z.clone(), c.lattice.clone(), j, k).unwrap(), PREC)
            .unwrap();
        let es = eis_jk(
            &EisParams::new(z.mul(&lam), c.lattice.scale(&lam), j, k).unwrap(),
            PREC,
        )
        .unwrap();
        assert_small(&es.sub(&e.mul(&lam.powi(j - k as i32))), 1e-25, "homogeneity");
    }
}

#[test]
fn conjugation_on_square_lattice() {
    // conj(L) = L for the reference lattice, so conj(E(conj z, L)) = E(z, L)
    let c = ctx();
    let mut rng = ChaCha8Rng::seed_from_u64(19);
    for (j, k) in [(0i32, 3u32), (-1, 4), (-2, 5)] {
        let z = generic_z(&c, &mut rng);
        let e = eis_jk(&EisParams::new(z.clone(), c.lattice.clone(), j, k).unwrap(), PREC)
            .unwrap();
        let ec = eis_jk(&EisParams::new(z.conj(), c.lattice.clone(), j, k).unwrap(), PREC)
            .unwrap();
        assert_small(&ec.conj().sub(&e), 1e-30, "conjugation");
    }
}

/// All residues of O/(alpha), one representative per class.
fn residues(a: &IdealK) -> Vec<QuadElem> {
    let alpha = a.gen.clone();
    let na = a.norm();
    let mut reps: Vec<QuadElem> = Vec::new();
    for m in 0..na {
        for n in 0..na {
            let r = QuadElem::new(alpha.field, m, n);
            if !reps.iter().any(|s| alpha.divides(&r.sub(s))) {
                reps.push(r);
            }
        }
    }
    reps
}

#[test]
fn smoothing_and_distribution() {
    let c = ctx();
    let mut rng = ChaCha8Rng::seed_from_u64(23);
    let a = IdealK::new(QuadElem::new(c.field, 2, 1));
    let one = IdealK::one(c.field);
    let reps = residues(&a);
    assert_eq!(reps.len(), 5);
    let alpha_emb = a.gen.embed(PREC);
    for (j, k) in [(0i32, 3u32), (-1, 4)] {
        let z = generic_z(&c, &mut rng);
        let p = EisParams::new(z.clone(), c.lattice.clone(), j, k).unwrap();
        // a = (1) vanishes identically
        assert!(eis_jk_smoothed(&p, &one, PREC).unwrap().abs().upper().to_f64() == 0.0);
        // recompute the two terms independently
        let sm = eis_jk_smoothed(&p, &a, PREC).unwrap();
        let t1 = eis_jk(&p, PREC).unwrap();
        let li = c.lattice.scale(&alpha_emb.inv());
        let t2 =
            eis_jk(&EisParams::new(z.clone(), li.clone(), j, k).unwrap(), PREC).unwrap();
        assert_small(&sm.sub(&t1.scale_i64(5).sub(&t2)), 1e-32, "smoothed combination");
        // distribution: sum over cosets of a^{-1}L/L equals Na^j E(z, a^{-1}L)
        let mut s = ComplexBall::zero(PREC);
        for r in &reps {
            let t = c.lattice.w2.mul(&r.embed(PREC)).div(&alpha_emb);
            let e = eis_jk(
                &EisParams::new(z.add(&t), c.lattice.clone(), j, k).unwrap(),
                PREC,
            )
            .unwrap();
            s = s.add(&e);
        }
        let mut rhs = t2.clone();
        if j == -1 {
            rhs = rhs.scale_rational(&Rational::from((1, 5)));
        }
        assert_small(&s.sub(&rhs), 1e-28, "coset distribution");
    }
}

#[test]
fn eis_jneg_direct_truncation_oracle() {
    // independent check of conjugate placement: brute-force truncation of
    // the defining double sum for E_{-1,5}
    let c = ctx();
    let z = c
        .lattice
        .point(&Rational::from((1, 3)), &Rational::from((2, 7)));
    let e = eis_jk(&EisParams::new(z.clone(), c.lattice.clone(), -1, 5).unwrap(), PREC)
        .unwrap();
    let wprec = 96;
    let (zr, zi) = z.to_f64s();
    let zz = rug::Complex::with_val(wprec, (zr, zi));
    let (w1r, w1i) = c.lattice.w1.to_f64s();
    let (w2r, w2i) = c.lattice.w2.to_f64s();
    let om1 = rug::Complex::with_val(wprec, (w1r, w1i));
    let om2 = rug::Complex::with_val(wprec, (w2r, w2i));
    let mut s = rug::Complex::with_val(wprec, 0);
    let rr = 220i64;
    for m in -rr..=rr {
        for n in -rr..=rr {
            let w = rug::Complex::with_val(wprec, &om1 * m) + rug::Complex::with_val(wprec, &om2 * n);
            use rug::ops::Pow;
            let u = rug::Complex::with_val(wprec, &zz + &w);
            let cu = rug::Complex::with_val(wprec, u.conj_ref());
            let u5 = rug::Complex::with_val(wprec, (&u).pow(5u32));
            s += cu / u5;
        }
    }
    // prefactor (k-1)! A^{-1}
    let a = a_const(&c.lattice).unwrap().to_f64s().0;
    let pref = 24.0 / a;
    let (sr, si) = (s.real().to_f64() * pref, s.imag().to_f64() * pref);
    let (er, ei) = e.to_f64s();
    let diff = ((sr - er).powi(2) + (si - ei).powi(2)).sqrt();
    let scale = (er * er + ei * ei).sqrt().max(1e-30);
    assert!(
        diff / scale < 2e-3,
        "truncated double sum vs row method: rel diff {:.3e}",
        diff / scale
    );
}

#[test]
fn djk_constants_and_additivity() {
    let c = ctx();
    let z = generic_z(&c, &mut ChaCha8Rng::seed_from_u64(29));
    // empty product (a constant) gives exactly zero
    for k in 1..=5 {
        let d = djk_via_log_derivative(&[], &z, k, PREC).unwrap();
        assert!(d.abs().upper().to_f64() == 0.0);
    }
    let a = IdealK::new(QuadElem::new(c.field, 2, 1));
    let factors = zeta_log_factors(&c, &c.lattice, &a).unwrap();
    assert_eq!(factors.len(), 2);
    // additivity of the log derivative over concatenation
    let d_all = djk_via_log_derivative(&factors, &z, 4, PREC).unwrap();
    let d0 = djk_via_log_derivative(&factors[..1], &z, 4, PREC).unwrap();
    let d1 = djk_via_log_derivative(&factors[1..], &z, 4, PREC).unwrap();
    assert_small(&d_all.sub(&d0.add(&d1)), 1e-35, "product rule");
    // inverse exponent negates
    let mut inv = factors.clone();
    for f in inv.iter_mut() {
        f.exp = 1;
    }
    let d_inv = djk_via_log_derivative(&inv, &z, 4, PREC).unwrap();
    assert_small(&d_all.add(&d_inv), 1e-35, "exponent sign");
    // evaluation at a pole of the product is rejected
    let zp = c
        .lattice
        .point(&Rational::from((4, 5)), &Rational::from((2, 5)));
    let at_pole = djk_via_log_derivative(&factors, &zp, 3, PREC);
    assert_eq!(at_pole.unwrap_err(), EisError::PoleOrZeroAtPoint);
}

#[test]
fn djk_finite_difference_oracle() {
    // 5-point third derivative of log R along z, step 2^-27, against the
    // jet route for k = 3
    let c = ctx();
    let a = IdealK::new(QuadElem::new(c.field, 2, 1));
    let factors = zeta_log_factors(&c, &c.lattice, &a).unwrap();
    let z = c
        .lattice
        .point(&Rational::from((1, 3)), &Rational::from((2, 7)));
    let d = djk_via_log_derivative(&factors, &z, 3, PREC).unwrap();
    let (dr, di) = d.to_f64s();

    let wprec = 256;
    let log_r = |zz: &ComplexBall| -> rug::Complex {
        let mut acc = rug::Complex::with_val(wprec, 0);
        for f in &factors {
            let w = f.scale.mul(zz).add(&f.shift);
            let (x, _) = wp_eval(&w, &f.lattice, PREC).unwrap();
            let v = x.sub(&f.pole_x);
            let vm = rug::Complex::with_val(wprec, (v.re().mid.clone(), v.im().mid.clone()));
            let l = vm.ln();
            acc += rug::Complex::with_val(wprec, &l * f.exp);
        }
        acc
    };
    let h = Rational::from((1, 1i64 << 27));
    let shift = |n: i64| {
        let hh = ComplexBall::from_rationals(&Rational::from(&h * Rational::from(n)), &Rational::new(), PREC);
        z.add(&hh)
    };
    let fm2 = log_r(&shift(-2));
    let fm1 = log_r(&shift(-1));
    let fp1 = log_r(&shift(1));
    let fp2 = log_r(&shift(2));
    // f''' ~ (f(+2h) - 2 f(+h) + 2 f(-h) - f(-2h)) / (2 h^3)
    let numer = rug::Complex::with_val(wprec, &fp2 - &fm2)
        - rug::Complex::with_val(wprec, &fp1 * 2i32)
        + rug::Complex::with_val(wprec, &fm1 * 2i32);
    // 2 h^3 = 2^-80 exactly for h = 2^-27
    let denom = Float::with_val(wprec, Float::i_exp(1, -80));
    let third = numer / denom;
    // del^3 log f = -(d/dz)^3 log f
    let (tr, ti) = (-third.real().to_f64(), -third.imag().to_f64());
    let diff = ((tr - dr).powi(2) + (ti - di).powi(2)).sqrt();
    let scale = (dr * dr + di * di).sqrt().max(1.0);
    assert!(
        diff / scale < 1e-6,
        "finite difference vs jet route: rel diff {:.3e}",
        diff / scale
    );
}

#[test]
fn cross_check_reference() {
    let c = ctx();
    let b = IdealK::one(c.field);
    let a = IdealK::new(QuadElem::new(c.field, 2, 1));
    // a 5-division point away from the (2+i)-division poles of both sides
    let z = c
        .lattice
        .point(&Rational::new(), &Rational::from((1, 5)));
    for k in [3u32, 4, 5] {
        let r = cross_check_djk(&c, &b, &a, &z, 0, k).unwrap();
        assert!(r.contains_zero(), "cross-check k={k} residual off zero");
        assert_small(&r, 1e-20, "cross-check residual radius");
    }
    // random non-pole points
    let mut rng = ChaCha8Rng::seed_from_u64(31);
    for _ in 0..5 {
        let z = generic_z(&c, &mut rng);
        for k in [3u32, 4, 5] {
            let r = cross_check_djk(&c, &b, &a, &z, 0, k).unwrap();
            assert!(r.contains_zero(), "random cross-check k={k}");
            assert_small(&r, 1e-20, "random cross-check radius");
        }
    }
    // degenerate a = (1): gamma is constant, both sides vanish
    let one = IdealK::one(c.field);
    let r = cross_check_djk(&c, &b, &one, &z, 0, 4).unwrap();
    assert!(r.abs().upper().to_f64() == 0.0);
    // j < 0 is definitional
    let r = cross_check_djk(&c, &b, &a, &z, -1, 4).unwrap();
    assert!(r.abs().upper().to_f64() == 0.0);
}
