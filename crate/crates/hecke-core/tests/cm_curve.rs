//! Curve context oracles: period pinning, Weierstrass evaluation against
//! closed-form values, the exact torsion group against the analytic group
//! law, endomorphisms, isogenies, and finite-field reduction.

use hecke_core::arith::ball::ComplexBall;
use hecke_core::arith::ideal::IdealK;
use hecke_core::arith::quad::QuadElem;
use hecke_core::cm_curve::{
    eigenbasis, parse_curve_config, reduce_curve, wp_eval, CMCurveCtx, CurveError, IsogenyData,
    Lattice, REFERENCE_CONFIG,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rug::Rational;

const PREC: u32 = 192;

fn ctx() -> CMCurveCtx {
    parse_curve_config(REFERENCE_CONFIG, PREC).expect("reference config")
}

fn rat(n: i64, d: i64) -> Rational {
    Rational::from((n, d))
}

fn assert_small(ball: &ComplexBall, bound: f64, what: &str) {
    assert!(ball.contains_zero(), "{what}: ball excludes 0: {ball}");
    let (re, im) = ball.to_f64s();
    let mag = (re * re + im * im).sqrt() + ball.rad_f64();
    assert!(mag < bound, "{what}: |{ball}| = {mag:.3e} not below {bound:.1e}");
}

#[test]
fn reference_context_constructs() {
    let c = ctx();
    // lemniscatic period: pi / agm(sqrt 2, 1)
    let om = c.omega.to_f64();
    assert!((om - 2.6220575542921198).abs() < 1e-12, "omega = {om}");
    assert!(c.omega.rad.to_f64() < 1e-40);
    // hint far off is rejected
    let bad = REFERENCE_CONFIG.replace("2.6220575542921198", "2.62206");
    assert!(matches!(parse_curve_config(&bad, PREC), Err(CurveError::BadConfig(_))));
}

#[test]
fn config_rejects_bad_inputs() {
    // invariants that do not come from a lattice of shape Omega*O_K:
    // g3 must vanish on the square lattice
    let cfg = REFERENCE_CONFIG.replace("g3 = 0", "g3 = 1");
    assert!(matches!(parse_curve_config(&cfg, PREC), Err(CurveError::BadConfig(_))));
    // singular cubic
    let cfg = REFERENCE_CONFIG.replace("g2 = 4", "g2 = 0");
    assert!(matches!(parse_curve_config(&cfg, PREC), Err(CurveError::BadConfig(_))));
    // syntax
    assert!(parse_curve_config("disc -4", PREC).is_err());
    assert!(parse_curve_config("disc = -4\n", PREC).is_err());
}

#[test]
fn wp_half_period_and_cubic() {
    let c = ctx();
    // z = Omega/2 is the real half period: wp = e1 = 1, wp' = 0
    let z = c.lattice.w2.scale_rational(&rat(1, 2));
    let (x, y) = wp_eval(&z, &c.lattice, PREC).unwrap();
    assert_small(&x.sub(&ComplexBall::one(PREC)), 1e-40, "wp(omega/2) - 1");
    assert_small(&y, 1e-40, "wp'(omega/2)");
    // cubic residual 4x^3 - 4x - y^2 at a generic point
    let z = c.lattice.point(&rat(1, 5), &rat(2, 5));
    let (x, y) = wp_eval(&z, &c.lattice, PREC).unwrap();
    let res = x.powi(3).scale_i64(4).sub(&x.scale_i64(4)).sub(&y.mul(&y));
    assert_small(&res, 1e-40, "weierstrass residual");
}

#[test]
fn wp_periodicity_and_evenness() {
    let c = ctx();
    let z = c.lattice.point(&rat(1, 3), &rat(1, 7));
    let (x, y) = wp_eval(&z, &c.lattice, PREC).unwrap();
    let (xp, yp) = wp_eval(&z.add(&c.lattice.w1), &c.lattice, PREC).unwrap();
    assert!(x.overlaps(&xp) && y.overlaps(&yp), "periodicity in w1");
    let (xm, ym) = wp_eval(&z.neg(), &c.lattice, PREC).unwrap();
    assert!(x.overlaps(&xm), "wp is even");
    assert!(y.overlaps(&ym.neg()), "wp' is odd");
}

#[test]
fn wp_pole_detection() {
    let c = ctx();
    assert_eq!(
        wp_eval(&ComplexBall::zero(PREC), &c.lattice, PREC).unwrap_err(),
        CurveError::PoleAtLatticePoint
    );
    let w = c.lattice.w1.add(&c.lattice.w2.scale_i64(-3));
    assert_eq!(wp_eval(&w, &c.lattice, PREC).unwrap_err(), CurveError::PoleAtLatticePoint);
}

#[test]
fn wp_homogeneity() {
    // wp(lambda z, lambda L) = lambda^{-2} wp(z, L) at 1e-30
    let prec = 256;
    let c = parse_curve_config(REFERENCE_CONFIG, prec).unwrap();
    let z = c.lattice.point(&rat(2, 7), &rat(3, 11));
    let (x, y) = wp_eval(&z, &c.lattice, prec).unwrap();
    for (la, lb) in [(0i64, 1i64), (1, 1)] {
        let lam = ComplexBall::from_i64(la, prec).add(&ComplexBall::i(prec).scale_i64(lb));
        let scaled = Lattice::new(c.lattice.w1.mul(&lam), c.lattice.w2.mul(&lam)).unwrap();
        let (xs, ys) = wp_eval(&z.mul(&lam), &scaled, prec).unwrap();
        let dx = xs.sub(&x.mul(&lam.powi(-2)));
        let dy = ys.sub(&y.mul(&lam.powi(-3)));
        assert_small(&dx, 1e-30, "wp homogeneity");
        assert_small(&dy, 1e-30, "wp' homogeneity");
    }
}

#[test]
fn torsion_point_basics() {
    let c = ctx();
    let inf = c.torsion_point(&rat(0, 1), &rat(3, 1)).unwrap();
    assert!(inf.is_infinity());
    // non-q-power denominator rejected
    assert!(c.torsion_point(&rat(1, 3), &rat(0, 1)).is_err());
    let p = c.torsion_point(&rat(1, 5), &rat(0, 1)).unwrap();
    assert_eq!(c.tp_order(&p), 5);
    assert!(c.tp_scalar(5, &p).unwrap().is_infinity());
    assert!(!c.tp_scalar(4, &p).unwrap().is_infinity());
    let p2 = c.torsion_point(&rat(3, 25), &rat(22, 25)).unwrap();
    assert_eq!(c.tp_order(&p2), 25);
    // coordinates reduce mod 1
    let q = c.torsion_point(&rat(6, 5), &rat(-4, 5)).unwrap();
    assert_eq!(q.r1, rat(1, 5));
    assert_eq!(q.r2, rat(1, 5));
}

/// x and y of P+Q by the chord (or tangent) construction on the model
/// y^2 = 4x^3 - g2 x - g3.
fn group_law_sum(
    c: &CMCurveCtx,
    p: &(ComplexBall, ComplexBall),
    q: &(ComplexBall, ComplexBall),
    same: bool,
) -> Option<(ComplexBall, ComplexBall)> {
    let prec = PREC;
    let lam = if same {
        // 2y y' = 12x^2 - g2
        let num = p.0.mul(&p.0).scale_i64(12).sub(&ComplexBall::from_rationals(
            &c.g2,
            &Rational::new(),
            prec,
        ));
        num.div(&p.1.scale_i64(2))
    } else {
        if p.0.overlaps(&q.0) {
            return None; // chord would be vertical or ill-conditioned
        }
        q.1.sub(&p.1).div(&q.0.sub(&p.0))
    };
    let x3 = lam.mul(&lam).scale_rational(&rat(1, 4)).sub(&p.0).sub(&q.0);
    let y3 = p.1.add(&lam.mul(&x3.sub(&p.0))).neg();
    Some((x3, y3))
}

#[test]
fn delta_additivity_against_group_law() {
    let c = ctx();
    let mut rng = ChaCha8Rng::seed_from_u64(420);
    let mut done = 0;
    while done < 50 {
        let den = if rng.gen_bool(0.5) { 5 } else { 25 };
        let a = c
            .torsion_point(&rat(rng.gen_range(1..den), den), &rat(rng.gen_range(0..den), den))
            .unwrap();
        let b = c
            .torsion_point(&rat(rng.gen_range(1..den), den), &rat(rng.gen_range(0..den), den))
            .unwrap();
        let s = c.tp_add(&a, &b).unwrap();
        if a.is_infinity() || b.is_infinity() || s.is_infinity() {
            continue;
        }
        let same = a.same_coords(&b);
        let sum = match group_law_sum(&c, a.xy.as_ref().unwrap(), b.xy.as_ref().unwrap(), same) {
            Some(v) => v,
            None => continue,
        };
        let (sx, sy) = s.xy.as_ref().unwrap();
        assert!(sx.overlaps(&sum.0), "x of sum: {} vs {}", sx, sum.0);
        assert!(sy.overlaps(&sum.1), "y of sum: {} vs {}", sy, sum.1);
        done += 1;
    }
}

#[test]
fn endo_act_reference() {
    let c = ctx();
    let f = c.field;
    let p = c.torsion_point(&rat(2, 25), &rat(7, 25)).unwrap();
    // mu = 1 is the identity
    let id = c.endo_act(&f.one(), &p).unwrap();
    assert!(id.same_coords(&p));
    // mu = i: x(iP) = -x(P), y(iP) = i y(P)  (wp(iz) = -wp(z), wp'(iz) = i wp'(z))
    let ip = c.endo_act(&f.tau(), &p).unwrap();
    let (x, y) = p.xy.as_ref().unwrap();
    let (xi, yi) = ip.xy.as_ref().unwrap();
    assert!(xi.overlaps(&x.neg()), "x(iP) = -x(P)");
    assert!(yi.overlaps(&y.mul(&ComplexBall::i(PREC))), "y(iP) = i y(P)");
    // mu = 2 matches doubling under the group law
    let dp = c.endo_act(&QuadElem::new(f, 2, 0), &p).unwrap();
    let tangent = group_law_sum(&c, p.xy.as_ref().unwrap(), p.xy.as_ref().unwrap(), true).unwrap();
    let (dx, dy) = dp.xy.as_ref().unwrap();
    assert!(dx.overlaps(&tangent.0), "x(2P) via tangent");
    assert!(dy.overlaps(&tangent.1), "y(2P) via tangent");
    // endomorphism relation: (a+b tau)P = aP + b tauP
    let mu = QuadElem::new(f, 3, 2);
    let lhs = c.endo_act(&mu, &p).unwrap();
    let rhs = c
        .tp_add(&c.tp_scalar(3, &p).unwrap(), &c.endo_act(&f.tau(), &c.tp_scalar(2, &p).unwrap()).unwrap())
        .unwrap();
    assert!(lhs.same_coords(&rhs));
}

#[test]
fn isogeny_reference() {
    let c = ctx();
    let f = c.field;
    // b = (1): identity map on xy
    let triv = IsogenyData::new(&c, IdealK::one(f)).unwrap();
    let p = c.torsion_point(&rat(1, 5), &rat(2, 5)).unwrap();
    let img = triv.apply(&c, &p).unwrap().unwrap();
    let (x, y) = p.xy.as_ref().unwrap();
    assert!(img.0.overlaps(x) && img.1.overlaps(y), "b = (1) is the identity");

    // b = (2+i): normalized generator is the unit multiple congruent 1 mod f
    let b = IdealK::new(QuadElem::new(f, 2, 1));
    let iso = IsogenyData::new(&c, b).unwrap();
    assert_eq!(iso.lambda, QuadElem::new(f, -1, 2));

    // kernel inside E[5] has exactly N(b) = 5 points
    let mut kernel = 0;
    let mut points = Vec::new();
    for i in 0..5 {
        for j in 0..5 {
            let pt = c.torsion_point(&rat(i, 5), &rat(j, 5)).unwrap();
            if iso.in_kernel(&c, &pt) {
                kernel += 1;
            } else {
                points.push(pt);
            }
        }
    }
    assert_eq!(kernel, 5);
    // fibers: P and P + K have the same image for K in the kernel
    let ker_pt = (0..5)
        .flat_map(|i| (0..5).map(move |j| (i, j)))
        .map(|(i, j)| c.torsion_point(&rat(i, 5), &rat(j, 5)).unwrap())
        .find(|pt| !pt.is_infinity() && iso.in_kernel(&c, pt))
        .expect("nontrivial kernel point");
    let p = points.iter().find(|pt| !iso.in_kernel(&c, pt)).unwrap();
    let shifted = c.tp_add(p, &ker_pt).unwrap();
    let im1 = iso.apply(&c, p).unwrap().unwrap();
    let im2 = iso.apply(&c, &shifted).unwrap().unwrap();
    assert!(im1.0.overlaps(&im2.0) && im1.1.overlaps(&im2.1), "kernel translates collapse");
    // and the image lands on the target curve: y^2 = 4x^3 - g2' x - g3'
    // with the invariants of L_b = unit * L; unit in mu_K means same curve
    let res = im1.0.powi(3).scale_i64(4).sub(&im1.0.scale_i64(4)).sub(&im1.1.mul(&im1.1));
    assert_small(&res, 1e-35, "image satisfies the reference Weierstrass equation");
}

#[test]
fn eigenbasis_diagonalizes_endo_action() {
    let c = ctx();
    let f = c.field;
    let nu = QuadElem::new(f, 2, 1);
    for n in [1u32, 2] {
        let qn = 5i64.pow(n);
        let (p1, p2) = eigenbasis(&c, &nu, n).unwrap();
        assert_eq!(c.tp_order(&p1), qn);
        assert_eq!(c.tp_order(&p2), qn);
        let pq = IdealK::new(nu.clone()).pow(n);
        let pqc = IdealK::new(nu.conj()).pow(n);
        // p1 is killed by nu^n, p2 by conj(nu)^n
        assert!(c.endo_act(&nu.pow(n), &p1).unwrap().is_infinity());
        assert!(c.endo_act(&nu.conj().pow(n), &p2).unwrap().is_infinity());
        for mu in [QuadElem::new(f, 1, 1), QuadElem::new(f, 3, 0), QuadElem::new(f, 2, 3)] {
            // eigenvalue on each side: the integer residue of mu mod the prime power
            let c1 = (0..qn)
                .find(|&t| pq.contains(&mu.sub(&QuadElem::new(f, t as i128, 0))))
                .expect("residue");
            let c2 = (0..qn)
                .find(|&t| pqc.contains(&mu.sub(&QuadElem::new(f, t as i128, 0))))
                .expect("residue");
            assert!(c.endo_act(&mu, &p1).unwrap().same_coords(&c.tp_scalar(c1, &p1).unwrap()));
            assert!(c.endo_act(&mu, &p2).unwrap().same_coords(&c.tp_scalar(c2, &p2).unwrap()));
        }
    }
}

#[test]
fn reduce_curve_reference_mod_13() {
    let c = ctx();
    let red = reduce_curve(&c, 13, 1, 64).unwrap();

    // independent exhaustive count on the original model y^2 = 4x^3 - 4x
    let mut count = 1u64;
    for x in 0..13u64 {
        for y in 0..13u64 {
            if (y * y) % 13 == (4 * x * x * x + 13 * 13 * 4 - 4 * x) % 13 {
                count += 1;
            }
        }
    }
    assert!(count == 8 || count == 20, "count oracle: {count}");
    assert_eq!(red.count_l, count);

    // Frobenius consistency: N(pi - 1) = #E(F_13), N(pi) = 13
    let one = c.field.one();
    assert_eq!(red.frob.norm(), 13);
    assert_eq!(red.frob.sub(&one).norm(), count as i128);

    // r is the order of pi in (O/5)^x
    let qn = 5i128;
    let mut acc = one.clone();
    let mut ord = 0u32;
    loop {
        ord += 1;
        let t = acc.mul(&red.frob);
        acc = QuadElem::new(c.field, t.a.rem_euclid(qn), t.b.rem_euclid(qn));
        if acc == one {
            break;
        }
        assert!(ord < 1000);
    }
    assert_eq!(red.r, ord);

    // basis points have exact order 5 and are independent by construction
    let (p1, p2) = (&red.basis.0, &red.basis.1);
    assert!(red.on_curve(p1) && red.on_curve(p2));
    assert!(red.scalar_mul(5, p1).is_none() && p1.is_some());
    assert!(red.scalar_mul(5, p2).is_none() && p2.is_some());
    assert_eq!(red.torsion_points().len(), 25);

    // tau matrix satisfies tau^2 = -1 mod 5
    let m = red.mat_tau;
    let mul = |a: [[u64; 2]; 2], b: [[u64; 2]; 2]| {
        let mut o = [[0u64; 2]; 2];
        for i in 0..2 {
            for j in 0..2 {
                o[i][j] = (a[i][0] * b[0][j] + a[i][1] * b[1][j]) % 5;
            }
        }
        o
    };
    assert_eq!(mul(m, m), [[4, 0], [0, 4]], "tau^2 = -1 on E[5]");

    // the Frobenius matrix from the endomorphism algebra matches the
    // geometric Frobenius action on the basis
    let fm = red.endo_matrix(&red.frob);
    let f1 = red.decompose(&red.frobenius_point(p1)).unwrap();
    let f2 = red.decompose(&red.frobenius_point(p2)).unwrap();
    assert_eq!([[f1.0, f2.0], [f1.1, f2.1]], fm);

    // reduction of the identity is the identity
    assert_eq!(red.decompose(&None), Some((0, 0)));

    // bad reduction rejected
    assert!(matches!(reduce_curve(&c, 2, 1, 8), Err(CurveError::BadReduction)));
    assert!(matches!(reduce_curve(&c, 5, 1, 8), Err(CurveError::BadReduction)));
    // torsion field cap
    assert!(matches!(reduce_curve(&c, 13, 1, 1), Err(CurveError::TorsionNotRational)));
}
