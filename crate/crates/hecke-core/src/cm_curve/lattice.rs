//! Period lattices and certified Weierstrass evaluation.
//!
//! A lattice is stored by an ordered basis with `Im(w1/w2) > 0`.  The
//! Weierstrass functions are evaluated by reducing the argument into a
//! fundamental parallelogram and summing lattice rows: each row is a closed
//! cotangent form, and the discarded rows are covered by an explicit
//! exponentially small bound folded into the ball radius.

use super::{CurveError, Result};
use crate::arith::ball::{ComplexBall, RealBall};
use crate::eisenstein::rows::{sk_tail_rows, sk_values};
use rug::Float;

/// How many rows we are willing to sum before giving up.
const MAX_ROWS: i64 = 20_000;

#[derive(Debug, Clone)]
pub struct Lattice {
    pub w1: ComplexBall,
    pub w2: ComplexBall,
}

impl Lattice {
    pub fn new(w1: ComplexBall, w2: ComplexBall) -> Result<Lattice> {
        let tau = w1.div(&w2);
        let low = tau.im().lower();
        if !(low.is_sign_positive() && !low.is_zero()) {
            return Err(CurveError::BadBasis);
        }
        Ok(Lattice { w1, w2 })
    }

    pub fn prec(&self) -> u32 {
        self.w1.prec().max(self.w2.prec())
    }

    pub fn tau(&self) -> ComplexBall {
        self.w1.div(&self.w2)
    }

    /// The scaled lattice `c*L` (orientation is preserved: `|c| != 0`).
    pub fn scale(&self, c: &ComplexBall) -> Lattice {
        Lattice { w1: self.w1.mul(c), w2: self.w2.mul(c) }
    }

    /// Point `r1*w1 + r2*w2`.
    pub fn point(&self, r1: &rug::Rational, r2: &rug::Rational) -> ComplexBall {
        self.w1.scale_rational(r1).add(&self.w2.scale_rational(r2))
    }
}

/// Reduce `zh` modulo `Z + Z*tau` to (approximately) the centered
/// fundamental parallelogram.  Uses midpoint coordinates to pick the integer
/// shifts; the subtraction itself is ball arithmetic, so the result is a
/// rigorous enclosure of a lattice translate of the input.
pub(crate) fn reduce_mod_tau(zh: &ComplexBall, tau: &ComplexBall) -> ComplexBall {
    let (zr, zi) = zh.to_f64s();
    let (tr, ti) = tau.to_f64s();
    let n1 = (zi / ti).round();
    let n2 = (zr - n1 * tr).round();
    let mut out = zh.clone();
    if n1 != 0.0 {
        out = out.sub(&tau.scale_i64(n1 as i64));
    }
    if n2 != 0.0 {
        out = out.sub(&ComplexBall::from_i64(n2 as i64, zh.prec()));
    }
    out
}

/// Certified `(wp, wp')` at `z` with respect to `L`.
///
/// The normalized variable `zh = z/w2` is summed against `Z + Z*tau`:
///
///   wp(zh)  = S_2(zh) - pi^2/3
///             + sum_{n>=1} [S_2(zh+n tau) + S_2(zh-n tau) - 2 S_2(n tau)]
///   wp'(zh) = -2 sum_{n in Z} S_3(zh + n tau)
///
/// (absolute convergence of the defining double sums justifies the row
/// grouping), then scaled back by `w2^{-2}` and `w2^{-3}`.
pub fn wp_eval(z: &ComplexBall, l: &Lattice, prec: u32) -> Result<(ComplexBall, ComplexBall)> {
    let tau = l.tau();
    let zh = z.div(&l.w2);
    let zr = reduce_mod_tau(&zh, &tau);

    // pole detection: the reduced point can only collide with the nine
    // lattice points adjacent to the fundamental parallelogram
    for a in -1..=1i64 {
        for b in -1..=1i64 {
            let s = tau.scale_i64(a).add(&ComplexBall::from_i64(b, prec));
            if zr.sub(&s).contains_zero() {
                return Err(CurveError::PoleAtLatticePoint);
            }
        }
    }

    let im_tau = tau.im();
    let it = im_tau.to_f64();
    let iz = zr.im().to_f64().abs();
    // rows needed so that e^{-2 pi (N it - iz)} is below 2^{-prec-8}
    let need = ((prec as f64 + 8.0) * std::f64::consts::LN_2 / (2.0 * std::f64::consts::PI)
        + iz)
        / it;
    let n_rows = (need.ceil() as i64 + 1).max(2);
    if n_rows > MAX_ROWS {
        return Err(CurveError::PrecisionExhausted);
    }

    let pi = RealBall::pi(prec);
    let pi2_3 = {
        let p2 = pi.mul(&pi);
        ComplexBall::from_re_im(p2.div_u32(3), RealBall::zero(prec), prec)
    };

    let s0 = sk_values(&zr, 3);
    let mut wp = s0[0].sub(&pi2_3);
    let mut wpp = s0[1].clone();
    for n in 1..=n_rows {
        let shift = tau.scale_i64(n);
        let sp = sk_values(&zr.add(&shift), 3);
        let sm = sk_values(&zr.sub(&shift), 3);
        let sc = sk_values(&shift, 2);
        wp = wp.add(&sp[0]).add(&sm[0]).sub(&sc[0]).sub(&sc[0]);
        wpp = wpp.add(&sp[1]).add(&sm[1]);
    }
    wpp = wpp.scale_i64(-2);

    // tails: rows n > n_rows
    let t_shift = im_tau.mul_i64(n_rows + 1).sub(&zr.im().abs());
    let t_const = im_tau.mul_i64(n_rows + 1);
    let tail_wp = {
        let a = sk_tail_rows(2, &t_shift, &im_tau);
        let b = sk_tail_rows(2, &t_const, &im_tau);
        Float::with_val(64, 2 * (a + b))
    };
    let tail_wpp = Float::with_val(64, 4 * sk_tail_rows(3, &t_shift, &im_tau));
    if !tail_wp.is_finite() || !tail_wpp.is_finite() {
        return Err(CurveError::PrecisionExhausted);
    }
    wp = wp.add_error(&tail_wp);
    wpp = wpp.add_error(&tail_wpp);

    // scale back to L
    let w2i = l.w2.inv();
    let w2i2 = w2i.mul(&w2i);
    Ok((wp.mul(&w2i2), wpp.mul(&w2i2).mul(&w2i)))
}

/// Certified `[wp, wp', ..., wp^(kmax)]` at `z` with respect to `L`.
///
/// Differentiating the row form of `wp_eval` term by term:
/// `S_2^{(m)} = (-1)^m (m+1)! S_{m+2}`, so for `m >= 1`
///
///   wp^(m)(zh) = (-1)^m (m+1)! sum_{n in Z} S_{m+2}(zh + n tau)
///
/// with no row constants (the defining sum is already absolutely
/// convergent), scaled back by `w2^{-(m+2)}`.  The `m = 0` entry is the
/// `wp_eval` row form.
pub fn wp_jet(z: &ComplexBall, l: &Lattice, kmax: u32, prec: u32) -> Result<Vec<ComplexBall>> {
    let tau = l.tau();
    let zh = z.div(&l.w2);
    let zr = reduce_mod_tau(&zh, &tau);
    for a in -1..=1i64 {
        for b in -1..=1i64 {
            let s = tau.scale_i64(a).add(&ComplexBall::from_i64(b, prec));
            if zr.sub(&s).contains_zero() {
                return Err(CurveError::PoleAtLatticePoint);
            }
        }
    }

    let im_tau = tau.im();
    let it = im_tau.to_f64();
    let iz = zr.im().to_f64().abs();
    let need = ((prec as f64 + 8.0) * std::f64::consts::LN_2 / (2.0 * std::f64::consts::PI)
        + iz)
        / it;
    let n_rows = (need.ceil() as i64 + 1).max(2);
    if n_rows > MAX_ROWS {
        return Err(CurveError::PrecisionExhausted);
    }

    let pi = RealBall::pi(prec);
    let pi2_3 = {
        let p2 = pi.mul(&pi);
        ComplexBall::from_re_im(p2.div_u32(3), RealBall::zero(prec), prec)
    };

    let kk = kmax as usize;
    let s0 = sk_values(&zr, kmax + 2);
    let mut acc: Vec<ComplexBall> = (0..=kk).map(|m| s0[m].clone()).collect();
    acc[0] = acc[0].sub(&pi2_3);
    for n in 1..=n_rows {
        let shift = tau.scale_i64(n);
        let sp = sk_values(&zr.add(&shift), kmax + 2);
        let sm = sk_values(&zr.sub(&shift), kmax + 2);
        let sc = sk_values(&shift, 2);
        for m in 0..=kk {
            acc[m] = acc[m].add(&sp[m]).add(&sm[m]);
        }
        acc[0] = acc[0].sub(&sc[0]).sub(&sc[0]);
    }

    let t_shift = im_tau.mul_i64(n_rows + 1).sub(&zr.im().abs());
    let t_const = im_tau.mul_i64(n_rows + 1);
    let tail0 = {
        let a = sk_tail_rows(2, &t_shift, &im_tau);
        let b = sk_tail_rows(2, &t_const, &im_tau);
        Float::with_val(64, 2 * (a + b))
    };
    if !tail0.is_finite() {
        return Err(CurveError::PrecisionExhausted);
    }
    acc[0] = acc[0].add_error(&tail0);

    let w2i = l.w2.inv();
    let mut sign_fact = 1i64; // (-1)^m (m+1)!
    let mut w2pow = w2i.mul(&w2i);
    let mut out = Vec::with_capacity(kk + 1);
    for (m, a) in acc.into_iter().enumerate() {
        let mut v = a;
        if m >= 1 {
            sign_fact = -sign_fact * (m as i64 + 1);
            let tail = Float::with_val(
                64,
                2 * sk_tail_rows(m as u32 + 2, &t_shift, &im_tau),
            );
            if !tail.is_finite() {
                return Err(CurveError::PrecisionExhausted);
            }
            v = v.add_error(&tail).scale_i64(sign_fact);
            w2pow = w2pow.mul(&w2i);
        }
        out.push(v.mul(&w2pow));
    }
    Ok(out)
}

/// Lattice invariants `g2(L) = 60 G_4(L)` and `g3(L) = 140 G_6(L)` by row
/// summation: for even `k`, `G_k(Z + Z tau) = 2 zeta(k) + 2 sum_{n>=1}
/// S_k(n tau)`, and `G_k(L) = w2^{-k} G_k(Z + Z tau)`.
pub fn lattice_invariants(l: &Lattice, prec: u32) -> Result<(ComplexBall, ComplexBall)> {
    let tau = l.tau();
    let it = tau.im().to_f64();
    let n_rows =
        (((prec as f64 + 8.0) * std::f64::consts::LN_2 / (2.0 * std::f64::consts::PI) / it)
            .ceil() as i64
            + 1)
            .max(2);
    if n_rows > MAX_ROWS {
        return Err(CurveError::PrecisionExhausted);
    }
    let pi = RealBall::pi(prec);
    let pi2 = pi.mul(&pi);
    let pi4 = pi2.mul(&pi2);
    let pi6 = pi4.mul(&pi2);
    // zeta(4) = pi^4/90, zeta(6) = pi^6/945
    let mut g4 = ComplexBall::from_re_im(pi4.div_u32(45), RealBall::zero(prec), prec);
    let mut g6 = ComplexBall::from_re_im(
        pi6.mul_i64(2).div_u32(945),
        RealBall::zero(prec),
        prec,
    );
    for n in 1..=n_rows {
        let s = sk_values(&tau.scale_i64(n), 6);
        g4 = g4.add(&s[2].scale_i64(2));
        g6 = g6.add(&s[4].scale_i64(2));
    }
    let im_tau = tau.im();
    let t0 = im_tau.mul_i64(n_rows + 1);
    g4 = g4.add_error(&Float::with_val(64, 2 * sk_tail_rows(4, &t0, &im_tau)));
    g6 = g6.add_error(&Float::with_val(64, 2 * sk_tail_rows(6, &t0, &im_tau)));

    let w2i = l.w2.inv();
    let w2i2 = w2i.mul(&w2i);
    let w2i4 = w2i2.mul(&w2i2);
    let w2i6 = w2i4.mul(&w2i2);
    Ok((g4.mul(&w2i4).scale_i64(60), g6.mul(&w2i6).scale_i64(140)))
}

/// Arithmetic-geometric mean of two positive real balls.
pub fn agm(a: &RealBall, b: &RealBall) -> Result<RealBall> {
    let prec = a.prec().max(b.prec());
    if !a.lower().is_sign_positive() || !b.lower().is_sign_positive() {
        return Err(CurveError::BadBasis);
    }
    let mut x = a.clone();
    let mut y = b.clone();
    let target = {
        let mut t = Float::with_val(64, 1u32);
        t >>= prec.saturating_sub(8) as i32;
        t
    };
    let mut diff = x.sub(&y).abs().upper();
    for _ in 0..(64 + prec / 4) {
        if diff < target {
            break;
        }
        let m = x.add(&y).div_u32(2);
        let g = x.mul(&y).sqrt();
        x = m;
        y = g;
        diff = x.sub(&y).abs().upper();
    }
    // the limit lies between the final iterates
    Ok(x.add(&y).div_u32(2).add_err(&diff))
}

trait AddErr {
    fn add_err(&self, extra: &Float) -> RealBall;
}
impl AddErr for RealBall {
    fn add_err(&self, extra: &Float) -> RealBall {
        let mut rad = Float::with_val(64, &self.rad + extra);
        if rad < 0 {
            rad = Float::new(64);
        }
        RealBall { mid: self.mid.clone(), rad }
    }
}

/// Real `k`-th root of a positive ball.
pub fn real_root(x: &RealBall, k: u32) -> Result<RealBall> {
    let low = x.lower();
    if !(low.is_sign_positive() && !low.is_zero()) {
        return Err(CurveError::PrecisionExhausted);
    }
    let prec = x.prec();
    let mid = Float::with_val(prec, x.mid.clone().root(k));
    // Lipschitz bound: d/dt t^{1/k} = t^{1/k-1}/k, maximal at the lower end
    let root_low = Float::with_val(prec, low.clone().root(k));
    let lip = Float::with_val(64, root_low / (Float::with_val(64, low) * k));
    let mut ulp = Float::with_val(64, mid.clone().abs());
    ulp >>= prec.saturating_sub(1) as i32;
    let rad = Float::with_val(64, Float::with_val(64, lip * &x.rad) + ulp);
    Ok(RealBall { mid, rad })
}
