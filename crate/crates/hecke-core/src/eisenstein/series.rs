//! The Eisenstein–Kronecker series
//!
//!   E_{j,k}(z, L) = (k-1)! A(L)^j sum'_{w in L} (zbar+wbar)^{k-j} / |z+w|^{2k}
//!
//! in the absolute convergence region `0 <= -j < k`, `k+j >= 3`, and the
//! smoothed combination `E_{j,k}(z; L, a) = (Na) E_{j,k}(z, L) -
//! E_{j,k}(z, a^{-1}L)`.
//!
//! Writing `m = -j`, the summand is `conj(z+w)^m / (z+w)^k`.  On the
//! normalized lattice `Z + Z tau` the conjugate along a row is an affine
//! offset: with `u = zh + a + n tau` (`a` running over `Z`),
//! `conj(u) = u + c_n` where `c_n = -2i Im(zh + n tau)` is constant on the
//! row.  Expanding `(u + c_n)^m` binomially turns each row into a
//! combination of the closed forms `S_{k-s}` with `k-s >= k+j >= 3`, so the
//! rows converge exponentially and the discarded ones are covered by
//! `rows::weighted_tail`.

use super::rows::{sk_values, weighted_tail};
use super::{EisError, Result};
use crate::arith::ball::{ComplexBall, RealBall};
use crate::arith::ideal::IdealK;
use crate::cm_curve::lattice::reduce_mod_tau;
use crate::cm_curve::Lattice;
use rug::Float;

const MAX_ROWS: i64 = 20_000;

/// `A(L) = (1/2 pi i)(w1 conj(w2) - conj(w1) w2)`, a real positive number
/// equal to `area(C/L)/pi`.  Positivity is certified; a basis that cannot be
/// certified positively oriented is rejected.
pub fn a_const(l: &Lattice) -> Result<ComplexBall> {
    let prec = l.prec();
    let num = l.w1.mul(&l.w2.conj()).sub(&l.w1.conj().mul(&l.w2));
    let two_pi_i = ComplexBall::from_re_im(RealBall::zero(prec), RealBall::pi(prec), prec)
        .scale_i64(2);
    let a = num.div(&two_pi_i);
    let low = a.re().lower();
    if !(low.is_sign_positive() && !low.is_zero()) {
        return Err(EisError::BasisOrientation);
    }
    Ok(a)
}

#[derive(Debug, Clone)]
pub struct EisParams {
    pub j: i32,
    pub k: u32,
    pub z: ComplexBall,
    pub l: Lattice,
}

impl EisParams {
    pub fn new(z: ComplexBall, l: Lattice, j: i32, k: u32) -> Result<EisParams> {
        if j > 0 || (-j) as u32 >= k || (k as i64 + j as i64) < 3 {
            return Err(EisError::ConvergenceRegion);
        }
        Ok(EisParams { j, k, z, l })
    }
}

/// Certified `E_{j,k}(z, L)`.
pub fn eis_jk(p: &EisParams, prec: u32) -> Result<ComplexBall> {
    if p.j > 0 || (-p.j) as u32 >= p.k || (p.k as i64 + p.j as i64) < 3 {
        return Err(EisError::ConvergenceRegion);
    }
    let m = (-p.j) as u32;
    let k = p.k;
    let tau = p.l.tau();
    let zh = p.z.div(&p.l.w2);
    let zr = reduce_mod_tau(&zh, &tau);

    // the series is lattice periodic in z; after reduction a pole can only
    // collide with the nine adjacent lattice points
    for a in -1..=1i64 {
        for b in -1..=1i64 {
            let s = tau.scale_i64(a).add(&ComplexBall::from_i64(b, prec));
            if zr.sub(&s).contains_zero() {
                return Err(EisError::PoleOrZeroAtPoint);
            }
        }
    }

    let im_tau = tau.im();
    let it = im_tau.to_f64();
    let iz = zr.im().to_f64().abs();
    // extra guard bits absorb the polynomial amplitude of the weighted tail
    let need = ((prec as f64 + 32.0) * std::f64::consts::LN_2
        / (2.0 * std::f64::consts::PI)
        + iz)
        / it;
    let n_rows = (need.ceil() as i64 + 1).max(2);
    if n_rows > MAX_ROWS {
        return Err(EisError::PrecisionExhausted);
    }

    let mut acc = ComplexBall::zero(prec);
    for n in -n_rows..=n_rows {
        let v = if n == 0 { zr.clone() } else { zr.add(&tau.scale_i64(n)) };
        let svals = sk_values(&v, k);
        if m == 0 {
            acc = acc.add(&svals[(k - 2) as usize]);
            continue;
        }
        let cn = v.conj().sub(&v);
        let mut cpow: Vec<ComplexBall> = vec![ComplexBall::one(prec)];
        for i in 1..=m as usize {
            cpow.push(cpow[i - 1].mul(&cn));
        }
        let mut binom: i64 = 1;
        for s in 0..=m {
            let term = cpow[(m - s) as usize]
                .mul(&svals[(k - s - 2) as usize])
                .scale_i64(binom);
            acc = acc.add(&term);
            binom = binom * (m - s) as i64 / (s + 1) as i64;
        }
    }

    // tail rows n > n_rows (both signs): per-row bound
    // (1 + |c_n|)^m B_k(t_n) with |c_n| <= 2|Im zh| + 2|n| Im tau
    let t_shift = im_tau.mul_i64(n_rows + 1).sub(&zr.im().abs());
    let amp = RealBall::from_i64(1, prec)
        .add(&zr.im().abs().mul_i64(2))
        .add(&im_tau.mul_i64(2 * (n_rows + 1)));
    let tail = Float::with_val(64, 2 * weighted_tail(k, m, &amp, &t_shift, &im_tau));
    if !tail.is_finite() {
        return Err(EisError::PrecisionExhausted);
    }
    acc = acc.add_error(&tail);

    // prefactor (k-1)! A(L)^j conj(w2)^m w2^{-k}
    let a = a_const(&p.l)?;
    let mut fact: i64 = 1;
    for i in 2..k as i64 {
        fact *= i;
    }
    let mut pre = p.l.w2.inv().powi(k as i32).scale_i64(fact);
    if m > 0 {
        pre = pre.mul(&p.l.w2.conj().powi(m as i32));
        pre = pre.mul(&a.powi(-(m as i32)));
    }
    Ok(acc.mul(&pre))
}

/// The smoothed series `(Na) E_{j,k}(z, L) - E_{j,k}(z, a^{-1}L)`.
/// Identically zero for `a = (1)`.
pub fn eis_jk_smoothed(p: &EisParams, a: &IdealK, prec: u32) -> Result<ComplexBall> {
    if a.is_one() {
        return Ok(ComplexBall::zero(prec));
    }
    let e1 = eis_jk(p, prec)?;
    let ai = a.gen.embed(prec).inv();
    let l2 = p.l.scale(&ai);
    let p2 = EisParams { j: p.j, k: p.k, z: p.z.clone(), l: l2 };
    let e2 = eis_jk(&p2, prec)?;
    let na: i64 = a.norm().try_into().map_err(|_| EisError::Invalid("Na overflow".into()))?;
    Ok(e1.scale_i64(na).sub(&e2))
}
