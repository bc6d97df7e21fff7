//! Row sums over a lattice: the one-dimensional sums
//! `S_k(v) = sum_{m in Z} 1/(v+m)^k` in closed form, plus certified bounds
//! for the exponentially small tails of sums of rows.
//!
//! With `c = cot(pi v)` one has `S_2(v) = pi^2 (1 + c^2)` and the recurrence
//! `S_{k+1} = -S_k' / k` gives `S_k(v) = pi^k P_k(c)` where
//! `P_{k+1}(c) = (1 + c^2) P_k'(c) / k`.  The polynomials `P_k` have
//! nonnegative rational coefficients and are cached.
//!
//! For tails we use the expansion (valid for `t = Im v > 0`)
//! `S_k(v) = ((-2 pi i)^k / (k-1)!) sum_{d >= 1} d^{k-1} e^{2 pi i d v}`,
//! together with `d^{k-1} <= (k-1)! binom(d+k-2, k-1)` and the binomial
//! series, giving `|S_k(v)| <= (2 pi)^k x / (1-x)^k` with `x = e^{-2 pi t}`.

use crate::arith::ball::{ComplexBall, RealBall};
use once_cell::sync::Lazy;
use rug::{Float, Rational};
use std::collections::HashMap;
use std::sync::{Arc, Mutex};

static PK_CACHE: Lazy<Mutex<HashMap<u32, Arc<Vec<Rational>>>>> =
    Lazy::new(|| Mutex::new(HashMap::new()));

/// Coefficients (by ascending degree) of `P_k`, so that
/// `S_k(v) = pi^k P_k(cot(pi v))` for `k >= 2`.
pub fn sk_poly(k: u32) -> Arc<Vec<Rational>> {
    assert!(k >= 2);
    let mut cache = PK_CACHE.lock().unwrap();
    if let Some(p) = cache.get(&k) {
        return p.clone();
    }
    let p: Vec<Rational> = if k == 2 {
        vec![Rational::from(1), Rational::new(), Rational::from(1)]
    } else {
        let prev = if let Some(p) = cache.get(&(k - 1)) {
            p.clone()
        } else {
            drop(cache);
            let p = sk_poly(k - 1);
            cache = PK_CACHE.lock().unwrap();
            p
        };
        // derivative of prev
        let mut d = vec![Rational::new(); prev.len().saturating_sub(1)];
        for (i, c) in prev.iter().enumerate().skip(1) {
            d[i - 1] = Rational::from(c * Rational::from(i as i64));
        }
        // multiply by (1 + c^2) and divide by k-1
        let mut out = vec![Rational::new(); d.len() + 2];
        for (i, c) in d.iter().enumerate() {
            out[i] += c;
            out[i + 2] += c;
        }
        let kk = Rational::from(k as i64 - 1);
        for c in out.iter_mut() {
            *c /= kk.clone();
        }
        out
    };
    let arc = Arc::new(p);
    cache.insert(k, arc.clone());
    arc
}

/// `pi` as a complex ball.
pub fn pi_cball(prec: u32) -> ComplexBall {
    ComplexBall::from_re_im(RealBall::pi(prec), RealBall::zero(prec), prec)
}

/// `cot(pi v)` as a ball.  If `sin(pi v)` cannot be bounded away from zero
/// the result has infinite radius, which poisons everything downstream.
pub fn cot_pi(v: &ComplexBall) -> ComplexBall {
    let pv = v.mul(&pi_cball(v.prec()));
    pv.cos().div(&pv.sin())
}

/// `S_k(v)` for `k = 2..=kmax`, sharing one cotangent evaluation.
/// Entry `i` of the result is `S_{i+2}(v)`.
pub fn sk_values(v: &ComplexBall, kmax: u32) -> Vec<ComplexBall> {
    assert!(kmax >= 2);
    let prec = v.prec();
    let c = cot_pi(v);
    let pi = pi_cball(prec);
    let mut out = Vec::with_capacity((kmax - 1) as usize);
    let mut pik = pi.mul(&pi);
    for k in 2..=kmax {
        let poly = sk_poly(k);
        // Horner in c
        let zero = Rational::new();
        let mut acc = ComplexBall::zero(prec);
        for coef in poly.iter().rev() {
            acc = acc.mul(&c).add(&ComplexBall::from_rationals(coef, &zero, prec));
        }
        out.push(acc.mul(&pik));
        if k < kmax {
            pik = pik.mul(&pi);
        }
    }
    out
}

/// `e^x` for a real ball.
pub fn real_exp(x: &RealBall) -> RealBall {
    let prec = x.prec();
    ComplexBall::from_re_im(x.clone(), RealBall::zero(prec), prec).exp().re()
}

/// Upper bound (as a radius float) on `sum_{n >= 0} |S_k(v_n)|` over any
/// points `v_n` with `|Im v_n| >= t0 + n*step`, using
/// `|S_k| <= (2 pi)^k x/(1-x)^k <= C x` with `C = (2 pi)^k/(1-x0)^k` and a
/// geometric sum of the `x`-values.  Requires `t0, step > 0` with `x0 < 1`;
/// otherwise returns infinity.
pub fn sk_tail_rows(k: u32, t0: &RealBall, step: &RealBall) -> Float {
    let prec = t0.prec();
    let inf = || Float::with_val(64, f64::INFINITY);
    if !(t0.lower().is_sign_positive() && !t0.lower().is_zero()) {
        return inf();
    }
    if !(step.lower().is_sign_positive() && !step.lower().is_zero()) {
        return inf();
    }
    let two_pi = RealBall::pi(prec).mul_i64(2);
    let x0 = real_exp(&two_pi.mul(t0).neg());
    let rho = real_exp(&two_pi.mul(step).neg());
    let one = RealBall::from_i64(1, prec);
    let one_minus_x0 = one.sub(&x0);
    let one_minus_rho = one.sub(&rho);
    if !one_minus_x0.lower().is_sign_positive() || !one_minus_rho.lower().is_sign_positive() {
        return inf();
    }
    // (2 pi)^k
    let mut c = one.clone();
    for _ in 0..k {
        c = c.mul(&two_pi);
    }
    for _ in 0..k {
        c = c.div(&one_minus_x0);
    }
    let total = c.mul(&x0).div(&one_minus_rho);
    total.upper()
}

/// Upper bound (as a radius float) on `sum_{n >= 0} amp_n^m |S_k(v_n)|`
/// where `|Im v_n| >= t0 + n*step` and `amp_n <= amp * (1 + n)` (any
/// nonnegative weights of at most linear growth can be put in this shape by
/// absorbing the level-0 value into `amp`).  Uses
/// `(1+n)^m <= m! binom(n+m, m)` and the binomial series, giving the closed
/// bound `amp^m (2 pi)^k x0/(1-x0)^k * m!/(1-rho)^{m+1}`.
pub fn weighted_tail(k: u32, m: u32, amp: &RealBall, t0: &RealBall, step: &RealBall) -> Float {
    let prec = t0.prec();
    let inf = || Float::with_val(64, f64::INFINITY);
    if !(t0.lower().is_sign_positive() && !t0.lower().is_zero()) {
        return inf();
    }
    if amp.lower().is_sign_negative() {
        return inf();
    }
    let two_pi = RealBall::pi(prec).mul_i64(2);
    let x0 = real_exp(&two_pi.mul(t0).neg());
    let rho = real_exp(&two_pi.mul(step).neg());
    let one = RealBall::from_i64(1, prec);
    let one_minus_x0 = one.sub(&x0);
    let one_minus_rho = one.sub(&rho);
    if !one_minus_x0.lower().is_sign_positive() || !one_minus_rho.lower().is_sign_positive() {
        return inf();
    }
    let mut c = one.clone();
    for _ in 0..k {
        c = c.mul(&two_pi);
    }
    for _ in 0..k {
        c = c.div(&one_minus_x0);
    }
    for _ in 0..m {
        c = c.mul(amp);
    }
    let mut fact = 1i64;
    for i in 1..=(m as i64) {
        fact *= i;
    }
    c = c.mul_i64(fact);
    for _ in 0..=m {
        c = c.div(&one_minus_rho);
    }
    c.mul(&x0).upper()
}

/// Upper bound on a single `|S_k(v)|` with `|Im v| >= t`.
pub fn sk_row_bound(k: u32, t: &RealBall) -> Float {
    // a one-term "sum": step value is irrelevant as long as it is positive
    let one = RealBall::from_i64(1000, t.prec());
    sk_tail_rows(k, t, &one)
}
