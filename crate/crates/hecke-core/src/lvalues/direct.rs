//! Direct summation of the partial L-series over ideals coprime to h.  Each
//! ideal below the norm bound contributes the exact term
//! conj(phi(b))^(k-j) / Nb^s to the class of b, and the truncation error is
//! bounded by an integral comparison, so every class sum is a certified
//! enclosure of the analytically continued-free (convergent) series.

use super::charspec::HeckeCharSpec;
use super::{LvalError, Result};
use crate::arith::ball::{rad_from_f64, ComplexBall};
use crate::arith::ideal::IdealK;
use crate::arith::quad::QuadElem;
use rug::ops::Pow;
use rug::Rational;
use std::collections::HashMap;

/// Per-class partial sums at one exponent s and norm bound.
#[derive(Debug, Clone)]
pub struct ClassSums {
    pub s: u32,
    pub bound: i128,
    /// Classes in the canonical order of `HeckeCharSpec::classes`.
    pub sums: Vec<((u64, u64), ComplexBall)>,
    /// Truncation radius valid for each class sum (and for any
    /// root-of-unity-weighted combination of them).
    pub tail: f64,
}

impl ClassSums {
    /// The certified enclosure for one class: the finite sum widened by the
    /// tail radius.
    pub fn enclosure(&self, tau_c: (u64, u64)) -> Result<ComplexBall> {
        let (_, ball) = self
            .sums
            .iter()
            .find(|(c, _)| *c == tau_c)
            .ok_or_else(|| LvalError::Invalid("unknown class label".into()))?;
        Ok(ball.add_error(&rad_from_f64(self.tail)))
    }
}

/// Tail of sum N^(w/2 - s) over ideals of norm > B, via the quarter-plane
/// lattice count and an integral comparison: with s2 = 2s - w the lattice
/// sum over |z| > sqrt(B) of |z|^(-s2) is at most
/// 2 pi [ t^(2-s2)/(s2-2) + sqrt(2) t^(1-s2)/(s2-1) ] with t = sqrt(B) - 2 sqrt(2),
/// and ideals are quarter as many as lattice points.
fn tail_radius(s2: i64, bound: i128) -> Result<f64> {
    if s2 <= 2 {
        return Err(LvalError::TailTooLarge);
    }
    let t = (bound as f64).sqrt() - 2.0 * 2f64.sqrt();
    if t <= 1.0 {
        return Err(LvalError::TailTooLarge);
    }
    let s2 = s2 as f64;
    let main = t.powf(2.0 - s2) / (s2 - 2.0);
    let edge = 2f64.sqrt() * t.powf(1.0 - s2) / (s2 - 1.0);
    // quarter of the lattice bound, then slack for f64 rounding
    Ok(0.25 * 2.0 * std::f64::consts::PI * (main + edge) * 1.000001)
}

/// One pass over canonical generators a + b tau, a >= 1, b >= 0 (one per
/// ideal), accumulating exact terms into the class of the normalized
/// generator.
pub fn class_sums(spec: &HeckeCharSpec, s: u32, bound: i128) -> Result<ClassSums> {
    let w = spec.w() as i64;
    let tail = tail_radius(2 * s as i64 - w, bound)?;
    let h = spec.h_ideal();
    let prec = spec.prec;
    let classes = spec.classes();
    let index: HashMap<(u64, u64), usize> =
        classes.iter().enumerate().map(|(i, c)| (*c, i)).collect();
    let mut sums = vec![ComplexBall::zero(prec); classes.len()];
    let amax = (bound as f64).sqrt() as i128 + 1;
    for a in 1..=amax {
        for b in 0.. {
            let g = QuadElem::new(spec.field, a, b);
            let n = g.norm();
            if n > bound {
                break;
            }
            if !IdealK::new(g.clone()).coprime(&h) {
                continue;
            }
            let phi = spec.phi(&IdealK::new(g))?;
            let idx = index[&spec.class_of(&phi)];
            let num = phi.conj().pow(spec.w());
            let den = Rational::from(n).pow(s as u32);
            let re = Rational::from(num.a) / den.clone();
            let im = Rational::from(num.b) / den;
            let term = ComplexBall::from_rationals(&re, &im, prec);
            sums[idx] = sums[idx].add(&term);
        }
    }
    Ok(ClassSums {
        s,
        bound,
        sums: classes.into_iter().zip(sums).collect(),
        tail,
    })
}

/// The partial series L_h(phibar^(k-j), s, tau_c) from precomputed sums.
pub fn partial_l_from_sums(sums: &ClassSums, tau_c: (u64, u64)) -> Result<ComplexBall> {
    sums.enclosure(tau_c)
}

/// The partial series at s = k for a single class, from scratch.
pub fn partial_l_direct(spec: &HeckeCharSpec, tau_c: (u64, u64), bound: i128) -> Result<ComplexBall> {
    class_sums(spec, spec.k, bound)?.enclosure(tau_c)
}

/// The imprimitive series L_h(upsilonbar phibar^(k-j), s): the
/// upsilonbar-weighted recombination of the class sums.
pub fn imprimitive_l(spec: &HeckeCharSpec, s: u32, bound: i128) -> Result<ComplexBall> {
    let sums = class_sums(spec, s, bound)?;
    let prec = spec.prec;
    let mut acc = ComplexBall::zero(prec);
    for (c, ball) in &sums.sums {
        let u = spec.upsilon(*c)?.inv();
        acc = acc.add(&ball.mul(&ComplexBall::root_of_unity(u.exp as i64, u.order, prec)));
    }
    Ok(acc.add_error(&rad_from_f64(sums.tail)))
}
