//! Distributions on Z_q^2 at finite level: Fourier transforms, Leopoldt
//! Gamma transforms (two independent routes), unit actions, restrictions,
//! and the beta construction averaging over Teichmueller representatives.
//!
//! A measure is stored at its finest computed level only; coarser levels are
//! recovered by summing residue fibers.  All values are exact cyclotomic
//! numbers, so every identity in this module is checked with `==`, not with
//! a tolerance.

mod gamma;
mod measure;

pub use gamma::{
    gamma_direct, gamma_gauss, gamma_gauss_with, gauss_sum, gauss_sum_at, CharPair, FourierTable,
};
pub use measure::{build_beta, measure_from_fourier, FiniteMeasure, ZetaPair};

use crate::arith::cyc::{lcm, CycElem};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum MeasureError {
    #[error("character conductor does not divide the measure level")]
    LevelMismatch,
    #[error("fourier data is missing an entry")]
    IncompleteData,
    #[error("scaling residue is not a unit")]
    NotAUnit,
    #[error("measure is not invariant under the unit subgroup")]
    SymmetryViolation,
    #[error("measure has mass outside the required support")]
    SupportViolation,
    #[error("invalid input: {0}")]
    Invalid(String),
}

pub type Result<T> = std::result::Result<T, MeasureError>;

/// An exact root of unity zeta_order^exp (canonical embedding), stored with
/// the order fully reduced so that equal values have equal representations.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct RootOfUnity {
    pub order: u64,
    pub exp: u64,
}

impl RootOfUnity {
    pub fn new(order: u64, exp: i64) -> RootOfUnity {
        assert!(order > 0);
        let e = exp.rem_euclid(order as i64) as u64;
        if e == 0 {
            return RootOfUnity { order: 1, exp: 0 };
        }
        let g = gcd(e, order);
        RootOfUnity { order: order / g, exp: e / g }
    }

    pub fn one() -> RootOfUnity {
        RootOfUnity { order: 1, exp: 0 }
    }

    pub fn is_one(&self) -> bool {
        self.order == 1
    }

    pub fn pow(&self, k: i64) -> RootOfUnity {
        let e = (self.exp as i128 * k as i128).rem_euclid(self.order as i128);
        RootOfUnity::new(self.order, e as i64)
    }

    pub fn inv(&self) -> RootOfUnity {
        self.pow(-1)
    }

    pub fn mul(&self, other: &RootOfUnity) -> RootOfUnity {
        let l = lcm(self.order, other.order);
        let e = self.exp * (l / self.order) + other.exp * (l / other.order);
        RootOfUnity::new(l, (e % l) as i64)
    }

    pub fn to_cyc(&self) -> CycElem {
        CycElem::zeta_pow(self.order, self.exp as i64)
    }
}

/// Multiply a cyclotomic element by a root of unity, lifting to the lcm
/// order and using the cheap monomial product.
pub fn mul_root(e: &CycElem, r: &RootOfUnity) -> CycElem {
    if r.is_one() {
        return e.clone();
    }
    let l = lcm(e.order, r.order);
    let lifted = if l == e.order { e.clone() } else { e.lift_to_order(l).expect("lcm lift") };
    lifted.mul_zeta((r.exp * (l / r.order)) as i64)
}

pub(crate) fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a
}

pub fn pow_mod(b: u64, mut e: u64, m: u64) -> u64 {
    let mut base = (b % m) as u128;
    let mm = m as u128;
    let mut acc: u128 = 1 % mm;
    while e > 0 {
        if e & 1 == 1 {
            acc = acc * base % mm;
        }
        base = base * base % mm;
        e >>= 1;
    }
    acc as u64
}

pub fn inv_mod(a: u64, m: u64) -> Option<u64> {
    let (mut r0, mut r1) = (m as i128, (a % m) as i128);
    let (mut s0, mut s1) = (0i128, 1i128);
    while r1 != 0 {
        let qt = r0 / r1;
        let r = r0 - qt * r1;
        r0 = r1;
        r1 = r;
        let s = s0 - qt * s1;
        s0 = s1;
        s1 = s;
    }
    if r0 != 1 {
        return None;
    }
    Some(s0.rem_euclid(m as i128) as u64)
}

/// Smallest primitive root mod q^2 for an odd prime q; such a root generates
/// (Z/q^m)^x for every m >= 1.
pub(crate) fn primitive_root(q: u64) -> u64 {
    let m = q * q;
    let ord = q * (q - 1);
    'cand: for g in 2..m {
        if g % q == 0 {
            continue;
        }
        // order check against the maximal divisors of q(q-1)
        let mut d = 2;
        let mut rest = ord;
        let mut primes = Vec::new();
        while d * d <= rest {
            if rest % d == 0 {
                primes.push(d);
                while rest % d == 0 {
                    rest /= d;
                }
            }
            d += 1;
        }
        if rest > 1 {
            primes.push(rest);
        }
        for pr in primes {
            if pow_mod(g, ord / pr, m) == 1 {
                continue 'cand;
            }
        }
        return g;
    }
    unreachable!("every odd prime power has a primitive root")
}

/// Discrete logarithm of x base b in (Z/modulus)^x, searching up to `order`
/// steps.  Group sizes here are tiny, so brute force is fine.
pub(crate) fn dlog(b: u64, x: u64, modulus: u64, order: u64) -> Option<u64> {
    let target = x % modulus;
    let mut acc = 1 % modulus;
    for e in 0..order {
        if acc == target {
            return Some(e);
        }
        acc = (acc as u128 * b as u128 % modulus as u128) as u64;
    }
    None
}

pub(crate) fn is_q_power(mut n: u64, q: u64) -> bool {
    while n % q == 0 {
        n /= q;
    }
    n == 1
}
