//! Integers of an imaginary quadratic field of class number one.
//!
//! Elements are written `a + b*tau` where `tau` is the standard integral
//! generator: `tau = sqrt(d/4)` when the discriminant `d` is even, and
//! `tau = (1 + sqrt(d))/2` when `d` is odd.  In both cases `tau` satisfies
//! `tau^2 = t1*tau + t0` with small integers `t1`, `t0`.

use super::{ArithError, Result};
use crate::arith::ball::ComplexBall;
use serde::{Deserialize, Serialize};
use std::fmt;

/// The nine imaginary quadratic fields of class number one, by discriminant.
pub const CLASS_NUMBER_ONE_DISCS: [i64; 9] = [-3, -4, -7, -8, -11, -19, -43, -67, -163];

/// An imaginary quadratic field of class number one, identified by its
/// discriminant.  Carries the minimal-polynomial data of `tau` and the unit
/// group.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Field {
    pub disc: i64,
}

impl Field {
    pub fn new(disc: i64) -> Result<Field> {
        if CLASS_NUMBER_ONE_DISCS.contains(&disc) {
            Ok(Field { disc })
        } else {
            Err(ArithError::BadDiscriminant(disc))
        }
    }

    /// The reference field Q(i).
    pub fn gaussian() -> Field {
        Field { disc: -4 }
    }

    /// `tau^2 = t1*tau + t0`.
    pub fn tau_sq(&self) -> (i128, i128) {
        if self.disc % 2 == 0 {
            (0, (self.disc / 4) as i128)
        } else {
            (1, ((self.disc - 1) / 4) as i128)
        }
    }

    /// Number of roots of unity in the field.
    pub fn num_units(&self) -> u32 {
        match self.disc {
            -4 => 4,
            -3 => 6,
            _ => 2,
        }
    }

    /// The roots of unity, starting with 1, closed under multiplication.
    pub fn units(&self) -> Vec<QuadElem> {
        let one = QuadElem::new(*self, 1, 0);
        match self.disc {
            -4 => {
                let i = QuadElem::new(*self, 0, 1);
                vec![one.clone(), i.clone(), -one.clone(), -i]
            }
            -3 => {
                // tau = zeta_6 here: tau^2 = tau - 1.
                let z = QuadElem::new(*self, 0, 1);
                let z2 = z.mul(&z);
                vec![one.clone(), z.clone(), z2.clone(), -one, -z, -z2]
            }
            _ => vec![one.clone(), -one],
        }
    }

    pub fn zero(&self) -> QuadElem {
        QuadElem::new(*self, 0, 0)
    }

    pub fn one(&self) -> QuadElem {
        QuadElem::new(*self, 1, 0)
    }

    pub fn tau(&self) -> QuadElem {
        QuadElem::new(*self, 0, 1)
    }

    /// `tau` as a complex ball: `sqrt(d)/2` or `(1+sqrt(d))/2`.
    pub fn tau_ball(&self, prec: u32) -> ComplexBall {
        let root = RealSqrt(-self.disc).ball(prec); // sqrt(|d|)
        if self.disc % 2 == 0 {
            ComplexBall::from_re_im(
                crate::arith::ball::RealBall::zero(prec),
                root.div_u32(2),
                prec,
            )
        } else {
            ComplexBall::from_re_im(
                crate::arith::ball::RealBall::from_ratio(1, 2, prec),
                root.div_u32(2),
                prec,
            )
        }
    }
}

struct RealSqrt(i64);
impl RealSqrt {
    fn ball(&self, prec: u32) -> crate::arith::ball::RealBall {
        crate::arith::ball::RealBall::from_i64(self.0, prec).sqrt()
    }
}

/// An element `a + b*tau` of the ring of integers.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct QuadElem {
    pub a: i128,
    pub b: i128,
    pub field: Field,
}

impl QuadElem {
    pub fn new(field: Field, a: i128, b: i128) -> QuadElem {
        QuadElem { a, b, field }
    }

    pub fn is_zero(&self) -> bool {
        self.a == 0 && self.b == 0
    }

    pub fn is_one(&self) -> bool {
        self.a == 1 && self.b == 0
    }

    pub fn add(&self, other: &QuadElem) -> QuadElem {
        QuadElem::new(self.field, self.a + other.a, self.b + other.b)
    }

    pub fn sub(&self, other: &QuadElem) -> QuadElem {
        QuadElem::new(self.field, self.a - other.a, self.b - other.b)
    }

    pub fn mul(&self, other: &QuadElem) -> QuadElem {
        let (t1, t0) = self.field.tau_sq();
        let (a, b, c, d) = (self.a, self.b, other.a, other.b);
        // (a + b tau)(c + d tau) = ac + (ad + bc) tau + bd (t1 tau + t0)
        QuadElem::new(self.field, a * c + b * d * t0, a * d + b * c + b * d * t1)
    }

    pub fn conj(&self) -> QuadElem {
        let (t1, _) = self.field.tau_sq();
        QuadElem::new(self.field, self.a + self.b * t1, -self.b)
    }

    /// Field norm, always nonnegative here (imaginary quadratic).
    pub fn norm(&self) -> i128 {
        let (t1, t0) = self.field.tau_sq();
        self.a * self.a + self.a * self.b * t1 - self.b * self.b * t0
    }

    pub fn pow(&self, mut e: u32) -> QuadElem {
        let mut base = self.clone();
        let mut acc = self.field.one();
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul(&base);
            }
            base = base.mul(&base);
            e >>= 1;
        }
        acc
    }

    /// Exact division; `None` if `other` does not divide `self`.
    pub fn div_exact(&self, other: &QuadElem) -> Option<QuadElem> {
        if other.is_zero() {
            return None;
        }
        let n = other.norm();
        let num = self.mul(&other.conj());
        if num.a % n == 0 && num.b % n == 0 {
            Some(QuadElem::new(self.field, num.a / n, num.b / n))
        } else {
            None
        }
    }

    pub fn divides(&self, other: &QuadElem) -> bool {
        other.div_exact(self).is_some()
    }

    pub fn is_unit(&self) -> bool {
        self.norm() == 1
    }

    /// Embed into a complex ball under the standard embedding (`Im tau > 0`).
    pub fn embed(&self, prec: u32) -> ComplexBall {
        let tau = self.field.tau_ball(prec);
        let a = ComplexBall::from_i128(self.a, prec);
        let b = ComplexBall::from_i128(self.b, prec);
        a.add(&b.mul(&tau))
    }

    /// Canonical representative of the unit orbit: the unit multiple that is
    /// lexicographically smallest as `(a.abs(), a sign flag, b)` ... we use the
    /// concrete rule: largest `a`, ties broken by largest `b`.
    pub fn unit_canonical(&self) -> QuadElem {
        let mut best = self.clone();
        for u in self.field.units() {
            let cand = self.mul(&u);
            if (cand.a, cand.b) > (best.a, best.b) {
                best = cand;
            }
        }
        best
    }
}

impl std::ops::Neg for QuadElem {
    type Output = QuadElem;
    fn neg(self) -> QuadElem {
        QuadElem::new(self.field, -self.a, -self.b)
    }
}

impl fmt::Display for QuadElem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.b == 0 {
            write!(f, "{}", self.a)
        } else if self.a == 0 {
            write!(f, "{}t", self.b)
        } else {
            write!(f, "{}{}{}t", self.a, if self.b < 0 { "" } else { "+" }, self.b)
        }
    }
}
