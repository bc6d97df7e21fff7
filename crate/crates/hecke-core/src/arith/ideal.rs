//! Principal ideals of a class-number-one ring of integers.

use super::quad::{Field, QuadElem};
use super::{ArithError, Result};

/// A nonzero ideal, stored by a generator (class number one makes every ideal
/// principal).  Two ideals are equal iff their generators differ by a unit.
#[derive(Debug, Clone)]
pub struct IdealK {
    pub gen: QuadElem,
    /// Set when `gen` is known to be the normalized generator mod the
    /// ambient conductor (see `normalize_generator`).
    pub normalized: bool,
}

impl IdealK {
    pub fn new(gen: QuadElem) -> IdealK {
        assert!(!gen.is_zero(), "zero ideal not supported");
        IdealK { gen, normalized: false }
    }

    pub fn field(&self) -> Field {
        self.gen.field
    }

    pub fn norm(&self) -> i128 {
        self.gen.norm()
    }

    pub fn one(field: Field) -> IdealK {
        IdealK::new(field.one())
    }

    pub fn is_one(&self) -> bool {
        self.norm() == 1
    }

    pub fn mul(&self, other: &IdealK) -> IdealK {
        IdealK::new(self.gen.mul(&other.gen))
    }

    pub fn pow(&self, e: u32) -> IdealK {
        IdealK::new(self.gen.pow(e))
    }

    pub fn contains(&self, x: &QuadElem) -> bool {
        self.gen.divides(x)
    }

    /// Congruence modulo this ideal.
    pub fn congruent(&self, x: &QuadElem, y: &QuadElem) -> bool {
        self.contains(&x.sub(y))
    }

    pub fn eq_ideal(&self, other: &IdealK) -> bool {
        self.contains(&other.gen) && other.contains(&self.gen)
    }

    pub fn divides_ideal(&self, other: &IdealK) -> bool {
        self.contains(&other.gen)
    }

    /// Ideal coprimality.  Decided by checking, for each rational prime
    /// dividing gcd of the norms, whether some prime ideal above it divides
    /// both generators.  Divisibility by a prime above `l` is a residue test:
    /// for split/ramified `l` with `tau = r mod P`, `a + b*tau = a + b*r` in
    /// `F_l`; for inert `l`, both coordinates must vanish mod `l`.
    pub fn coprime(&self, other: &IdealK) -> bool {
        let g = gcd_i128(self.norm(), other.norm());
        if g == 1 {
            return true;
        }
        for l in small_prime_factors(g) {
            if shares_prime_above(&self.gen, &other.gen, l) {
                return false;
            }
        }
        true
    }
}

fn gcd_i128(a: i128, b: i128) -> i128 {
    let (mut a, mut b) = (a.abs(), b.abs());
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a
}

fn small_prime_factors(mut n: i128) -> Vec<i128> {
    let mut out = Vec::new();
    let mut d = 2i128;
    while d * d <= n {
        if n % d == 0 {
            out.push(d);
            while n % d == 0 {
                n /= d;
            }
        }
        d += 1;
    }
    if n > 1 {
        out.push(n);
    }
    out
}

/// Do `x` and `y` have a common prime ideal divisor above `l`?
fn shares_prime_above(x: &QuadElem, y: &QuadElem, l: i128) -> bool {
    let (t1, t0) = x.field.tau_sq();
    // roots of T^2 - t1 T - t0 mod l
    let mut roots = Vec::new();
    for r in 0..l {
        if (r * r - t1 * r - t0).rem_euclid(l) == 0 {
            roots.push(r);
        }
    }
    if roots.is_empty() {
        // inert: the only prime above l is (l)
        let div = |e: &QuadElem| e.a.rem_euclid(l) == 0 && e.b.rem_euclid(l) == 0;
        return div(x) && div(y);
    }
    for r in roots {
        let red = |e: &QuadElem| (e.a + e.b * r).rem_euclid(l) == 0;
        if red(x) && red(y) {
            return true;
        }
    }
    false
}

/// The generator of `b`, adjusted by a unit so that it is congruent to 1
/// modulo `f`.  The adjusted generator is the canonical multiplicative
/// generator choice; multiplicativity across coprime-to-`f` ideals holds
/// because the unit group injects into `(O_K/f)^x` when such a normalization
/// is unique.
pub fn normalize_generator(b: &IdealK, f: &IdealK) -> Result<QuadElem> {
    if !b.coprime(f) {
        return Err(ArithError::NotCoprime);
    }
    let one = b.field().one();
    let mut found: Option<QuadElem> = None;
    for u in b.field().units() {
        let cand = b.gen.mul(&u);
        if f.congruent(&cand, &one) {
            if found.is_some() {
                // two distinct unit multiples congruent to 1: f too small to
                // pin the choice down
                return Err(ArithError::NoNormalizedGenerator);
            }
            found = Some(cand);
        }
    }
    found.ok_or(ArithError::NoNormalizedGenerator)
}
