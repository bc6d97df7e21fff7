//! Exact elements of cyclotomic fields Q(zeta_N), composite N allowed.
//!
//! Elements are stored on the power basis 1, z, ..., z^(phi(N)-1) with
//! rational coefficients, reduced modulo the N-th cyclotomic polynomial.

use super::ball::ComplexBall;
use super::{ArithError, Result};
use once_cell::sync::Lazy;
use rug::{Integer, Rational};
use std::collections::HashMap;
use std::sync::{Arc, Mutex};

pub fn euler_phi(mut n: u64) -> u64 {
    let mut result = n;
    let mut p = 2;
    while p * p <= n {
        if n % p == 0 {
            while n % p == 0 {
                n /= p;
            }
            result -= result / p;
        }
        p += 1;
    }
    if n > 1 {
        result -= result / n;
    }
    result
}

/// Integer polynomial division helpers over Vec<Integer> (little-endian).
fn poly_div_exact(num: &[Integer], den: &[Integer]) -> Vec<Integer> {
    // den is monic up to sign of its leading coeff (cyclotomic polys are monic)
    let mut rem: Vec<Integer> = num.to_vec();
    let dd = den.len() - 1;
    let nd = rem.len() - 1;
    if nd < dd {
        return vec![Integer::new()];
    }
    let mut quot = vec![Integer::new(); nd - dd + 1];
    for i in (0..=(nd - dd)).rev() {
        let c = rem[i + dd].clone();
        if c != 0 {
            quot[i] = c.clone();
            for j in 0..=dd {
                rem[i + j] -= (&c * &den[j]).complete();
            }
        }
    }
    debug_assert!(rem.iter().all(|c| *c == 0));
    quot
}

use rug::Complete;

static CYC_POLY_CACHE: Lazy<Mutex<HashMap<u64, Vec<Integer>>>> =
    Lazy::new(|| Mutex::new(HashMap::new()));

/// Coefficients of the N-th cyclotomic polynomial, little-endian, monic.
pub fn cyclotomic_poly(n: u64) -> Vec<Integer> {
    if let Some(p) = CYC_POLY_CACHE.lock().unwrap().get(&n) {
        return p.clone();
    }
    let poly = if n == 1 {
        vec![Integer::from(-1), Integer::from(1)]
    } else {
        // (x^n - 1) / prod_{d|n, d<n} Phi_d
        let mut num = vec![Integer::new(); n as usize + 1];
        num[0] = Integer::from(-1);
        num[n as usize] = Integer::from(1);
        let mut acc = num;
        for d in 1..n {
            if n % d == 0 {
                let phi_d = cyclotomic_poly(d);
                acc = poly_div_exact(&acc, &phi_d);
            }
        }
        acc
    };
    CYC_POLY_CACHE.lock().unwrap().insert(n, poly.clone());
    poly
}

static POWER_TABLE_CACHE: Lazy<Mutex<HashMap<u64, Arc<Vec<Vec<Rational>>>>>> =
    Lazy::new(|| Mutex::new(HashMap::new()));

/// Rows `x^j mod Phi_N` for j = 0 .. max(N, 2 phi(N)) - 1.  Shared, not
/// copied: this sits on every arithmetic hot path.
fn power_table(n: u64) -> Arc<Vec<Vec<Rational>>> {
    if let Some(t) = POWER_TABLE_CACHE.lock().unwrap().get(&n) {
        return Arc::clone(t);
    }
    let phi = euler_phi(n) as usize;
    let poly = cyclotomic_poly(n);
    let count = (n as usize).max(2 * phi).max(1);
    let mut rows: Vec<Vec<Rational>> = Vec::with_capacity(count);
    for j in 0..count {
        if j < phi {
            let mut row = vec![Rational::new(); phi];
            row[j] = Rational::from(1);
            rows.push(row);
        } else {
            // x^j = x * x^(j-1); reduce the overflow coefficient using
            // x^phi = -(poly[0] + ... + poly[phi-1] x^(phi-1))
            let prev = &rows[j - 1];
            let mut row = vec![Rational::new(); phi];
            for i in 0..phi - 1 {
                row[i + 1] = prev[i].clone();
            }
            let carry = prev[phi - 1].clone();
            if carry != 0 {
                for i in 0..phi {
                    row[i] -= carry.clone() * Rational::from(&poly[i]);
                }
            }
            rows.push(row);
        }
    }
    let rows = Arc::new(rows);
    POWER_TABLE_CACHE.lock().unwrap().insert(n, Arc::clone(&rows));
    rows
}

/// An element of Q(zeta_N) on the power basis.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CycElem {
    pub order: u64,
    pub coeffs: Vec<Rational>,
}

impl CycElem {
    pub fn zero(order: u64) -> CycElem {
        CycElem { order, coeffs: vec![Rational::new(); euler_phi(order) as usize] }
    }

    pub fn one(order: u64) -> CycElem {
        CycElem::from_rational(order, Rational::from(1))
    }

    pub fn from_rational(order: u64, r: Rational) -> CycElem {
        let mut e = CycElem::zero(order);
        e.coeffs[0] = r;
        e
    }

    pub fn from_i64(order: u64, v: i64) -> CycElem {
        CycElem::from_rational(order, Rational::from(v))
    }

    /// zeta_N^k.
    pub fn zeta_pow(order: u64, k: i64) -> CycElem {
        let kk = k.rem_euclid(order as i64) as usize;
        let table = power_table(order);
        CycElem { order, coeffs: table[kk].clone() }
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|c| *c == 0)
    }

    pub fn phi(&self) -> usize {
        self.coeffs.len()
    }

    /// Reinterpret in Q(zeta_M) for N | M.
    pub fn lift_to_order(&self, m: u64) -> Result<CycElem> {
        if m == self.order {
            return Ok(self.clone());
        }
        if m % self.order != 0 {
            return Err(ArithError::OrderMismatch(self.order, m));
        }
        let stride = (m / self.order) as i64;
        let table = power_table(m);
        let phi_m = euler_phi(m) as usize;
        let mut out = vec![Rational::new(); phi_m];
        for (i, c) in self.coeffs.iter().enumerate() {
            if *c != 0 {
                let row = &table[((i as i64 * stride) % m as i64) as usize];
                for j in 0..phi_m {
                    out[j] += (c * &row[j]).complete();
                }
            }
        }
        Ok(CycElem { order: m, coeffs: out })
    }

    fn common(a: &CycElem, b: &CycElem) -> Result<(CycElem, CycElem)> {
        if a.order == b.order {
            return Ok((a.clone(), b.clone()));
        }
        let m = lcm(a.order, b.order);
        Ok((a.lift_to_order(m)?, b.lift_to_order(m)?))
    }

    pub fn add(&self, other: &CycElem) -> CycElem {
        if self.order == other.order {
            let mut a = self.clone();
            for i in 0..a.coeffs.len() {
                a.coeffs[i] += &other.coeffs[i];
            }
            return a;
        }
        let (mut a, b) = CycElem::common(self, other).expect("lcm lift cannot fail");
        for i in 0..a.coeffs.len() {
            a.coeffs[i] += &b.coeffs[i];
        }
        a
    }

    pub fn sub(&self, other: &CycElem) -> CycElem {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> CycElem {
        CycElem { order: self.order, coeffs: self.coeffs.iter().map(|c| (-c).complete()).collect() }
    }

    pub fn mul(&self, other: &CycElem) -> CycElem {
        let (a, b) = CycElem::common(self, other).expect("lcm lift cannot fail");
        let phi = a.coeffs.len();
        let table = power_table(a.order);
        // raw convolution then reduce powers >= phi
        let mut raw = vec![Rational::new(); 2 * phi - 1];
        for i in 0..phi {
            if a.coeffs[i] == 0 {
                continue;
            }
            for j in 0..phi {
                if b.coeffs[j] != 0 {
                    raw[i + j] += (&a.coeffs[i] * &b.coeffs[j]).complete();
                }
            }
        }
        let mut out = vec![Rational::new(); phi];
        for (k, c) in raw.into_iter().enumerate() {
            if c == 0 {
                continue;
            }
            if k < phi {
                out[k] += c;
            } else {
                let row = &table[k];
                for i in 0..phi {
                    if row[i] != 0 {
                        out[i] += (&c * &row[i]).complete();
                    }
                }
            }
        }
        CycElem { order: a.order, coeffs: out }
    }

    /// Multiply by the monomial zeta_N^e.  Much cheaper than `mul` with
    /// `zeta_pow`: a coefficient rotation plus the sparse reduction rows.
    pub fn mul_zeta(&self, e: i64) -> CycElem {
        let n = self.order;
        let k = e.rem_euclid(n as i64) as usize;
        if k == 0 {
            return self.clone();
        }
        let table = power_table(n);
        let phi = self.coeffs.len();
        let mut out = vec![Rational::new(); phi];
        for (i, c) in self.coeffs.iter().enumerate() {
            if *c == 0 {
                continue;
            }
            let j = (i + k) % n as usize;
            if j < phi {
                out[j] += c;
            } else {
                let row = &table[j];
                for (t, rt) in row.iter().enumerate() {
                    if *rt != 0 {
                        out[t] += (c * rt).complete();
                    }
                }
            }
        }
        CycElem { order: n, coeffs: out }
    }

    /// Equality as field elements, regardless of the stored orders.
    pub fn eq_value(&self, other: &CycElem) -> bool {
        let (a, b) = CycElem::common(self, other).expect("lcm lift cannot fail");
        a.coeffs == b.coeffs
    }

    pub fn mul_rational(&self, r: &Rational) -> CycElem {
        CycElem {
            order: self.order,
            coeffs: self.coeffs.iter().map(|c| (c * r).complete()).collect(),
        }
    }

    pub fn pow(&self, e: u32) -> CycElem {
        let mut acc = CycElem::one(self.order);
        let mut base = self.clone();
        let mut k = e;
        while k > 0 {
            if k & 1 == 1 {
                acc = acc.mul(&base);
            }
            base = base.mul(&base);
            k >>= 1;
        }
        acc
    }

    /// Galois action zeta -> zeta^t, gcd(t, N) = 1.
    pub fn galois(&self, t: u64) -> CycElem {
        assert_eq!(gcd(t, self.order), 1, "galois exponent must be coprime to order");
        let table = power_table(self.order);
        let phi = self.coeffs.len();
        let mut out = vec![Rational::new(); phi];
        for (i, c) in self.coeffs.iter().enumerate() {
            if *c != 0 {
                let row = &table[((i as u64 * t) % self.order) as usize];
                for j in 0..phi {
                    if row[j] != 0 {
                        out[j] += (c * &row[j]).complete();
                    }
                }
            }
        }
        CycElem { order: self.order, coeffs: out }
    }

    /// Complex conjugation.
    pub fn conj(&self) -> CycElem {
        if self.order == 1 {
            return self.clone();
        }
        self.galois(self.order - 1)
    }

    /// Multiplicative inverse via the multiplication matrix.
    pub fn inv(&self) -> Result<CycElem> {
        if self.is_zero() {
            return Err(ArithError::NotInvertible);
        }
        let phi = self.coeffs.len();
        // columns: self * x^j expressed on the basis
        let mut cols: Vec<CycElem> = Vec::with_capacity(phi);
        for j in 0..phi {
            cols.push(self.mul(&CycElem::zeta_pow(self.order, j as i64)));
        }
        // solve sum_j v_j * cols[j] = 1
        let mut mat: Vec<Vec<Rational>> = (0..phi)
            .map(|i| (0..phi).map(|j| cols[j].coeffs[i].clone()).collect())
            .collect();
        let mut rhs = vec![Rational::new(); phi];
        rhs[0] = Rational::from(1);
        solve_linear(&mut mat, &mut rhs).ok_or(ArithError::NotInvertible)?;
        Ok(CycElem { order: self.order, coeffs: rhs })
    }

    pub fn div(&self, other: &CycElem) -> Result<CycElem> {
        Ok(self.mul(&other.inv()?))
    }

    pub fn as_rational(&self) -> Option<Rational> {
        if self.coeffs[1..].iter().all(|c| *c == 0) {
            Some(self.coeffs[0].clone())
        } else {
            None
        }
    }

    /// Evaluate under the canonical embedding zeta_N = exp(2 pi i / N).
    pub fn embed(&self, prec: u32) -> ComplexBall {
        let zeta = ComplexBall::root_of_unity(1, self.order, prec);
        let mut acc = ComplexBall::zero(prec);
        for c in self.coeffs.iter().rev() {
            acc = acc.mul(&zeta);
            if *c != 0 {
                acc = acc.add(&ComplexBall::from_rationals(c, &Rational::new(), prec));
            }
        }
        acc
    }

    /// Smallest field this element naturally lives in is not computed; this
    /// just strips to a divisor order when the coefficients allow it exactly.
    pub fn try_reduce_order(&self, target: u64) -> Option<CycElem> {
        if self.order % target != 0 {
            return None;
        }
        let candidate = {
            // attempt: express on Q(zeta_target) basis by matching embeddings
            // exactly via linear algebra over the lift
            let phi_t = euler_phi(target) as usize;
            let mut basis: Vec<CycElem> = Vec::with_capacity(phi_t);
            for j in 0..phi_t {
                basis.push(CycElem::zeta_pow(target, j as i64).lift_to_order(self.order).ok()?);
            }
            let phi = self.coeffs.len();
            let mut mat: Vec<Vec<Rational>> =
                (0..phi).map(|i| (0..phi_t).map(|j| basis[j].coeffs[i].clone()).collect()).collect();
            let mut rhs = self.coeffs.clone();
            solve_rect(&mut mat, &mut rhs, phi_t)?
        };
        Some(CycElem { order: target, coeffs: candidate })
    }
}

fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

pub fn lcm(a: u64, b: u64) -> u64 {
    a / gcd(a, b) * b
}

/// Gaussian elimination, square system; returns None if singular.
fn solve_linear(mat: &mut Vec<Vec<Rational>>, rhs: &mut Vec<Rational>) -> Option<()> {
    let n = rhs.len();
    for col in 0..n {
        let pivot = (col..n).find(|&r| mat[r][col] != 0)?;
        mat.swap(col, pivot);
        rhs.swap(col, pivot);
        let p = mat[col][col].clone();
        for j in col..n {
            mat[col][j] /= &p;
        }
        rhs[col] /= &p;
        for r in 0..n {
            if r != col && mat[r][col] != 0 {
                let f = mat[r][col].clone();
                for j in col..n {
                    let t = (&f * &mat[col][j]).complete();
                    mat[r][j] -= t;
                }
                let t = (&f * &rhs[col]).complete();
                rhs[r] -= t;
            }
        }
    }
    Some(())
}

/// Least-squares-free exact solve of an overdetermined consistent system with
/// `cols` unknowns; returns the solution if the system is consistent.
fn solve_rect(mat: &mut Vec<Vec<Rational>>, rhs: &mut Vec<Rational>, cols: usize) -> Option<Vec<Rational>> {
    let rows = rhs.len();
    let mut rank_row = 0usize;
    let mut pivots = Vec::new();
    for col in 0..cols {
        let pivot = (rank_row..rows).find(|&r| mat[r][col] != 0);
        let Some(pivot) = pivot else { continue };
        mat.swap(rank_row, pivot);
        rhs.swap(rank_row, pivot);
        let p = mat[rank_row][col].clone();
        for j in 0..cols {
            mat[rank_row][j] /= &p;
        }
        rhs[rank_row] /= &p;
        for r in 0..rows {
            if r != rank_row && mat[r][col] != 0 {
                let f = mat[r][col].clone();
                for j in 0..cols {
                    let t = (&f * &mat[rank_row][j]).complete();
                    mat[r][j] -= t;
                }
                let t = (&f * &rhs[rank_row]).complete();
                rhs[r] -= t;
            }
        }
        pivots.push((rank_row, col));
        rank_row += 1;
    }
    // consistency: remaining rhs entries must vanish
    for r in rank_row..rows {
        if rhs[r] != 0 {
            return None;
        }
    }
    let mut sol = vec![Rational::new(); cols];
    for (r, c) in pivots {
        sol[c] = rhs[r].clone();
    }
    Some(sol)
}
