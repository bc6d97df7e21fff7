//! Finite-level measures on Z_q^2 and their Fourier theory.

use super::{
    gcd, is_q_power, mul_root, pow_mod, primitive_root, MeasureError, Result, RootOfUnity,
};
use crate::arith::cyc::CycElem;
use rug::{Integer, Rational};
use serde::{Deserialize, Serialize};
use std::collections::HashMap;

/// A pair of roots of unity of q-power order, the argument of the Fourier
/// transform.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct ZetaPair {
    pub r1: RootOfUnity,
    pub r2: RootOfUnity,
}

impl ZetaPair {
    pub fn new(q: u64, r1: RootOfUnity, r2: RootOfUnity) -> Result<ZetaPair> {
        if !is_q_power(r1.order, q) || !is_q_power(r2.order, q) {
            return Err(MeasureError::Invalid("zeta orders must be powers of q".into()));
        }
        Ok(ZetaPair { r1, r2 })
    }

    /// zeta_{q^m}^{x1}, zeta_{q^n}^{x2}.
    pub fn from_exponents(q: u64, level: (u32, u32), x1: i64, x2: i64) -> ZetaPair {
        ZetaPair {
            r1: RootOfUnity::new(q.pow(level.0), x1),
            r2: RootOfUnity::new(q.pow(level.1), x2),
        }
    }
}

/// A finitely additive function on the cells of (Z/q^m) x (Z/q^n), the cell
/// (a, b) standing for (a + q^m Z_q) x (b + q^n Z_q).  Values are exact
/// cyclotomic numbers; `values` is row-major with index a * q^n + b.
#[derive(Debug, Clone)]
pub struct FiniteMeasure {
    pub q: u64,
    pub level: (u32, u32),
    pub values: Vec<CycElem>,
}

impl PartialEq for FiniteMeasure {
    fn eq(&self, other: &FiniteMeasure) -> bool {
        self.q == other.q
            && self.level == other.level
            && self.values.iter().zip(&other.values).all(|(a, b)| a.eq_value(b))
    }
}

impl FiniteMeasure {
    pub fn new(q: u64, level: (u32, u32)) -> FiniteMeasure {
        let cells = (q.pow(level.0) * q.pow(level.1)) as usize;
        FiniteMeasure { q, level, values: vec![CycElem::zero(1); cells] }
    }

    pub fn dirac(q: u64, level: (u32, u32), at: (u64, u64)) -> FiniteMeasure {
        let mut m = FiniteMeasure::new(q, level);
        m.set(at.0, at.1, CycElem::one(1));
        m
    }

    pub fn rows(&self) -> u64 {
        self.q.pow(self.level.0)
    }

    pub fn cols(&self) -> u64 {
        self.q.pow(self.level.1)
    }

    fn idx(&self, a: u64, b: u64) -> usize {
        let aa = a % self.rows();
        let bb = b % self.cols();
        (aa * self.cols() + bb) as usize
    }

    pub fn value(&self, a: u64, b: u64) -> &CycElem {
        &self.values[self.idx(a, b)]
    }

    pub fn set(&mut self, a: u64, b: u64, v: CycElem) {
        let i = self.idx(a, b);
        self.values[i] = v;
    }

    pub fn total_mass(&self) -> CycElem {
        let mut acc = CycElem::zero(1);
        for v in &self.values {
            if !v.is_zero() {
                acc = acc.add(v);
            }
        }
        acc
    }

    pub fn is_zero(&self) -> bool {
        self.values.iter().all(|v| v.is_zero())
    }

    /// Push to a coarser level by summing residue fibers.
    pub fn coarsen(&self, level: (u32, u32)) -> Result<FiniteMeasure> {
        if level.0 > self.level.0 || level.1 > self.level.1 {
            return Err(MeasureError::LevelMismatch);
        }
        let mut out = FiniteMeasure::new(self.q, level);
        for a in 0..self.rows() {
            for b in 0..self.cols() {
                let v = self.value(a, b);
                if v.is_zero() {
                    continue;
                }
                let i = out.idx(a, b);
                out.values[i] = out.values[i].add(v);
            }
        }
        Ok(out)
    }

    /// Fourier transform at one pair of roots of unity:
    /// sum over cells of zeta1^a zeta2^b alpha(U_{a,b}).
    pub fn fourier(&self, z: &ZetaPair) -> Result<CycElem> {
        let (qm, qn) = (self.rows(), self.cols());
        if qm % z.r1.order != 0 || qn % z.r2.order != 0 {
            return Err(MeasureError::LevelMismatch);
        }
        let mut acc = CycElem::zero(1);
        for a in 0..qm {
            for b in 0..qn {
                let v = self.value(a, b);
                if v.is_zero() {
                    continue;
                }
                let r = z.r1.pow(a as i64).mul(&z.r2.pow(b as i64));
                acc = acc.add(&mul_root(v, &r));
            }
        }
        Ok(acc)
    }

    /// All Fourier values at the full level, row-major over the exponents
    /// (x1, x2) of (zeta_{q^m}^{x1}, zeta_{q^n}^{x2}), computed by a
    /// row-column transform.
    pub fn fourier_all(&self) -> Vec<CycElem> {
        dft2(self.q, self.level, 1, &self.values)
    }

    /// Scaled measure (alpha o c)(U_{a,b}) = alpha(U_{c1 a, c2 b}).
    pub fn act_by_unit(&self, c: (u64, u64)) -> Result<FiniteMeasure> {
        if gcd(c.0, self.q) != 1 || gcd(c.1, self.q) != 1 {
            return Err(MeasureError::NotAUnit);
        }
        let mut out = FiniteMeasure::new(self.q, self.level);
        for a in 0..self.rows() {
            for b in 0..self.cols() {
                let v = self.value(c.0 * a, c.1 * b);
                if !v.is_zero() {
                    out.set(a, b, v.clone());
                }
            }
        }
        Ok(out)
    }

    /// Zero out every cell whose representative fails the predicate.  The
    /// predicate must be constant on cells, which is automatic since it only
    /// sees the representative.
    pub fn restrict<F: Fn(u64, u64) -> bool>(&self, keep: F) -> FiniteMeasure {
        let mut out = FiniteMeasure::new(self.q, self.level);
        for a in 0..self.rows() {
            for b in 0..self.cols() {
                if keep(a, b) {
                    let v = self.value(a, b);
                    if !v.is_zero() {
                        out.set(a, b, v.clone());
                    }
                }
            }
        }
        out
    }

    pub fn to_json(&self) -> String {
        let mut entries = Vec::new();
        for a in 0..self.rows() {
            for b in 0..self.cols() {
                let v = self.value(a, b);
                if v.is_zero() {
                    continue;
                }
                entries.push(EntryJson {
                    a,
                    b,
                    coeffs: CoeffsJson {
                        order: v.order,
                        num: v.coeffs.iter().map(|c| c.numer().to_string()).collect(),
                        den: v.coeffs.iter().map(|c| c.denom().to_string()).collect(),
                    },
                });
            }
        }
        let doc = MeasureJson { q: self.q, level: [self.level.0, self.level.1], entries };
        serde_json::to_string(&doc).expect("measure serialization cannot fail")
    }

    pub fn from_json(s: &str) -> Result<FiniteMeasure> {
        let doc: MeasureJson =
            serde_json::from_str(s).map_err(|e| MeasureError::Invalid(e.to_string()))?;
        let mut m = FiniteMeasure::new(doc.q, (doc.level[0], doc.level[1]));
        for e in doc.entries {
            if e.a >= m.rows() || e.b >= m.cols() {
                return Err(MeasureError::Invalid("cell out of range".into()));
            }
            let phi = crate::arith::cyc::euler_phi(e.coeffs.order) as usize;
            if e.coeffs.num.len() != phi || e.coeffs.den.len() != phi {
                return Err(MeasureError::Invalid("coefficient count mismatch".into()));
            }
            let mut v = CycElem::zero(e.coeffs.order);
            for i in 0..phi {
                let n: Integer = e.coeffs.num[i]
                    .parse()
                    .map_err(|_| MeasureError::Invalid("bad numerator".into()))?;
                let d: Integer = e.coeffs.den[i]
                    .parse()
                    .map_err(|_| MeasureError::Invalid("bad denominator".into()))?;
                if d == 0 {
                    return Err(MeasureError::Invalid("zero denominator".into()));
                }
                v.coeffs[i] = Rational::from((n, d));
            }
            m.set(e.a, e.b, v);
        }
        Ok(m)
    }
}

#[derive(Serialize, Deserialize)]
struct MeasureJson {
    q: u64,
    level: [u32; 2],
    entries: Vec<EntryJson>,
}

#[derive(Serialize, Deserialize)]
struct EntryJson {
    a: u64,
    b: u64,
    coeffs: CoeffsJson,
}

#[derive(Serialize, Deserialize)]
struct CoeffsJson {
    order: u64,
    num: Vec<String>,
    den: Vec<String>,
}

/// Two-dimensional character sum out[x1, x2] =
/// sum_{a,b} zeta_{q^m}^{sign x1 a} zeta_{q^n}^{sign x2 b} data[a, b],
/// evaluated one axis at a time.
fn dft2(q: u64, level: (u32, u32), sign: i64, data: &[CycElem]) -> Vec<CycElem> {
    let qm = q.pow(level.0) as usize;
    let qn = q.pow(level.1) as usize;
    let mut mid = vec![CycElem::zero(1); qm * qn];
    for a in 0..qm {
        for x2 in 0..qn {
            let mut acc = CycElem::zero(1);
            for b in 0..qn {
                let v = &data[a * qn + b];
                if v.is_zero() {
                    continue;
                }
                let r = RootOfUnity::new(qn as u64, sign * (x2 as i64 * b as i64) % qn as i64);
                acc = acc.add(&mul_root(v, &r));
            }
            mid[a * qn + x2] = acc;
        }
    }
    let mut out = vec![CycElem::zero(1); qm * qn];
    for x2 in 0..qn {
        for x1 in 0..qm {
            let mut acc = CycElem::zero(1);
            for a in 0..qm {
                let v = &mid[a * qn + x2];
                if v.is_zero() {
                    continue;
                }
                let r = RootOfUnity::new(qm as u64, sign * (x1 as i64 * a as i64) % qm as i64);
                acc = acc.add(&mul_root(v, &r));
            }
            out[x1 * qn + x2] = acc;
        }
    }
    out
}

/// Invert a complete table of Fourier values.  `f` is keyed by the exponent
/// pair (x1, x2) of (zeta_{q^m}^{x1}, zeta_{q^n}^{x2}) and must cover the
/// full grid.  The unique measure with those Fourier values is
/// alpha(U_{a,b}) = q^{-(m+n)} sum zeta_{q^m}^{-a x1} zeta_{q^n}^{-b x2} F.
pub fn measure_from_fourier(
    q: u64,
    level: (u32, u32),
    f: &HashMap<(u64, u64), CycElem>,
) -> Result<FiniteMeasure> {
    let qm = q.pow(level.0);
    let qn = q.pow(level.1);
    let mut data = Vec::with_capacity((qm * qn) as usize);
    for x1 in 0..qm {
        for x2 in 0..qn {
            match f.get(&(x1, x2)) {
                Some(v) => data.push(v.clone()),
                None => return Err(MeasureError::IncompleteData),
            }
        }
    }
    let inv = dft2(q, level, -1, &data);
    let scale = Rational::from((1u64, qm * qn));
    let mut m = FiniteMeasure::new(q, level);
    for (i, v) in inv.into_iter().enumerate() {
        if !v.is_zero() {
            m.values[i] = v.mul_rational(&scale);
        }
    }
    Ok(m)
}

/// The averaged restriction beta = sum_eta (alpha o eta)|_{(1+qZ_q)^2},
/// where eta runs over representatives of the square of mu_{q-1} modulo its
/// order-w_k subgroup.  Requires alpha supported on the units and invariant
/// under that subgroup squared.
pub fn build_beta(alpha: &FiniteMeasure, w_k: u64) -> Result<FiniteMeasure> {
    let q = alpha.q;
    if alpha.level.0 < 1 || alpha.level.1 < 1 {
        return Err(MeasureError::LevelMismatch);
    }
    if w_k == 0 || (q - 1) % w_k != 0 {
        return Err(MeasureError::Invalid("w_k must divide q - 1".into()));
    }
    for a in 0..alpha.rows() {
        for b in 0..alpha.cols() {
            if (a % q == 0 || b % q == 0) && !alpha.value(a, b).is_zero() {
                return Err(MeasureError::SupportViolation);
            }
        }
    }
    let g = primitive_root(q);
    let phi1 = alpha.rows() / q * (q - 1);
    let phi2 = alpha.cols() / q * (q - 1);
    // generators of the order-w_k subgroup in each component
    let om1 = pow_mod(g, phi1 / w_k, alpha.rows());
    let om2 = pow_mod(g, phi2 / w_k, alpha.cols());
    if alpha.act_by_unit((om1, 1))? != *alpha || alpha.act_by_unit((1, om2))? != *alpha {
        return Err(MeasureError::SymmetryViolation);
    }
    // Teichmueller generators and coset representatives
    let t1 = pow_mod(g, phi1 / (q - 1), alpha.rows());
    let t2 = pow_mod(g, phi2 / (q - 1), alpha.cols());
    let reps = (q - 1) / w_k;
    let mut beta = FiniteMeasure::new(q, alpha.level);
    for j1 in 0..reps {
        for j2 in 0..reps {
            let eta = (pow_mod(t1, j1, alpha.rows()), pow_mod(t2, j2, alpha.cols()));
            let part = alpha.act_by_unit(eta)?.restrict(|a, b| a % q == 1 && b % q == 1);
            for (i, v) in part.values.iter().enumerate() {
                if !v.is_zero() {
                    beta.values[i] = beta.values[i].add(v);
                }
            }
        }
    }
    Ok(beta)
}
