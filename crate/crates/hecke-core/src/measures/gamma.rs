//! Leopoldt Gamma transforms, computed two independent ways.
//!
//! `gamma_direct` sums character values against cell masses.  `gamma_gauss`
//! goes through the Fourier transform and Gauss sums.  The Gauss-sum route
//! is exact for components of exact prime-power conductor; a trivial
//! component is handled by inclusion-exclusion on the unit indicator, and a
//! character of the principal units is averaged over its extensions to the
//! full unit group.  The two routes agree exactly on every input, which is
//! one of the main correctness checks of this crate.

use super::measure::FiniteMeasure;
use super::{
    dlog, inv_mod, mul_root, pow_mod, primitive_root, MeasureError, Result, RootOfUnity,
};
use crate::arith::cyc::CycElem;
use rug::{Complete, Rational};
use std::collections::HashMap;

/// A character of (Z_q^x)^2, or of (1+qZ_q)^2 when `principal` is set,
/// stored by the images of fixed topological generators: the smallest
/// primitive root mod q^2 for the unit group, 1+q for the principal units.
/// Conductor exponents are derived from the image orders, hence minimal.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CharPair {
    pub q: u64,
    pub cond: (u32, u32),
    pub images: (RootOfUnity, RootOfUnity),
    pub principal: bool,
}

impl CharPair {
    /// Character of (Z_q^x)^2 with the given generator images.
    pub fn unit(q: u64, im1: RootOfUnity, im2: RootOfUnity) -> Result<CharPair> {
        let c1 = unit_conductor(q, &im1)?;
        let c2 = unit_conductor(q, &im2)?;
        Ok(CharPair { q, cond: (c1, c2), images: (im1, im2), principal: false })
    }

    /// Character of (1+qZ_q)^2; the images must have q-power order.
    pub fn principal(q: u64, im1: RootOfUnity, im2: RootOfUnity) -> Result<CharPair> {
        let c1 = principal_conductor(q, &im1)?;
        let c2 = principal_conductor(q, &im2)?;
        Ok(CharPair { q, cond: (c1, c2), images: (im1, im2), principal: true })
    }

    pub fn is_trivial(&self) -> bool {
        self.cond == (0, 0)
    }

    /// kappa^t, the character with both images raised to the t-th power.
    pub fn pow(&self, t: i64) -> CharPair {
        let im1 = self.images.0.pow(t);
        let im2 = self.images.1.pow(t);
        if self.principal {
            CharPair::principal(self.q, im1, im2).expect("powers stay q-power")
        } else {
            CharPair::unit(self.q, im1, im2).expect("powers stay valid")
        }
    }

    /// Value of component `comp` at the residue x, or None when x is outside
    /// the support ((Z_q^x) resp. 1+qZ_q).  x may be given modulo any level
    /// at least the conductor.
    pub fn eval_at(&self, comp: usize, x: u64) -> Option<RootOfUnity> {
        let q = self.q;
        let (m, im) = if comp == 0 { (self.cond.0, &self.images.0) } else { (self.cond.1, &self.images.1) };
        if self.principal {
            if x % q != 1 {
                return None;
            }
            if m == 0 {
                return Some(RootOfUnity::one());
            }
            let md = q.pow(m);
            let e = dlog(1 + q, x % md, md, md / q).expect("1+q generates the principal units");
            Some(im.pow(e as i64))
        } else {
            if x % q == 0 {
                return None;
            }
            if m == 0 {
                return Some(RootOfUnity::one());
            }
            let md = q.pow(m);
            let g = primitive_root(q);
            let phi = md / q * (q - 1);
            let e = dlog(g, x % md, md, phi).expect("g generates the units");
            Some(im.pow(e as i64))
        }
    }

    /// Joint value at a unit pair, or None off the support.
    pub fn eval(&self, x: (u64, u64)) -> Option<RootOfUnity> {
        Some(self.eval_at(0, x.0)?.mul(&self.eval_at(1, x.1)?))
    }
}

fn unit_conductor(q: u64, im: &RootOfUnity) -> Result<u32> {
    let d = im.order;
    if d == 1 {
        return Ok(0);
    }
    let mut a = 0u32;
    let mut rest = d;
    while rest % q == 0 {
        rest /= q;
        a += 1;
    }
    if (q - 1) % rest != 0 {
        return Err(MeasureError::Invalid(format!(
            "image order {d} does not divide phi(q^m) for any m"
        )));
    }
    Ok(a + 1)
}

fn principal_conductor(q: u64, im: &RootOfUnity) -> Result<u32> {
    let d = im.order;
    if d == 1 {
        return Ok(0);
    }
    let mut a = 0u32;
    let mut rest = d;
    while rest % q == 0 {
        rest /= q;
        a += 1;
    }
    if rest != 1 {
        return Err(MeasureError::Invalid(format!("image order {d} is not a power of q")));
    }
    Ok(a + 1)
}

/// Gauss sum tau(chi) = q^{-(m+n)} sum chi(x1, x2) zeta_{q^m}^{-x1}
/// zeta_{q^n}^{-x2} over the conductor grid, with chi extended by zero off
/// its support.
pub fn gauss_sum(chi: &CharPair) -> CycElem {
    gauss_sum_at(chi, chi.cond).expect("conductor level is always admissible")
}

/// Gauss sum evaluated on the grid of an imposed level at least the
/// conductor.  Away from the conductor the classical identities degrade, but
/// the sum itself is still well defined and useful as an oracle.
pub fn gauss_sum_at(chi: &CharPair, level: (u32, u32)) -> Result<CycElem> {
    if level.0 < chi.cond.0 || level.1 < chi.cond.1 {
        return Err(MeasureError::LevelMismatch);
    }
    let q = chi.q;
    let (qm, qn) = (q.pow(level.0), q.pow(level.1));
    let mut acc = CycElem::zero(1);
    for x1 in 0..qm {
        let s1 = match component_value(chi, 0, x1, level.0) {
            Some(s) => s,
            None => continue,
        };
        for x2 in 0..qn {
            let s2 = match component_value(chi, 1, x2, level.1) {
                Some(s) => s,
                None => continue,
            };
            let r = s1
                .mul(&s2)
                .mul(&RootOfUnity::new(qm, -(x1 as i64)))
                .mul(&RootOfUnity::new(qn, -(x2 as i64)));
            acc = acc.add(&r.to_cyc());
        }
    }
    Ok(acc.mul_rational(&Rational::from((1u64, qm * qn))))
}

/// Component value on the grid of the imposed level; a level-zero component
/// is the constant 1 on its one-point grid, otherwise the support check
/// applies.
fn component_value(chi: &CharPair, comp: usize, x: u64, level: u32) -> Option<RootOfUnity> {
    if level == 0 {
        return Some(RootOfUnity::one());
    }
    chi.eval_at(comp, x)
}

/// Direct route: sum of chi over the cells of alpha, extension by zero off
/// the support of chi.
pub fn gamma_direct(alpha: &FiniteMeasure, chi: &CharPair) -> Result<CycElem> {
    check_level(alpha, chi)?;
    let mut buckets: HashMap<RootOfUnity, CycElem> = HashMap::new();
    for a in 0..alpha.rows() {
        for b in 0..alpha.cols() {
            let v = alpha.value(a, b);
            if v.is_zero() {
                continue;
            }
            let r = match chi.eval((a, b)) {
                Some(r) => r,
                None => continue,
            };
            buckets.entry(r).and_modify(|acc| *acc = acc.add(v)).or_insert_with(|| v.clone());
        }
    }
    let mut out = CycElem::zero(1);
    let mut keys: Vec<_> = buckets.keys().copied().collect();
    keys.sort_by_key(|r| (r.order, r.exp));
    for r in keys {
        out = out.add(&mul_root(&buckets[&r], &r));
    }
    Ok(out)
}

fn check_level(alpha: &FiniteMeasure, chi: &CharPair) -> Result<()> {
    if chi.q != alpha.q {
        return Err(MeasureError::Invalid("character and measure have different q".into()));
    }
    // support detection needs resolution mod q even for conductor zero
    if alpha.level.0 < chi.cond.0.max(1) || alpha.level.1 < chi.cond.1.max(1) {
        return Err(MeasureError::LevelMismatch);
    }
    Ok(())
}

/// Precomputed Fourier values of a measure at its full level, shared across
/// many Gamma evaluations.
pub struct FourierTable {
    q: u64,
    level: (u32, u32),
    vals: Vec<CycElem>,
}

impl FourierTable {
    pub fn new(alpha: &FiniteMeasure) -> FourierTable {
        FourierTable { q: alpha.q, level: alpha.level, vals: alpha.fourier_all() }
    }

    pub fn level(&self) -> (u32, u32) {
        self.level
    }

    /// alpha_hat at a pair of q-power roots of unity of order dividing the
    /// level.
    fn get(&self, r1: &RootOfUnity, r2: &RootOfUnity) -> &CycElem {
        let qm = self.q.pow(self.level.0);
        let qn = self.q.pow(self.level.1);
        debug_assert!(qm % r1.order == 0 && qn % r2.order == 0);
        let x1 = r1.exp * (qm / r1.order);
        let x2 = r2.exp * (qn / r2.order);
        &self.vals[(x1 * qn + x2) as usize]
    }
}

/// Gauss-sum route, recomputing the Fourier table.  Use `gamma_gauss_with`
/// to share the table across characters.
pub fn gamma_gauss(alpha: &FiniteMeasure, chi: &CharPair) -> Result<CycElem> {
    check_level(alpha, chi)?;
    gamma_gauss_with(&FourierTable::new(alpha), chi)
}

/// One functional entry: coefficient (root of unity times rational) against
/// the Fourier value at a monomial.
struct Entry {
    mono: RootOfUnity,
    coeff_root: RootOfUnity,
    coeff_rat: Option<Rational>,
}

pub fn gamma_gauss_with(table: &FourierTable, chi: &CharPair) -> Result<CycElem> {
    let q = chi.q;
    if table.q != q {
        return Err(MeasureError::Invalid("character and measure have different q".into()));
    }
    if table.level.0 < chi.cond.0.max(1) || table.level.1 < chi.cond.1.max(1) {
        return Err(MeasureError::LevelMismatch);
    }
    if chi.principal {
        // average over the q-1 extensions to the full unit group; the
        // extensions differ by the characters trivial on the principal units
        let g = primitive_root(q);
        let psi = RootOfUnity::new(q - 1, 1);
        let w1 = extension_base(q, g, chi.cond.0, &chi.images.0);
        let w2 = extension_base(q, g, chi.cond.1, &chi.images.1);
        let mut acc = CycElem::zero(1);
        for j1 in 0..q - 1 {
            for j2 in 0..q - 1 {
                let ext = CharPair::unit(
                    q,
                    w1.mul(&psi.pow(j1 as i64)),
                    w2.mul(&psi.pow(j2 as i64)),
                )?;
                acc = acc.add(&gamma_gauss_with(table, &ext)?);
            }
        }
        return Ok(acc.mul_rational(&Rational::from((1u64, (q - 1) * (q - 1)))));
    }
    let (e1, tau1) = component_functional(chi, 0);
    let (e2, tau2) = component_functional(chi, 1);
    let mut buckets: HashMap<RootOfUnity, CycElem> = HashMap::new();
    for a in &e1 {
        for b in &e2 {
            let mut v = table.get(&a.mono, &b.mono).clone();
            if v.is_zero() {
                continue;
            }
            match (&a.coeff_rat, &b.coeff_rat) {
                (None, None) => {}
                (Some(r), None) | (None, Some(r)) => v = v.mul_rational(r),
                (Some(r), Some(s)) => v = v.mul_rational(&(r * s).complete()),
            }
            let key = a.coeff_root.mul(&b.coeff_root);
            match buckets.get_mut(&key) {
                Some(acc) => *acc = acc.add(&v),
                None => {
                    buckets.insert(key, v);
                }
            }
        }
    }
    let mut out = CycElem::zero(1);
    let mut keys: Vec<_> = buckets.keys().copied().collect();
    keys.sort_by_key(|r| (r.order, r.exp));
    for r in keys {
        out = out.add(&mul_root(&buckets[&r], &r));
    }
    Ok(out.mul(&tau1).mul(&tau2))
}

/// The canonical extension of a principal-units character to the unit
/// group: trivial on the Teichmueller part, expressed by its image at the
/// primitive root g.
fn extension_base(q: u64, g: u64, cond: u32, im: &RootOfUnity) -> RootOfUnity {
    if cond == 0 {
        return RootOfUnity::one();
    }
    let md = q.pow(cond);
    let e0 = dlog(1 + q, pow_mod(g, q - 1, md), md, md / q).expect("g^(q-1) is principal");
    let inv = inv_mod(q - 1, im.order).expect("q-1 invertible mod a q-power");
    im.pow((e0 % im.order * inv % im.order) as i64)
}

/// The linear functional in the Fourier values representing one component
/// of the Gamma transform, together with its Gauss-sum prefactor.
/// A primitive component of conductor q^m uses the classical identity; a
/// trivial component subtracts the q | a part from the full mass.
fn component_functional(chi: &CharPair, comp: usize) -> (Vec<Entry>, CycElem) {
    let q = chi.q;
    let m = if comp == 0 { chi.cond.0 } else { chi.cond.1 };
    if m == 0 {
        let mut entries = vec![Entry {
            mono: RootOfUnity::one(),
            coeff_root: RootOfUnity::one(),
            coeff_rat: None,
        }];
        let minus = Rational::from((-1i64, q as i64));
        for x in 0..q {
            entries.push(Entry {
                mono: RootOfUnity::new(q, x as i64),
                coeff_root: RootOfUnity::one(),
                coeff_rat: Some(minus.clone()),
            });
        }
        return (entries, CycElem::one(1));
    }
    let qm = q.pow(m);
    let mut entries = Vec::new();
    let mut tau = CycElem::zero(1);
    for x in 0..qm {
        let s = match chi.eval_at(comp, x) {
            Some(s) => s,
            None => continue,
        };
        entries.push(Entry {
            mono: RootOfUnity::new(qm, x as i64),
            coeff_root: s.inv(),
            coeff_rat: None,
        });
        tau = tau.add(&s.mul(&RootOfUnity::new(qm, -(x as i64))).to_cyc());
    }
    (entries, tau.mul_rational(&Rational::from((1u64, qm))))
}
