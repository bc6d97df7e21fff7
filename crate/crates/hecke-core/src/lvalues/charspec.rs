//! The character data behind every L-series here: the canonical unitary
//! character phi of infinity type (1, 0) fixed by the congruence-to-1
//! normalization at the conductor, a finite-order q-power twist kappa, and
//! the modulus h = g q^(m+1) q*^(n+1).
//!
//! At class number one with [R(f) : K] = 1, the ray classes modulo h are in
//! bijection with pairs of unit residues on the two split eigenlines at q:
//! every coprime ideal has a unique generator congruent to 1 modulo f, and
//! its images under the two reductions O_K -> Z/q^(m+1) label the class.

use super::{LvalError, Result};
use crate::arith::ideal::{normalize_generator, IdealK};
use crate::arith::quad::{Field, QuadElem};
use crate::cm_curve::CMCurveCtx;
use crate::efm::{aux_modulus, ray_class_degree};
use crate::measures::{CharPair, RootOfUnity};

/// Root of x^2 + 1 modulo q^e that reduces to -a/b mod q for the split
/// generator a + b*i, lifted by Newton's iteration.
pub(crate) fn i_residue(q: u64, e: u32, nu: &QuadElem) -> u64 {
    let qi = q as i128;
    let b_inv = mod_inv(nu.b.rem_euclid(qi), qi);
    let mut r = (-nu.a * b_inv).rem_euclid(qi);
    let target = qi.pow(e);
    let mut modulus = qi;
    while modulus < target {
        modulus = (modulus * modulus).min(target);
        let f = (r * r + 1).rem_euclid(modulus);
        let d = mod_inv((2 * r).rem_euclid(modulus), modulus);
        r = (r - f * d).rem_euclid(modulus);
    }
    r.rem_euclid(target) as u64
}

fn mod_inv(a: i128, m: i128) -> i128 {
    let (mut r0, mut r1) = (m, a.rem_euclid(m));
    let (mut s0, mut s1) = (0i128, 1i128);
    while r1 != 0 {
        let q = r0 / r1;
        (r0, r1) = (r1, r0 - q * r1);
        (s0, s1) = (s1, s0 - q * s1);
    }
    assert_eq!(r0, 1, "not invertible");
    s0.rem_euclid(m)
}

/// All data of the Hecke character Psi kappa = phi^(k-j) kappa N^j on the
/// fixed curve context, together with the modulus h.
#[derive(Debug, Clone)]
pub struct HeckeCharSpec {
    pub field: Field,
    /// Conductor of phi.
    pub f: IdealK,
    /// Auxiliary modulus: principal, divisible by f, coprime to pq.
    pub g: IdealK,
    pub q: u64,
    pub k: u32,
    pub j: i32,
    /// (m, n): the twist kappa has conductor dividing q^(m+1) q*^(n+1).
    pub level: (u32, u32),
    pub kappa: CharPair,
    /// Generator of the prime q above q with tau = i mapping to -a/b.
    pub nu: QuadElem,
    pub prec: u32,
}

impl HeckeCharSpec {
    /// The reference shape: phi normalized at the curve conductor, chi_0
    /// trivial (enforced through [R(f) : K] = 1), split q with both primes
    /// principal.  kappa must be trivial on the residue image of the unit
    /// group, otherwise it does not descend to ray classes.
    pub fn new(
        ctx: &CMCurveCtx,
        k: u32,
        j: i32,
        level: (u32, u32),
        kappa: CharPair,
        prec: u32,
    ) -> Result<HeckeCharSpec> {
        if j > 0 || (-j) as u32 >= k {
            return Err(LvalError::Invalid("need 0 <= -j < k".into()));
        }
        if (k as i64 + j as i64) < 3 {
            return Err(LvalError::Invalid("k + j >= 3 required for convergence".into()));
        }
        if kappa.q != ctx.q {
            return Err(LvalError::Invalid("kappa has the wrong residue prime".into()));
        }
        if kappa.principal {
            return Err(LvalError::Invalid("kappa must be a full unit-group character".into()));
        }
        if kappa.cond.0 > level.0 + 1 || kappa.cond.1 > level.1 + 1 {
            return Err(LvalError::Invalid("kappa conductor exceeds the level".into()));
        }
        if ray_class_degree(&ctx.conductor) != 1 {
            return Err(LvalError::Invalid(
                "only the collapsed case [R(f) : K] = 1 is supported".into(),
            ));
        }
        let g = aux_modulus(ctx)?;
        if !g.eq_ideal(&ctx.conductor) {
            return Err(LvalError::Invalid(
                "auxiliary modulus strictly larger than the conductor is not supported".into(),
            ));
        }
        let nu = split_generator(ctx.field, ctx.q)
            .ok_or_else(|| LvalError::Invalid(format!("q = {} is not split", ctx.q)))?;
        let spec = HeckeCharSpec {
            field: ctx.field,
            f: ctx.conductor.clone(),
            g,
            q: ctx.q,
            k,
            j,
            level,
            kappa,
            nu,
            prec,
        };
        let iu = spec.unit_image();
        match spec.kappa.eval(iu) {
            Some(r) if r.is_one() => {}
            _ => {
                return Err(LvalError::Invalid(
                    "kappa is not trivial on the unit image, so it is not a ray class character"
                        .into(),
                ));
            }
        }
        Ok(spec)
    }

    pub fn w(&self) -> u32 {
        (self.k as i64 - self.j as i64) as u32
    }

    pub fn qm1(&self) -> u64 {
        self.q.pow(self.level.0 + 1)
    }

    pub fn qn1(&self) -> u64 {
        self.q.pow(self.level.1 + 1)
    }

    /// Generator of h = g q^(m+1) q*^(n+1).
    pub fn h_gen(&self) -> QuadElem {
        self.g
            .gen
            .mul(&self.nu.pow(self.level.0 + 1))
            .mul(&self.nu.conj().pow(self.level.1 + 1))
    }

    pub fn h_ideal(&self) -> IdealK {
        IdealK::new(self.h_gen())
    }

    /// Residues of i at levels m+1 (q side) and n+1 (conjugate side).
    pub fn i_residues(&self) -> (u64, u64) {
        (
            i_residue(self.q, self.level.0 + 1, &self.nu),
            i_residue(self.q, self.level.1 + 1, &self.nu.conj()),
        )
    }

    /// Image of the generating root of unity i under the class labeling.
    fn unit_image(&self) -> (u64, u64) {
        let one = self.field.tau();
        self.class_of(&one)
    }

    /// The class label of a normalized generator: its reductions on the two
    /// split eigenlines.
    pub fn class_of(&self, beta: &QuadElem) -> (u64, u64) {
        let (r1, r2) = self.i_residues();
        let m1 = self.qm1() as i128;
        let m2 = self.qn1() as i128;
        let c1 = (beta.a + beta.b * r1 as i128).rem_euclid(m1) as u64;
        let c2 = (beta.a + beta.b * r2 as i128).rem_euclid(m2) as u64;
        (c1, c2)
    }

    /// The unique generator of b congruent to 1 mod f.
    pub fn phi(&self, b: &IdealK) -> Result<QuadElem> {
        Ok(normalize_generator(b, &self.f)?)
    }

    /// All ray classes modulo h, labeled by unit residue pairs, in a fixed
    /// order.
    pub fn classes(&self) -> Vec<(u64, u64)> {
        let mut out = Vec::new();
        for c1 in 1..self.qm1() {
            if c1 % self.q == 0 {
                continue;
            }
            for c2 in 1..self.qn1() {
                if c2 % self.q == 0 {
                    continue;
                }
                out.push((c1, c2));
            }
        }
        out
    }

    /// upsilon = kappa (chi_0 is trivial here) evaluated on a class label.
    pub fn upsilon(&self, c: (u64, u64)) -> Result<RootOfUnity> {
        self.kappa
            .eval(c)
            .ok_or_else(|| LvalError::Invalid("class label is not a unit pair".into()))
    }

    /// A generator congruent to 1 mod f realizing the given class label,
    /// found by lifting the split-eigenline congruences and correcting
    /// modulo f.
    pub fn class_generator(&self, c: (u64, u64)) -> Result<QuadElem> {
        let (r1, r2) = self.i_residues();
        let qq = self.q.pow(self.level.0.max(self.level.1) + 1) as i128;
        // x + y r1 = c1, x + y r2 = c2 mod q^(max+1); lifts of c1, c2 are
        // free since only the stated levels are pinned
        let diff = (r1 as i128 - r2 as i128).rem_euclid(qq);
        let y = ((c.0 as i128 - c.1 as i128) * mod_inv(diff, qq)).rem_euclid(qq);
        let x = (c.0 as i128 - y * r1 as i128).rem_euclid(qq);
        let g0 = QuadElem::new(self.field, x, y);
        // correct to 1 mod f along multiples of q^(max+1)
        let step = QuadElem::new(self.field, qq, 0);
        let fnorm = self.f.norm();
        for a in 0..(2 * fnorm) {
            for b in 0..(2 * fnorm) {
                let delta = QuadElem::new(self.field, a, b);
                let cand = g0.add(&step.mul(&delta));
                if self.f.congruent(&cand, &self.field.one()) {
                    debug_assert_eq!(self.class_of(&cand), c);
                    return Ok(cand);
                }
            }
        }
        Err(LvalError::Invalid("no class generator found".into()))
    }
}

/// A generator of a prime above q, or None when q is not split.  Among the
/// unit-equivalent choices the one with the larger rational part is taken,
/// so the two primes get a fixed labeling.
fn split_generator(field: Field, q: u64) -> Option<QuadElem> {
    let qi = q as i128;
    let mut best: Option<QuadElem> = None;
    for a in 1..qi {
        for b in 1..qi {
            let cand = QuadElem::new(field, a, b);
            if cand.norm() == qi && best.as_ref().map_or(true, |x| cand.a > x.a) {
                best = Some(cand);
            }
        }
    }
    best
}

/// All admissible twists at the given level: characters of the product of
/// the two unit groups that are trivial on the residue image of the roots of
/// unity, tagged by their exponent indices on the canonical generators.
pub fn kappa_list(ctx: &CMCurveCtx, level: (u32, u32)) -> Result<Vec<((u64, u64), CharPair)>> {
    let q = ctx.q;
    let nu = split_generator(ctx.field, q)
        .ok_or_else(|| LvalError::Invalid(format!("q = {q} is not split")))?;
    let ord1 = q.pow(level.0) * (q - 1);
    let ord2 = q.pow(level.1) * (q - 1);
    let i1 = i_residue(q, level.0 + 1, &nu);
    let i2 = i_residue(q, level.1 + 1, &nu.conj());
    let mut out = Vec::new();
    for t1 in 0..ord1 {
        for t2 in 0..ord2 {
            let kappa = CharPair::unit(
                q,
                RootOfUnity::new(ord1, t1 as i64),
                RootOfUnity::new(ord2, t2 as i64),
            )?;
            match kappa.eval((i1, i2)) {
                Some(r) if r.is_one() => out.push(((t1, t2), kappa)),
                _ => {}
            }
        }
    }
    Ok(out)
}
