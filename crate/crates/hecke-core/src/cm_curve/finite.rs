//! Reduction of a CM curve to a finite field, with a rational basis of the
//! q-power torsion and the O_K-action expressed as 2x2 matrices mod q^n.
//!
//! The torsion field degree r is found from the order of the Frobenius
//! element in (O_K / q^n)^x.  A basis of E[q^n](F_{l^r}) is built by
//! cofactor multiplication of deterministically enumerated curve points, and
//! the action of tau is recovered from the Frobenius endomorphism through
//! pi = u + v*tau (v invertible mod q^n), so no analytic input is needed.
//!
//! The two primes above l give conjugate Frobenius candidates; we pin the
//! one with positive tau-coefficient.  All independence verdicts downstream
//! are invariant under that choice.

use super::ctx::CMCurveCtx;
use super::{CurveError, Result};
use crate::arith::quad::QuadElem;
use rug::ops::RemRounding;
use rug::Rational;
use std::collections::HashMap;

fn mod_mul(a: u64, b: u64, m: u64) -> u64 {
    (a as u128 * b as u128 % m as u128) as u64
}

fn mod_pow(mut b: u64, mut e: u64, m: u64) -> u64 {
    let mut acc = 1 % m;
    b %= m;
    while e > 0 {
        if e & 1 == 1 {
            acc = mod_mul(acc, b, m);
        }
        b = mod_mul(b, b, m);
        e >>= 1;
    }
    acc
}

fn mod_inv(a: u64, m: u64) -> Option<u64> {
    crate::measures::inv_mod(a, m)
}

/// Residue of a rational with denominator prime to `l`.
fn rational_mod(r: &Rational, l: u64) -> Option<u64> {
    let num = r.numer().clone().rem_euc(rug::Integer::from(l)).to_u64()?;
    let den = r.denom().clone().rem_euc(rug::Integer::from(l)).to_u64()?;
    Some(mod_mul(num, mod_inv(den, l)?, l))
}

/// The field F_{l^r} as polynomials modulo a monic irreducible, coefficients
/// ascending.  The irreducible is the lexicographically first one, so field
/// construction is deterministic.
#[derive(Debug, Clone)]
pub struct FqCtx {
    pub l: u64,
    pub r: u32,
    pub modulus: Vec<u64>,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct FqElem {
    pub c: Vec<u64>,
}

impl FqCtx {
    pub fn new(l: u64, r: u32) -> Result<FqCtx> {
        if r == 0 {
            return Err(CurveError::Invalid("degree must be positive".into()));
        }
        if r == 1 {
            return Ok(FqCtx { l, r, modulus: vec![0, 1] });
        }
        let rr = r as usize;
        // lexicographic scan over the lower coefficients
        let mut coeffs = vec![0u64; rr];
        loop {
            let mut f: Vec<u64> = coeffs.clone();
            f.push(1);
            if poly_irreducible(&f, l) {
                return Ok(FqCtx { l, r, modulus: f });
            }
            let mut i = 0;
            loop {
                if i == rr {
                    return Err(CurveError::Invalid("no irreducible polynomial found".into()));
                }
                coeffs[i] += 1;
                if coeffs[i] == l {
                    coeffs[i] = 0;
                    i += 1;
                } else {
                    break;
                }
            }
        }
    }

    pub fn order(&self) -> u128 {
        (self.l as u128).pow(self.r)
    }

    pub fn zero(&self) -> FqElem {
        FqElem { c: vec![0; self.r as usize] }
    }

    pub fn one(&self) -> FqElem {
        self.from_u64(1)
    }

    pub fn from_u64(&self, v: u64) -> FqElem {
        let mut c = vec![0; self.r as usize];
        c[0] = v % self.l;
        FqElem { c }
    }

    /// Element number `idx` in the fixed coefficient enumeration.
    pub fn from_index(&self, mut idx: u128) -> FqElem {
        let mut c = vec![0; self.r as usize];
        for slot in c.iter_mut() {
            *slot = (idx % self.l as u128) as u64;
            idx /= self.l as u128;
        }
        FqElem { c }
    }

    pub fn is_zero(&self, a: &FqElem) -> bool {
        a.c.iter().all(|&x| x == 0)
    }

    pub fn add(&self, a: &FqElem, b: &FqElem) -> FqElem {
        FqElem { c: a.c.iter().zip(&b.c).map(|(x, y)| (x + y) % self.l).collect() }
    }

    pub fn sub(&self, a: &FqElem, b: &FqElem) -> FqElem {
        FqElem {
            c: a.c.iter().zip(&b.c).map(|(x, y)| (x + self.l - y) % self.l).collect(),
        }
    }

    pub fn neg(&self, a: &FqElem) -> FqElem {
        FqElem { c: a.c.iter().map(|&x| (self.l - x) % self.l).collect() }
    }

    pub fn mul(&self, a: &FqElem, b: &FqElem) -> FqElem {
        let rr = self.r as usize;
        let mut prod = vec![0u64; 2 * rr - 1];
        for (i, &x) in a.c.iter().enumerate() {
            if x == 0 {
                continue;
            }
            for (j, &y) in b.c.iter().enumerate() {
                prod[i + j] = (prod[i + j] + mod_mul(x, y, self.l)) % self.l;
            }
        }
        // reduce by the monic modulus
        for i in (rr..prod.len()).rev() {
            let coef = prod[i];
            if coef == 0 {
                continue;
            }
            prod[i] = 0;
            for j in 0..rr {
                let m = mod_mul(coef, self.modulus[j], self.l);
                prod[i - rr + j] = (prod[i - rr + j] + self.l - m % self.l) % self.l;
            }
        }
        prod.truncate(rr);
        FqElem { c: prod }
    }

    pub fn scalar(&self, a: &FqElem, k: u64) -> FqElem {
        let k = k % self.l;
        FqElem { c: a.c.iter().map(|&x| mod_mul(x, k, self.l)).collect() }
    }

    pub fn pow(&self, a: &FqElem, mut e: u128) -> FqElem {
        let mut base = a.clone();
        let mut acc = self.one();
        while e > 0 {
            if e & 1 == 1 {
                acc = self.mul(&acc, &base);
            }
            base = self.mul(&base, &base);
            e >>= 1;
        }
        acc
    }

    pub fn inv(&self, a: &FqElem) -> Result<FqElem> {
        if self.is_zero(a) {
            return Err(CurveError::Invalid("inverse of zero".into()));
        }
        Ok(self.pow(a, self.order() - 2))
    }

    /// Square root by Tonelli–Shanks, `None` when not a square.
    pub fn sqrt(&self, a: &FqElem) -> Option<FqElem> {
        if self.is_zero(a) {
            return Some(self.zero());
        }
        let q1 = self.order() - 1;
        if self.pow(a, q1 / 2) != self.one() {
            return None;
        }
        let mut s = 0u32;
        let mut t = q1;
        while t % 2 == 0 {
            t /= 2;
            s += 1;
        }
        // first non-residue in the fixed enumeration
        let mut z = self.zero();
        for idx in 2..self.order() {
            let cand = self.from_index(idx);
            if !self.is_zero(&cand) && self.pow(&cand, q1 / 2) != self.one() {
                z = cand;
                break;
            }
        }
        let mut m = s;
        let mut c = self.pow(&z, t);
        let mut u = self.pow(a, t);
        let mut x = self.pow(a, (t + 1) / 2);
        while u != self.one() {
            let mut i = 0u32;
            let mut probe = u.clone();
            while probe != self.one() {
                probe = self.mul(&probe, &probe);
                i += 1;
                if i == m {
                    return None;
                }
            }
            let mut b = c.clone();
            for _ in 0..(m - i - 1) {
                b = self.mul(&b, &b);
            }
            m = i;
            c = self.mul(&b, &b);
            u = self.mul(&u, &c);
            x = self.mul(&x, &b);
        }
        Some(x)
    }

    /// `a^l`, the arithmetic Frobenius.
    pub fn frobenius(&self, a: &FqElem) -> FqElem {
        self.pow(a, self.l as u128)
    }
}

fn poly_mod(f: &[u64], g: &[u64], l: u64) -> Vec<u64> {
    // remainder of f by monic-leading g (g need not be monic: normalize)
    let mut f = f.to_vec();
    let dg = g.len() - 1;
    let lead_inv = mod_inv(*g.last().unwrap(), l).unwrap();
    while f.len() > dg {
        let coef = *f.last().unwrap();
        if coef != 0 {
            let scale = mod_mul(coef, lead_inv, l);
            let off = f.len() - 1 - dg;
            for j in 0..=dg {
                let m = mod_mul(scale, g[j], l);
                f[off + j] = (f[off + j] + l - m) % l;
            }
        }
        f.pop();
    }
    while f.len() > 1 && *f.last().unwrap() == 0 {
        f.pop();
    }
    if f.is_empty() {
        f.push(0);
    }
    f
}

fn poly_mulmod(a: &[u64], b: &[u64], f: &[u64], l: u64) -> Vec<u64> {
    let mut prod = vec![0u64; a.len() + b.len() - 1];
    for (i, &x) in a.iter().enumerate() {
        for (j, &y) in b.iter().enumerate() {
            prod[i + j] = (prod[i + j] + mod_mul(x, y, l)) % l;
        }
    }
    poly_mod(&prod, f, l)
}

fn poly_powmod_xq(f: &[u64], l: u64, e: u32) -> Vec<u64> {
    // x^(l^e) mod f by e-fold l-th powering
    let mut acc = poly_mod(&[0, 1], f, l);
    for _ in 0..e {
        let mut p = vec![1u64];
        let mut base = acc.clone();
        let mut k = l;
        while k > 0 {
            if k & 1 == 1 {
                p = poly_mulmod(&p, &base, f, l);
            }
            base = poly_mulmod(&base, &base, f, l);
            k >>= 1;
        }
        acc = p;
    }
    acc
}

fn poly_gcd(mut a: Vec<u64>, mut b: Vec<u64>, l: u64) -> Vec<u64> {
    let trim = |v: &mut Vec<u64>| {
        while v.len() > 1 && *v.last().unwrap() == 0 {
            v.pop();
        }
    };
    trim(&mut a);
    trim(&mut b);
    while !(b.len() == 1 && b[0] == 0) {
        let mut r = poly_mod(&a, &b, l);
        let tmp = b;
        a = tmp;
        trim(&mut r);
        b = r;
    }
    a
}

fn poly_irreducible(f: &[u64], l: u64) -> bool {
    let r = (f.len() - 1) as u32;
    // x^(l^r) == x mod f
    let xqr = poly_powmod_xq(f, l, r);
    let x = poly_mod(&[0, 1], f, l);
    if xqr != x {
        return false;
    }
    // gcd(x^(l^(r/d)) - x, f) == 1 for each prime d | r
    let mut rest = r;
    let mut d = 2;
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
        let mut diff = poly_powmod_xq(f, l, r / pr);
        while diff.len() < 2 {
            diff.push(0);
        }
        diff[1] = (diff[1] + l - 1) % l;
        let g = poly_gcd(diff, f.to_vec(), l);
        if !(g.len() == 1 && g[0] != 0) {
            return false;
        }
    }
    true
}

/// A reduced curve `Y^2 = X^3 + aX + b` over `F_l` (with `Y = y/2`),
/// together with the q^n-torsion data over `F_{l^r}`.
#[derive(Debug, Clone)]
pub struct ReducedCurve {
    pub l: u64,
    pub r: u32,
    pub fq: FqCtx,
    pub a: FqElem,
    pub b: FqElem,
    /// Exhaustive point count over the prime field `F_l`.
    pub count_l: u64,
    /// Frobenius of `F_l` as an element of `O_K` (normalized tau-coefficient
    /// positive), so `#E(F_{l^m}) = N(pi^m - 1)`.
    pub frob: QuadElem,
    pub n: u32,
    pub qn: u64,
    /// Basis of `E[q^n](F_{l^r})`.
    pub basis: (FqPoint, FqPoint),
    /// Matrix of the tau-action on the basis, columns are images.
    pub mat_tau: [[u64; 2]; 2],
    combos: HashMap<FqPoint, (u64, u64)>,
}

pub type FqPoint = Option<(FqElem, FqElem)>;

impl ReducedCurve {
    pub fn on_curve(&self, pt: &FqPoint) -> bool {
        match pt {
            None => true,
            Some((x, y)) => {
                let fq = &self.fq;
                let rhs = fq.add(
                    &fq.add(&fq.mul(&fq.mul(x, x), x), &fq.mul(&self.a, x)),
                    &self.b,
                );
                fq.mul(y, y) == rhs
            }
        }
    }

    pub fn neg(&self, pt: &FqPoint) -> FqPoint {
        pt.as_ref().map(|(x, y)| (x.clone(), self.fq.neg(y)))
    }

    pub fn add(&self, p: &FqPoint, q: &FqPoint) -> FqPoint {
        let fq = &self.fq;
        let (x1, y1) = match p {
            None => return q.clone(),
            Some(v) => v,
        };
        let (x2, y2) = match q {
            None => return p.clone(),
            Some(v) => v,
        };
        let lam = if x1 == x2 {
            if *y1 != fq.neg(y2) {
                // tangent
                let num = fq.add(&fq.scalar(&fq.mul(x1, x1), 3), &self.a);
                let den = fq.scalar(y1, 2);
                fq.mul(&num, &fq.inv(&den).expect("tangent at 2-torsion"))
            } else {
                return None;
            }
        } else {
            let num = fq.sub(y2, y1);
            let den = fq.sub(x2, x1);
            fq.mul(&num, &fq.inv(&den).expect("distinct x"))
        };
        let x3 = fq.sub(&fq.sub(&fq.mul(&lam, &lam), x1), x2);
        let y3 = fq.sub(&fq.mul(&lam, &fq.sub(x1, &x3)), y1);
        Some((x3, y3))
    }

    pub fn scalar_mul(&self, k: u128, p: &FqPoint) -> FqPoint {
        let mut acc: FqPoint = None;
        let mut base = p.clone();
        let mut k = k;
        while k > 0 {
            if k & 1 == 1 {
                acc = self.add(&acc, &base);
            }
            base = self.add(&base, &base);
            k >>= 1;
        }
        acc
    }

    pub fn frobenius_point(&self, p: &FqPoint) -> FqPoint {
        p.as_ref().map(|(x, y)| (self.fq.frobenius(x), self.fq.frobenius(y)))
    }

    /// Coordinates of a q^n-torsion point in the stored basis.
    pub fn decompose(&self, p: &FqPoint) -> Option<(u64, u64)> {
        self.combos.get(p).copied()
    }

    /// Matrix of `mu = a + b tau` acting on the basis, entries mod q^n.
    pub fn endo_matrix(&self, mu: &QuadElem) -> [[u64; 2]; 2] {
        let qn = self.qn;
        let a = (mu.a.rem_euclid(qn as i128)) as u64;
        let b = (mu.b.rem_euclid(qn as i128)) as u64;
        let mut m = [[0u64; 2]; 2];
        for i in 0..2 {
            for j in 0..2 {
                let id = if i == j { a } else { 0 };
                m[i][j] = (id + mod_mul(b, self.mat_tau[i][j], qn)) % qn;
            }
        }
        m
    }

    /// All q^n-torsion points (owned copies of the combo table keys).
    pub fn torsion_points(&self) -> Vec<FqPoint> {
        self.combos.keys().cloned().collect()
    }
}

/// Reduce the context's curve at a split prime `l` of good reduction and
/// return the q^n-torsion package over the minimal field `F_{l^r}`.
pub fn reduce_curve(ctx: &CMCurveCtx, l: u64, n: u32, r_cap: u32) -> Result<ReducedCurve> {
    let nf = ctx.conductor.norm().unsigned_abs() as u64;
    if l < 5 || 6 % l == 0 || nf % l == 0 || ctx.q == l {
        return Err(CurveError::BadReduction);
    }
    // short form Y^2 = X^3 + aX + b with Y = y/2: a = -g2/4, b = -g3/4
    let a_q = Rational::from(-&ctx.g2) / Rational::from(4);
    let b_q = Rational::from(-&ctx.g3) / Rational::from(4);
    let a_l = rational_mod(&a_q, l).ok_or(CurveError::BadReduction)?;
    let b_l = rational_mod(&b_q, l).ok_or(CurveError::BadReduction)?;
    // nonsingular mod l
    let disc = (4 * mod_pow(a_l, 3, l) + 27 * mod_mul(b_l, b_l, l)) % l;
    if disc == 0 {
        return Err(CurveError::BadReduction);
    }

    // exhaustive count over F_l
    let mut sq = vec![0u64; l as usize];
    for y in 0..l {
        sq[mod_mul(y, y, l) as usize] += 1;
    }
    let mut count = 1u64;
    for x in 0..l {
        let t = (mod_pow(x, 3, l) + mod_mul(a_l, x, l) + b_l) % l;
        count += sq[t as usize];
    }
    let trace = l as i128 + 1 - count as i128;

    // Frobenius element: u + v tau with norm l and the counted trace;
    // normalized with v > 0 (v = 0 would be supersingular, rejected)
    let (t1, _t0) = ctx.field.tau_sq();
    let mut frob = None;
    let bound = (l as f64).sqrt() as i128 + 2;
    'search: for v in 1..=bound {
        for u in -bound..=bound {
            let cand = QuadElem::new(ctx.field, u, v);
            if cand.norm() == l as i128 && 2 * u + v * t1 == trace {
                frob = Some(cand);
                break 'search;
            }
        }
    }
    let frob = frob.ok_or(CurveError::BadReduction)?;

    // minimal r with pi^r = 1 in (O_K / q^n)^x
    let qn = (ctx.q as i128).pow(n);
    let reduce = |x: &QuadElem| QuadElem::new(ctx.field, x.a.rem_euclid(qn), x.b.rem_euclid(qn));
    let one = ctx.field.one();
    let mut r = 0u32;
    let mut acc = one.clone();
    loop {
        r += 1;
        if r > r_cap {
            return Err(CurveError::TorsionNotRational);
        }
        acc = reduce(&acc.mul(&frob));
        if acc == one {
            break;
        }
    }

    let fq = FqCtx::new(l, r)?;
    let a = fq.from_u64(a_l);
    let b = fq.from_u64(b_l);

    // #E(F_{l^r}) = N(pi^r - 1)
    let pir = frob.pow(r);
    let big_n = pir.sub(&one).norm().unsigned_abs();
    let qn_u = qn as u128;
    if big_n % (qn_u * qn_u) != 0 {
        return Err(CurveError::Invalid("torsion order does not divide the count".into()));
    }
    let mut e_part: u128 = 1;
    let mut rest = big_n;
    while rest % ctx.q as u128 == 0 {
        rest /= ctx.q as u128;
        e_part *= ctx.q as u128;
    }
    let cofactor = big_n / e_part;

    let mut curve = ReducedCurve {
        l,
        r,
        fq,
        a,
        b,
        count_l: count,
        frob,
        n,
        qn: qn as u64,
        basis: (None, None),
        mat_tau: [[0; 2]; 2],
        combos: HashMap::new(),
    };

    // deterministic point stream: x runs through the fixed field enumeration
    let mut sylow_points = Vec::new();
    let mut p1: Option<FqPoint> = None;
    let mut p2: Option<FqPoint> = None;
    'sample: for idx in 0..curve.fq.order().min(500_000) {
        let x = curve.fq.from_index(idx);
        let rhs = curve.fq.add(
            &curve.fq.add(
                &curve.fq.mul(&curve.fq.mul(&x, &x), &x),
                &curve.fq.mul(&curve.a, &x),
            ),
            &curve.b,
        );
        let y = match curve.fq.sqrt(&rhs) {
            Some(y) => y,
            None => continue,
        };
        let pt: FqPoint = Some((x, y));
        let mut s = curve.scalar_mul(cofactor, &pt);
        // push down to exact order q^n
        let mut ord = 0u32;
        let mut probe = s.clone();
        while probe.is_some() {
            probe = curve.scalar_mul(ctx.q as u128, &probe);
            ord += 1;
        }
        if ord < n {
            continue;
        }
        for _ in 0..(ord - n) {
            s = curve.scalar_mul(ctx.q as u128, &s);
        }
        sylow_points.push(s.clone());
        if p1.is_none() {
            p1 = Some(s);
            continue;
        }
        // independence: the q^{n-1} multiples must span distinct lines
        let t = curve.scalar_mul((qn as u128) / ctx.q as u128, p1.as_ref().unwrap());
        let u = curve.scalar_mul((qn as u128) / ctx.q as u128, &s);
        let mut dep = false;
        let mut acc: FqPoint = None;
        for _ in 0..ctx.q {
            if acc == u {
                dep = true;
                break;
            }
            acc = curve.add(&acc, &t);
        }
        if !dep {
            p2 = Some(s);
            break 'sample;
        }
    }
    let (p1, p2) = match (p1, p2) {
        (Some(a), Some(b)) => (a, b),
        _ => return Err(CurveError::Invalid("failed to find a torsion basis".into())),
    };

    // full combo table: i*P1 + j*P2
    let mut combos = HashMap::new();
    let mut rowp: FqPoint = None;
    for i in 0..qn as u64 {
        let mut cur = rowp.clone();
        for j in 0..qn as u64 {
            combos.insert(cur.clone(), (i, j));
            cur = curve.add(&cur, &p2);
        }
        rowp = curve.add(&rowp, &p1);
    }
    if combos.len() != (qn as usize) * (qn as usize) {
        return Err(CurveError::Invalid("basis points are not independent".into()));
    }
    curve.combos = combos;
    curve.basis = (p1, p2);

    // tau action via tau = (pi - u) / v on E[q^n]
    let u_c = curve.frob.a.rem_euclid(qn) as u64;
    let v_c = curve.frob.b.rem_euclid(qn) as u64;
    let v_inv = mod_inv(v_c, qn as u64)
        .ok_or_else(|| CurveError::Invalid("tau coefficient of Frobenius not a unit mod q^n".into()))?;
    let tau_of = |pt: &FqPoint, curve: &ReducedCurve| -> Result<(u64, u64)> {
        let fr = curve.frobenius_point(pt);
        let up = curve.scalar_mul(u_c as u128, pt);
        let diff = curve.add(&fr, &curve.neg(&up));
        let img = curve.scalar_mul(v_inv as u128, &diff);
        curve
            .decompose(&img)
            .ok_or_else(|| CurveError::Invalid("tau image escapes the torsion group".into()))
    };
    let c1 = tau_of(&curve.basis.0.clone(), &curve)?;
    let c2 = tau_of(&curve.basis.1.clone(), &curve)?;
    curve.mat_tau = [[c1.0, c2.0], [c1.1, c2.1]];
    Ok(curve)
}
