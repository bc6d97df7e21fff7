//! Valuations at a fixed prime above p.
//!
//! The context fixes a prime of K above the split prime p, and for every
//! cyclotomic order N (p coprime to N) a prime of Q(zeta_N) above p given by
//! an irreducible factor of the N-th cyclotomic polynomial mod p, Hensel
//! lifted to a p-power modulus.  Factors are chosen deterministically
//! (lexicographically smallest coefficient vector) subject to compatibility
//! with every previously chosen divisor order, so valuations computed in
//! different layers of the tower agree.

use super::cyc::{cyclotomic_poly, CycElem};
use super::quad::{Field, QuadElem};
use super::{ArithError, Result};
use rug::{Complete, Integer, Rational};
use rug::ops::Pow;
use std::collections::HashMap;
use std::sync::Mutex;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Valuation {
    Finite(Rational),
    Infinite,
}

impl Valuation {
    pub fn finite_i64(v: i64) -> Valuation {
        Valuation::Finite(Rational::from(v))
    }

    pub fn as_rational(&self) -> Option<&Rational> {
        match self {
            Valuation::Finite(r) => Some(r),
            Valuation::Infinite => None,
        }
    }
}

// ---- polynomial arithmetic over F_p (p fits in u64, p^2 fits in u64) ----

fn trim(v: &mut Vec<u64>) {
    while v.len() > 1 && *v.last().unwrap() == 0 {
        v.pop();
    }
}

fn pmul(a: &[u64], b: &[u64], p: u64) -> Vec<u64> {
    let mut out = vec![0u64; a.len() + b.len() - 1];
    for (i, &x) in a.iter().enumerate() {
        if x == 0 {
            continue;
        }
        for (j, &y) in b.iter().enumerate() {
            out[i + j] = (out[i + j] + x * y) % p;
        }
    }
    trim(&mut out);
    out
}

fn prem(a: &[u64], m: &[u64], p: u64) -> Vec<u64> {
    if m.len() == 1 {
        return vec![0];
    }
    let mut r = a.to_vec();
    let dm = m.len() - 1;
    let lead_inv = inv_mod(m[dm], p);
    while r.len() > dm {
        let d = r.len() - 1;
        let c = (r[d] * lead_inv) % p;
        if c != 0 {
            for j in 0..=dm {
                let idx = d - dm + j;
                let sub = (c * m[j]) % p;
                r[idx] = (r[idx] + p - sub) % p;
            }
        }
        r.pop();
        trim(&mut r);
        if r.len() <= dm && r.len() < m.len() {
            break;
        }
    }
    trim(&mut r);
    r
}

fn pgcd(a: &[u64], b: &[u64], p: u64) -> Vec<u64> {
    let (mut a, mut b) = (a.to_vec(), b.to_vec());
    while !(b.len() == 1 && b[0] == 0) {
        let r = prem(&a, &b, p);
        a = b;
        b = r;
    }
    // make monic
    let l = *a.last().unwrap();
    if l != 0 && l != 1 {
        let li = inv_mod(l, p);
        for c in a.iter_mut() {
            *c = (*c * li) % p;
        }
    }
    a
}

fn ppowmod(base: &[u64], mut e: Integer, m: &[u64], p: u64) -> Vec<u64> {
    let mut acc = vec![1u64];
    let mut b = prem(base, m, p);
    while e != 0 {
        if e.get_bit(0) {
            acc = prem(&pmul(&acc, &b, p), m, p);
        }
        e >>= 1;
        if e != 0 {
            b = prem(&pmul(&b, &b, p), m, p);
        }
    }
    acc
}

fn inv_mod(a: u64, p: u64) -> u64 {
    // Fermat
    let mut e = p - 2;
    let mut acc = 1u64;
    let mut b = a % p;
    while e > 0 {
        if e & 1 == 1 {
            acc = acc * b % p;
        }
        b = b * b % p;
        e >>= 1;
    }
    acc
}

/// Extended Euclid in F_p[x]: returns (g, s, t) with s a + t b = g, g monic.
fn pxgcd(a: &[u64], b: &[u64], p: u64) -> (Vec<u64>, Vec<u64>, Vec<u64>) {
    let mut r0 = a.to_vec();
    let mut r1 = b.to_vec();
    let mut s0 = vec![1u64];
    let mut s1 = vec![0u64];
    let mut t0 = vec![0u64];
    let mut t1 = vec![1u64];
    while !(r1.len() == 1 && r1[0] == 0) {
        let (q, r) = pdivmod(&r0, &r1, p);
        let ns = psub(&s0, &pmul(&q, &s1, p), p);
        let nt = psub(&t0, &pmul(&q, &t1, p), p);
        r0 = r1;
        r1 = r;
        s0 = s1;
        s1 = ns;
        t0 = t1;
        t1 = nt;
    }
    let l = *r0.last().unwrap();
    if l != 1 && l != 0 {
        let li = inv_mod(l, p);
        for v in [&mut r0, &mut s0, &mut t0] {
            for c in v.iter_mut() {
                *c = *c * li % p;
            }
        }
    }
    (r0, s0, t0)
}

fn psub(a: &[u64], b: &[u64], p: u64) -> Vec<u64> {
    let n = a.len().max(b.len());
    let mut out = vec![0u64; n];
    for i in 0..n {
        let x = *a.get(i).unwrap_or(&0);
        let y = *b.get(i).unwrap_or(&0);
        out[i] = (x + p - y) % p;
    }
    trim(&mut out);
    out
}

fn pdivmod(a: &[u64], b: &[u64], p: u64) -> (Vec<u64>, Vec<u64>) {
    let db = b.len() - 1;
    if a.len() <= db {
        return (vec![0], a.to_vec());
    }
    let mut r = a.to_vec();
    let mut q = vec![0u64; a.len() - db];
    let li = inv_mod(b[db], p);
    for i in (0..q.len()).rev() {
        if r.len() <= i + db {
            continue;
        }
        let c = r[i + db] * li % p;
        q[i] = c;
        if c != 0 {
            for j in 0..=db {
                let sub = c * b[j] % p;
                r[i + j] = (r[i + j] + p - sub) % p;
            }
        }
    }
    trim(&mut r);
    trim(&mut q);
    (q, r)
}

fn multiplicative_order(p: u64, n: u64) -> u64 {
    let mut ord = 1u64;
    let mut acc = p % n;
    while acc != 1 {
        acc = acc * p % n;
        ord += 1;
    }
    ord
}

/// Complete factorization of a squarefree polynomial all of whose irreducible
/// factors have degree f, by deterministic equal-degree splitting.
fn equal_degree_factor(poly: Vec<u64>, f: u64, p: u64) -> Vec<Vec<u64>> {
    let deg = poly.len() as u64 - 1;
    if deg == f {
        return vec![poly];
    }
    // try gcd(poly, (x + c)^((p^f - 1)/2) - 1) for c = 0, 1, 2, ...
    let exp = (Integer::from(p).pow(f as u32) - 1u32) / 2u32;
    for c in 0..10_000u64 {
        // deterministically sweep bases x + c, then x^2 + c
        let base: Vec<u64> = if c < 5000 {
            vec![c % p, 1]
        } else {
            vec![c % p, (c / p) % p, 1]
        };
        let b = ppowmod(&base, exp.clone(), &poly, p);
        let bm1 = psub(&b, &[1], p);
        if bm1.len() == 1 && bm1[0] == 0 {
            continue;
        }
        let g = pgcd(&poly, &bm1, p);
        let dg = g.len() as u64 - 1;
        if dg > 0 && dg < deg {
            let (h, r) = pdivmod(&poly, &g, p);
            debug_assert!(r.len() == 1 && r[0] == 0);
            let mut out = equal_degree_factor(g, f, p);
            out.extend(equal_degree_factor(h, f, p));
            return out;
        }
    }
    panic!("equal-degree splitting failed to find a splitter");
}

// ---- Hensel lifting of a factor of Phi_N from mod p to mod p^M ----

#[derive(Debug, Clone)]
struct LiftedFactor {
    /// monic, little-endian, coefficients reduced mod `modulus`
    g: Vec<Integer>,
    /// p^m_exp
    modulus: Integer,
    m_exp: u32,
    /// the mod-p factor (for compatibility checks)
    g_mod_p: Vec<u64>,
}

fn lift_factor(phi: &[Integer], g0: &[u64], p: u64, m_exp: u32) -> LiftedFactor {
    let pz = Integer::from(p);
    // cofactor h0 = phi / g0 mod p
    let phi_p: Vec<u64> = phi.iter().map(|c| c.mod_u(p as u32) as u64).collect();
    let (h0, r) = pdivmod(&phi_p, &g0.to_vec(), p);
    debug_assert!(r.len() == 1 && r[0] == 0);
    let (one, s, t) = pxgcd(&g0.to_vec(), &h0, p);
    debug_assert!(one.len() == 1 && one[0] == 1);

    let to_int = |v: &[u64]| -> Vec<Integer> { v.iter().map(|&c| Integer::from(c)).collect() };
    let mut g = to_int(g0);
    let h = to_int(&h0);
    let s = to_int(&s);
    let t = to_int(&t);
    let mut modulus = pz.clone();
    let mut h_cur = h;

    for _ in 1..m_exp {
        let new_modulus = (&modulus * &pz).complete();
        // e = (phi - g h) / modulus mod p
        let prod = zpoly_mul(&g, &h_cur);
        let mut e: Vec<Integer> = Vec::with_capacity(phi.len());
        for i in 0..phi.len() {
            let a = phi.get(i).cloned().unwrap_or_default();
            let b = prod.get(i).cloned().unwrap_or_default();
            let d = (a - b) / &modulus;
            e.push(d.modulo(&pz));
        }
        let e_p: Vec<u64> = e.iter().map(|c| c.to_u64().unwrap_or(0)).collect();
        let mut e_p = e_p;
        trim(&mut e_p);
        // u = t e mod g (mod p), v = (e - u h)/g (mod p)
        let g_p: Vec<u64> = g.iter().map(|c| c.mod_u(p as u32) as u64).collect();
        let h_p: Vec<u64> = h_cur.iter().map(|c| c.mod_u(p as u32) as u64).collect();
        let t_p: Vec<u64> = t.iter().map(|c| c.mod_u(p as u32) as u64).collect();
        let s_p: Vec<u64> = s.iter().map(|c| c.mod_u(p as u32) as u64).collect();
        let u = prem(&pmul(&t_p, &e_p, p), &g_p, p);
        // v = s e + ((t e) div g) h mod h  -- equivalently (e - u h)/g; use division
        let te = pmul(&t_p, &e_p, p);
        let (quot, _) = pdivmod(&te, &g_p, p);
        let v_raw = padd(&pmul(&s_p, &e_p, p), &pmul(&quot, &h_p, p), p);
        let v = prem(&v_raw, &h_p, p);
        // g += modulus * u ; h += modulus * v
        for (i, c) in u.iter().enumerate() {
            if *c != 0 {
                if i >= g.len() {
                    g.resize(i + 1, Integer::new());
                }
                g[i] += &modulus * Integer::from(*c);
            }
        }
        for (i, c) in v.iter().enumerate() {
            if *c != 0 {
                if i >= h_cur.len() {
                    h_cur.resize(i + 1, Integer::new());
                }
                h_cur[i] += &modulus * Integer::from(*c);
            }
        }
        modulus = new_modulus;
        for c in g.iter_mut() {
            *c = c.clone().modulo(&modulus);
        }
        for c in h_cur.iter_mut() {
            *c = c.clone().modulo(&modulus);
        }
    }
    LiftedFactor { g, modulus, m_exp, g_mod_p: g0.to_vec() }
}

fn padd(a: &[u64], b: &[u64], p: u64) -> Vec<u64> {
    let n = a.len().max(b.len());
    let mut out = vec![0u64; n];
    for i in 0..n {
        out[i] = (*a.get(i).unwrap_or(&0) + *b.get(i).unwrap_or(&0)) % p;
    }
    trim(&mut out);
    out
}

fn zpoly_mul(a: &[Integer], b: &[Integer]) -> Vec<Integer> {
    let mut out = vec![Integer::new(); a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        if *x == 0 {
            continue;
        }
        for (j, y) in b.iter().enumerate() {
            out[i + j] += (x * y).complete();
        }
    }
    out
}

// ---- the context ----

/// Fixes p, the prime of K above it, and compatible primes of every
/// cyclotomic layer.
#[derive(Debug)]
pub struct PrimeContext {
    pub p: u64,
    pub field: Field,
    /// generator of the chosen prime of K above p
    pub pi: QuadElem,
    /// residue of tau modulo the chosen prime
    pub r_tau: u64,
    factors: Mutex<HashMap<u64, LiftedFactor>>,
}

const DEFAULT_M_EXP: u32 = 48;
const MAX_M_EXP: u32 = 768;

impl PrimeContext {
    /// p must be split in K and coprime to the discriminant.
    pub fn new(field: Field, p: u64) -> Result<PrimeContext> {
        let (t1, t0) = field.tau_sq();
        let pp = p as i128;
        // roots of tau's minimal polynomial T^2 - t1 T - t0 mod p
        let mut roots: Vec<u64> = (0..pp)
            .filter(|r| (r * r - t1 * r - t0).rem_euclid(pp) == 0)
            .map(|r| r as u64)
            .collect();
        roots.sort_unstable();
        if roots.len() != 2 {
            return Err(ArithError::AmbiguousPrime);
        }
        let r_tau = roots[0];
        // find a generator of (p, tau - r_tau): element of norm p with
        // a + b r_tau = 0 mod p
        let mut pi: Option<QuadElem> = None;
        'outer: for b in -(pp / 2 + 2)..=(pp / 2 + 2) {
            for a in -(pp / 2 + 2)..=(pp / 2 + 2) {
                let cand = QuadElem::new(field, a, b);
                if cand.norm() == pp && (a + b * r_tau as i128).rem_euclid(pp) == 0 {
                    pi = Some(cand.unit_canonical());
                    break 'outer;
                }
            }
        }
        let pi = pi.ok_or(ArithError::AmbiguousPrime)?;
        Ok(PrimeContext { p, field, pi, r_tau, factors: Mutex::new(HashMap::new()) })
    }

    /// Valuation of a quadratic integer at the chosen prime of K.
    pub fn val_quad(&self, x: &QuadElem) -> Valuation {
        if x.is_zero() {
            return Valuation::Infinite;
        }
        let mut v = 0i64;
        let mut cur = x.clone();
        while let Some(next) = cur.div_exact(&self.pi) {
            cur = next;
            v += 1;
        }
        Valuation::finite_i64(v)
    }

    /// Valuation of a rational number at p.
    pub fn val_rational(&self, r: &Rational) -> Valuation {
        if *r == 0 {
            return Valuation::Infinite;
        }
        let p = Integer::from(self.p);
        let mut v = 0i64;
        let mut num = r.numer().clone();
        while num.is_divisible(&p) {
            num /= &p;
            v += 1;
        }
        let mut den = r.denom().clone();
        while den.is_divisible(&p) {
            den /= &p;
            v -= 1;
        }
        Valuation::finite_i64(v)
    }

    fn ensure_factor(&self, n: u64, min_m: u32) -> Result<LiftedFactor> {
        {
            let map = self.factors.lock().unwrap();
            if let Some(f) = map.get(&n) {
                if f.m_exp >= min_m {
                    return Ok(f.clone());
                }
            }
        }
        let g0 = self.choose_factor_mod_p(n)?;
        let phi = cyclotomic_poly(n);
        let lifted = lift_factor(&phi, &g0, self.p, min_m.max(DEFAULT_M_EXP));
        self.factors.lock().unwrap().insert(n, lifted.clone());
        Ok(lifted)
    }

    /// The canonical irreducible factor of Phi_N mod p: lexicographically
    /// smallest coefficient vector among those compatible with every chosen
    /// divisor-order factor (and with the prime of K when the field's
    /// cyclotomic layer is present, i.e. zeta_4 -> r_tau for Q(i)).
    fn choose_factor_mod_p(&self, n: u64) -> Result<Vec<u64>> {
        if n % self.p == 0 {
            return Err(ArithError::AmbiguousPrime);
        }
        if n == 1 {
            return Ok(vec![(self.p - 1), 1]); // x - 1
        }
        let p = self.p;
        let phi_poly = cyclotomic_poly(n);
        let phi_p: Vec<u64> = phi_poly.iter().map(|c| c.mod_u(p as u32) as u64).collect();
        let f = multiplicative_order(p, n);
        let mut factors = equal_degree_factor(phi_p, f, p);
        factors.sort();
        // compatibility with every proper divisor's chosen factor:
        // the divisor factor must vanish at x^(n/d) mod (g, p)
        let mut divisor_factors: Vec<(u64, Vec<u64>)> = Vec::new();
        for d in 2..n {
            if n % d == 0 {
                let gd = self.ensure_factor_mod_p_only(d)?;
                divisor_factors.push((d, gd));
            }
        }
        // Q(i) linkage: zeta_4 must reduce to r_tau (covered by divisor d = 4
        // once its factor x - r_tau is chosen; base case below)
        'cand: for g in &factors {
            for (d, gd) in &divisor_factors {
                let power = n / d;
                // evaluate gd at x^power modulo (g, p)
                let xp = ppowmod(&[0, 1], Integer::from(power), g, p);
                let mut acc = vec![0u64];
                for c in gd.iter().rev() {
                    acc = prem(&pmul(&acc, &xp, p), g, p);
                    if *c != 0 {
                        acc = padd(&acc, &[*c], p);
                    }
                }
                trim(&mut acc);
                if !(acc.len() == 1 && acc[0] == 0) {
                    continue 'cand;
                }
            }
            return Ok(g.clone());
        }
        Err(ArithError::AmbiguousPrime)
    }

    fn ensure_factor_mod_p_only(&self, n: u64) -> Result<Vec<u64>> {
        {
            let map = self.factors.lock().unwrap();
            if let Some(f) = map.get(&n) {
                return Ok(f.g_mod_p.clone());
            }
        }
        // special base case: order 4 in a field with tau = i must match r_tau
        if n == 4 && self.field.disc == -4 {
            let g = vec![(self.p - self.r_tau) % self.p, 1]; // x - r_tau
            let phi = cyclotomic_poly(4);
            let lifted = lift_factor(&phi, &g, self.p, DEFAULT_M_EXP);
            self.factors.lock().unwrap().insert(4, lifted.clone());
            return Ok(g);
        }
        let g0 = self.choose_factor_mod_p(n)?;
        let phi = cyclotomic_poly(n);
        let lifted = lift_factor(&phi, &g0, self.p, DEFAULT_M_EXP);
        self.factors.lock().unwrap().insert(n, lifted.clone());
        Ok(g0)
    }

    /// ord at the chosen prime above p, normalized so ord(p) = 1 (the
    /// extension is unramified at p).  ord(0) is infinite.
    pub fn cyc_valuation(&self, x: &CycElem) -> Result<Valuation> {
        if x.is_zero() {
            return Ok(Valuation::Infinite);
        }
        if x.order % self.p == 0 {
            return Err(ArithError::AmbiguousPrime);
        }
        // clear denominators
        let mut den = Integer::from(1);
        for c in &x.coeffs {
            den = den.lcm(c.denom());
        }
        let ints: Vec<Integer> =
            x.coeffs.iter().map(|c| (c * Rational::from(&den)).numer().clone()).collect();
        let mut vden = 0i64;
        {
            let p = Integer::from(self.p);
            let mut d = den.clone();
            while d.is_divisible(&p) {
                d /= &p;
                vden += 1;
            }
        }
        let mut m_exp = DEFAULT_M_EXP;
        loop {
            let fac = self.ensure_factor(x.order, m_exp)?;
            // reduce the integer polynomial modulo (g, p^M)
            let mut r: Vec<Integer> = ints.iter().map(|c| c.clone().modulo(&fac.modulus)).collect();
            let dg = fac.g.len() - 1;
            while r.len() > dg {
                let d = r.len() - 1;
                let c = r[d].clone();
                if c != 0 {
                    for j in 0..=dg {
                        let idx = d - dg + j;
                        r[idx] -= (&c * &fac.g[j]).complete();
                        r[idx] = r[idx].clone().modulo(&fac.modulus);
                    }
                }
                r.pop();
            }
            // min p-valuation of the residue coefficients
            let p = Integer::from(self.p);
            let mut min_v: Option<i64> = None;
            for c in &r {
                if *c == 0 {
                    continue;
                }
                let mut v = 0i64;
                let mut cc = c.clone();
                while cc.is_divisible(&p) {
                    cc /= &p;
                    v += 1;
                }
                min_v = Some(match min_v {
                    None => v,
                    Some(m) => m.min(v),
                });
            }
            match min_v {
                Some(v) if (v as u32) < fac.m_exp => {
                    return Ok(Valuation::finite_i64(v - vden));
                }
                _ => {
                    // residue vanished to full precision: escalate
                    if m_exp >= MAX_M_EXP {
                        return Err(ArithError::PrecisionExhausted(m_exp));
                    }
                    self.factors.lock().unwrap().remove(&x.order);
                    m_exp *= 2;
                }
            }
        }
    }
}
