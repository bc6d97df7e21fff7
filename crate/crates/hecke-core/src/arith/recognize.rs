//! Recognition of numerically computed values as exact cyclotomic numbers.
//!
//! Recognition is heuristic; verification by re-embedding the candidate and
//! checking overlap with the input ball is part of every success path, so a
//! returned value is always consistent with the certified enclosure.

use super::ball::ComplexBall;
use super::cyc::{euler_phi, CycElem};
use super::{ArithError, Result};
use rug::{Complete, Integer, Rational};

/// Best rational approximation with denominator at most `den_bound`, by
/// continued fractions on the exact midpoint.
pub fn best_rational(x: &Rational, den_bound: &Integer) -> Rational {
    let mut a = x.numer().clone();
    let mut b = x.denom().clone();
    // convergent recurrences with (p,q)_{-2} = (0,1), (p,q)_{-1} = (1,0)
    let (mut p2, mut q2) = (Integer::from(0), Integer::from(1));
    let (mut p1, mut q1) = (Integer::from(1), Integer::from(0));
    while b != 0 {
        let (quot, rem) = a.div_rem_floor(b.clone());
        let np = (&quot * &p1).complete() + &p2;
        let nq = (&quot * &q1).complete() + &q2;
        if nq > *den_bound && q1 != 0 {
            break;
        }
        p2 = std::mem::replace(&mut p1, np);
        q2 = std::mem::replace(&mut q1, nq);
        a = b;
        b = rem;
    }
    if q1 == 0 {
        return Rational::new();
    }
    Rational::from((p1, q1))
}

fn mid_to_rational(f: &rug::Float) -> Rational {
    f.to_rational().unwrap_or_default()
}

/// Recognize a real rational value inside the ball.
pub fn recognize_rational(z: &ComplexBall, den_bound: i64) -> Result<Rational> {
    let bound = Integer::from(den_bound);
    let re = mid_to_rational(z.mid.real());
    let cand = best_rational(&re, &bound);
    let back = ComplexBall::from_rationals(&cand, &Rational::new(), z.prec());
    if back.overlaps(z) {
        Ok(cand)
    } else {
        Err(ArithError::RecognitionFailed)
    }
}

/// Recognize the ball as an element of Q(zeta_N) with denominator at most
/// `den_bound`.  Strategies, in order: rational; rational multiple of a root
/// of unity; a short coefficient vector search in low-degree cases.
pub fn recognize_cyclotomic(z: &ComplexBall, n: u64, den_bound: i64) -> Result<CycElem> {
    // 1. rational
    if let Ok(r) = recognize_rational(z, den_bound) {
        return Ok(CycElem::from_rational(n, r));
    }
    // 2. c * zeta_N^k
    let prec = z.prec();
    for k in 0..n {
        let zeta = CycElem::zeta_pow(n, k as i64);
        let w = zeta.embed(prec);
        let quot = z.div(&w);
        if let Ok(c) = recognize_rational(&quot, den_bound) {
            let cand = zeta.mul_rational(&c);
            if cand.embed(prec).overlaps(z) {
                return Ok(cand);
            }
        }
    }
    // 3. low-degree search: peel off the top coefficients over a small
    // integer grid, then the remaining pair (c0, c1) is a two-real-unknown
    // linear solve against Re/Im
    let phi = euler_phi(n) as usize;
    if (2..=4).contains(&phi) {
        let bound = Integer::from(den_bound);
        let zeta1 = CycElem::zeta_pow(n, 1).embed(prec);
        let grid: i64 = 8;
        let tail = phi - 2; // number of enumerated coefficients c2..c_{phi-1}
        let span = 2 * grid + 1;
        let total = span.pow(tail as u32);
        for counter in 0..total {
            let mut idx = vec![0i64; tail];
            let mut c = counter;
            for slot in idx.iter_mut() {
                *slot = c % span - grid;
                c /= span;
            }
            // w = z - sum_{i>=2} c_i zeta^i
            let mut w = z.clone();
            for (t, c) in idx.iter().enumerate() {
                if *c != 0 {
                    let term = CycElem::zeta_pow(n, (t + 2) as i64).embed(prec).scale_i64(*c);
                    w = w.sub(&term);
                }
            }
            let c1b = w.im().div(&zeta1.im());
            let c1 = best_rational(&mid_to_rational(&c1b.mid), &bound);
            let c0b = w.re().sub(&c1b.mul(&zeta1.re()));
            let c0 = best_rational(&mid_to_rational(&c0b.mid), &bound);
            let mut cand = CycElem::zero(n);
            cand.coeffs[0] = c0;
            cand.coeffs[1] = c1;
            for (t, c) in idx.iter().enumerate() {
                cand.coeffs[t + 2] = Rational::from(*c);
            }
            if cand.embed(prec).overlaps(z) {
                return Ok(cand);
            }
        }
    }
    Err(ArithError::RecognitionFailed)
}

/// Recognize from a full orbit of embeddings: `orbit` pairs each Galois
/// exponent t (coprime to N) with a ball enclosing the image of the sought
/// element under zeta -> zeta^t.  With phi(N) independent embeddings the
/// coefficient vector is determined by a linear solve; the rationalized
/// candidate is verified against every provided ball.
pub fn recognize_cyclotomic_orbit(
    orbit: &[(u64, ComplexBall)],
    n: u64,
    den_bound: i64,
) -> Result<CycElem> {
    let phi = euler_phi(n) as usize;
    if orbit.len() < phi {
        return Err(ArithError::RecognitionFailed);
    }
    let prec = orbit[0].1.prec();
    // Build the linear system sum_i c_i zeta^(i t_r) = z_r over the first
    // phi(N) rows; coefficients real, so use real and imaginary parts as
    // separate equations and solve the least-degenerate square subsystem by
    // plain complex Gaussian elimination (c_i real rationals solve it too).
    let rows = phi;
    let mut mat: Vec<Vec<ComplexBall>> = Vec::with_capacity(rows);
    let mut rhs: Vec<ComplexBall> = Vec::with_capacity(rows);
    for (t, z) in orbit.iter().take(rows) {
        let mut row = Vec::with_capacity(phi);
        for i in 0..phi {
            let e = ((i as u64) * t % n) as i64;
            row.push(CycElem::zeta_pow(n, e).embed(prec));
        }
        mat.push(row);
        rhs.push(z.clone());
    }
    solve_ball(&mut mat, &mut rhs)?;
    let bound = Integer::from(den_bound);
    let mut cand = CycElem::zero(n);
    for i in 0..phi {
        cand.coeffs[i] = best_rational(&mid_to_rational(rhs[i].mid.real()), &bound);
    }
    // mandatory verification against every ball in the orbit
    for (t, z) in orbit {
        let img = cand.galois(*t);
        if !img.embed(prec).overlaps(z) {
            return Err(ArithError::RecognitionFailed);
        }
    }
    Ok(cand)
}

fn solve_ball(mat: &mut Vec<Vec<ComplexBall>>, rhs: &mut Vec<ComplexBall>) -> Result<()> {
    let nn = rhs.len();
    for col in 0..nn {
        // pivot: largest midpoint modulus
        let mut best = col;
        let mut best_mag = -1.0f64;
        for r in col..nn {
            let m = mat[r][col].abs().to_f64();
            if m > best_mag {
                best_mag = m;
                best = r;
            }
        }
        if best_mag <= 0.0 {
            return Err(ArithError::RecognitionFailed);
        }
        mat.swap(col, best);
        rhs.swap(col, best);
        let pivot = mat[col][col].clone();
        for j in col..nn {
            mat[col][j] = mat[col][j].div(&pivot);
        }
        rhs[col] = rhs[col].div(&pivot);
        for r in 0..nn {
            if r != col && !mat[r][col].contains_zero() {
                let f = mat[r][col].clone();
                for j in col..nn {
                    let t = f.mul(&mat[col][j]);
                    mat[r][j] = mat[r][j].sub(&t);
                }
                let t = f.mul(&rhs[col]);
                rhs[r] = rhs[r].sub(&t);
            }
        }
    }
    Ok(())
}
