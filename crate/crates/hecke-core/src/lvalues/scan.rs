//! The scan over finite twists: for every admissible kappa at the requested
//! levels, the pi-adic valuation of the primitive algebraic L-value is
//! computed along one or both routes.
//!
//! The direct route recognizes the descaled Eisenstein value exactly.  The
//! gamma route reduces the theta sum at the pinned prime and evaluates the
//! twisted character sum over reduced torsion: a nonzero sum certifies the
//! valuation through the interpolation identity, a zero sum only bounds it
//! and the row stays unresolved rather than guessing.  Rows are produced in
//! a canonical order (levels, then twist exponents), so the serialized
//! tables are byte-for-byte reproducible.

use super::charspec::{kappa_list, HeckeCharSpec};
use super::eisen::partials_via_eisenstein;
use super::value::{alg_from_partials, euler_valuation_sum, factor_valuation};
use super::{LvalError, Result};
use crate::arith::ball::ComplexBall;
use crate::arith::ideal::IdealK;
use crate::arith::prime::{PrimeContext, Valuation};
use crate::arith::quad::QuadElem;
use crate::cm_curve::{CMCurveCtx, FqCtx, FqElem, FqPoint, ReducedCurve};
use crate::efm::{combo_point, reduce_ratfn, theta_psi_build, ReducedRatFn, ThetaPsiSpec};
use crate::measures::{inv_mod, RootOfUnity};
use rayon::prelude::*;
use rug::Rational;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RouteSel {
    Direct,
    Gamma,
    Both,
}

impl RouteSel {
    fn direct(&self) -> bool {
        matches!(self, RouteSel::Direct | RouteSel::Both)
    }

    fn gamma(&self) -> bool {
        matches!(self, RouteSel::Gamma | RouteSel::Both)
    }
}

#[derive(Debug, Clone)]
pub struct ScanConfig {
    pub k: u32,
    pub j: i32,
    pub levels: Vec<(u32, u32)>,
    pub prec: u32,
    pub route: RouteSel,
    /// Re-chooses the auxiliary torsion point of the reduced route (the
    /// base point is scaled by 1 + delta_variant); the verdicts must not
    /// depend on it.
    pub delta_variant: u32,
    pub den_bound: i64,
}

#[derive(Debug, Clone)]
pub struct ScanRow {
    pub level: (u32, u32),
    pub kappa_index: (u64, u64),
    pub route: &'static str,
    /// Valuation of the primitive algebraic L-value, when settled.
    pub ord: Option<Rational>,
    pub status: String,
    /// (re, im, radius) of the algebraic value enclosure, direct route only.
    pub ball: Option<(f64, f64, f64)>,
}

#[derive(Debug, Clone)]
pub struct ScanTable {
    pub rows: Vec<ScanRow>,
    /// Modal valuation over the settled rows.
    pub c_observed: Option<Rational>,
    /// Indices of settled rows deviating from the mode.
    pub exceptions: Vec<usize>,
}

fn factorial(n: u32) -> Rational {
    let mut r = Rational::from(1);
    for i in 2..=n {
        r *= i;
    }
    r
}

/// Reduced theta data shared by every row of one level.
struct GammaCtx {
    rr: ReducedRatFn,
    iota: FqElem,
    aux: IdealK,
    /// Reduced theta values at [gamma_c] point, one per class, computed once
    /// per level since they do not depend on the twist.
    values: Vec<((u64, u64), FqElem)>,
    /// A root of unity of maximal odd order, powers of which embed the odd
    /// part of every twist value.
    zeta_odd: FqElem,
    odd_max: u64,
}

fn gamma_ctx(
    ctx: &CMCurveCtx,
    pctx: &PrimeContext,
    spec0: &HeckeCharSpec,
    delta_variant: u32,
    den_bound: i64,
) -> Result<GammaCtx> {
    let tspec = ThetaPsiSpec::reference(ctx, spec0.k, 0)?;
    let aux = tspec.a.clone();
    let theta = theta_psi_build(ctx, &tspec)?;
    let level = spec0.level;
    let torsion_level = level.0.max(level.1) + 1;
    let rr = reduce_ratfn(ctx, &theta, pctx, torsion_level, 64, den_bound)?;
    let iota = rr.red.fq.from_u64(pctx.r_tau % pctx.p);
    let group_order = rr
        .red
        .frob
        .pow(rr.red.r)
        .sub(&ctx.field.one())
        .norm()
        .unsigned_abs();
    // base point with annihilator exactly nu^(m+1) nubar^(n+1): both
    // eigencomponents primitive, so every twist at this level sees it
    let drop_nu = spec0
        .nu
        .pow(level.0)
        .mul(&spec0.nu.conj().pow(level.1 + 1));
    let drop_nubar = spec0
        .nu
        .pow(level.0 + 1)
        .mul(&spec0.nu.conj().pow(level.1));
    let mut base = None;
    'search: for u in 0..rr.red.qn {
        for v in 0..rr.red.qn {
            if u == 0 && v == 0 {
                continue;
            }
            let cand = combo_point(&rr.red, u, v);
            if act(&rr.red, &iota, group_order, &drop_nu, &cand).is_some()
                && act(&rr.red, &iota, group_order, &drop_nubar, &cand).is_some()
            {
                base = Some(cand);
                break 'search;
            }
        }
    }
    let base =
        base.ok_or_else(|| LvalError::Invalid("no torsion point with full annihilator".into()))?;
    let point = rr.red.scalar_mul(1 + delta_variant as u128, &base);
    let mut values = Vec::new();
    for c in spec0.classes() {
        let gamma = spec0.class_generator(c)?;
        let pt = act(&rr.red, &iota, group_order, &gamma, &point);
        let v = rr.eval(&pt)?;
        values.push((c, v));
    }
    let mut odd_max = spec0.q.pow(level.0.max(level.1)) * (spec0.q - 1);
    while odd_max % 2 == 0 {
        odd_max /= 2;
    }
    let zeta_odd = zeta_of_order(&rr.red.fq, odd_max)?;
    Ok(GammaCtx { rr, iota, aux, values, zeta_odd, odd_max })
}

/// The endomorphism action of a + b tau on a reduced point.
fn act(
    red: &ReducedCurve,
    iota: &FqElem,
    group_order: u128,
    g: &QuadElem,
    p: &FqPoint,
) -> FqPoint {
    let go = group_order as i128;
    let pa = red.scalar_mul(g.a.rem_euclid(go) as u128, p);
    let ip: FqPoint = p.as_ref().map(|(x, y)| (red.fq.neg(x), red.fq.mul(iota, y)));
    let pb = red.scalar_mul(g.b.rem_euclid(go) as u128, &ip);
    red.add(&pa, &pb)
}

fn small_prime_factors(mut n: u64) -> Vec<u64> {
    let mut out = Vec::new();
    let mut d = 2u64;
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

/// An element of exact multiplicative order n, by a deterministic search.
fn zeta_of_order(fq: &FqCtx, n: u64) -> Result<FqElem> {
    if n == 1 {
        return Ok(fq.one());
    }
    let m = fq.order() - 1;
    if m % n as u128 != 0 {
        return Err(LvalError::Invalid("field has no roots of unity of this order".into()));
    }
    let primes = small_prime_factors(n);
    for idx in 2..fq.order() {
        let z = fq.pow(&fq.from_index(idx), m / n as u128);
        if primes.iter().all(|d| fq.pow(&z, (n / d) as u128) != fq.one()) {
            return Ok(z);
        }
    }
    Err(LvalError::Invalid("no generator found".into()))
}

/// Embed a root of unity: the 2-power part is pinned to iota (the square
/// root of -1 already used for the theta coefficients), the odd part goes
/// to a fixed element of matching order.  The scan verdicts are invariant
/// under the residual freedom in the odd part.
fn root_to_fq(
    fq: &FqCtx,
    iota: &FqElem,
    zeta_odd: &FqElem,
    odd_max: u64,
    r: &RootOfUnity,
) -> Result<FqElem> {
    let mut n2 = 1u64;
    let mut nodd = r.order;
    while nodd % 2 == 0 {
        n2 *= 2;
        nodd /= 2;
    }
    if n2 > 4 || odd_max % nodd != 0 {
        return Err(LvalError::Invalid("twist order not embeddable at this level".into()));
    }
    let e = r.exp % r.order;
    let mut out = fq.one();
    if n2 > 1 {
        let e2 = (e % n2) * inv_mod(nodd % n2, n2).ok_or(LvalError::OrbitIncomplete)? % n2;
        out = fq.mul(&out, &fq.pow(iota, ((4 / n2) * e2) as u128));
    }
    if nodd > 1 {
        let eo =
            (e % nodd) * inv_mod(n2 % nodd, nodd).ok_or(LvalError::OrbitIncomplete)? % nodd;
        let z = fq.pow(zeta_odd, (odd_max / nodd) as u128);
        out = fq.mul(&out, &fq.pow(&z, eo as u128));
    }
    Ok(out)
}

/// One gamma-route row: the reduced twisted character sum and, when it is
/// nonzero, the valuation it certifies.
fn gamma_row(
    spec: &HeckeCharSpec,
    gc: &GammaCtx,
    pctx: &PrimeContext,
) -> Result<(Option<Rational>, String)> {
    let fq = &gc.rr.red.fq;
    let mut s = fq.zero();
    for (c, v) in &gc.values {
        let u = spec.upsilon(*c)?.inv();
        s = fq.add(&s, &fq.mul(&root_to_fq(fq, &gc.iota, &gc.zeta_odd, gc.odd_max, &u)?, v));
    }
    if fq.is_zero(&s) {
        return Ok((None, "unresolved".into()));
    }
    // the sum equals (k-1)! f(aux) L^alg times roots of unity, and has
    // valuation exactly zero here
    let (_, fval) = factor_valuation(spec, &gc.aux, pctx)?;
    let fval = match fval {
        Valuation::Infinite => return Ok((None, "factor-vanishes".into())),
        Valuation::Finite(v) => v,
    };
    let kfact = match pctx.val_rational(&factorial(spec.k - 1)) {
        Valuation::Infinite => unreachable!("factorial is nonzero"),
        Valuation::Finite(v) => v,
    };
    let euler = match euler_valuation_sum(spec, pctx)? {
        Valuation::Infinite => return Ok((None, "euler-vanishes".into())),
        Valuation::Finite(v) => v,
    };
    Ok((Some(-kfact - fval - euler), "ok".into()))
}

fn direct_row(
    ctx: &CMCurveCtx,
    spec: &HeckeCharSpec,
    partials: &[((u64, u64), ComplexBall)],
    pctx: &PrimeContext,
    den_bound: i64,
) -> Result<(Option<Rational>, String, Option<(f64, f64, f64)>)> {
    let v = match alg_from_partials(ctx, spec, partials, pctx, den_bound) {
        Ok(v) => v,
        Err(LvalError::NormNotRecognized) => return Ok((None, "unrecognized".into(), None)),
        Err(e) => return Err(e),
    };
    let meta = {
        let (re, im) = v.ball.to_f64s();
        Some((re, im, v.ball.rad_f64()))
    };
    let imprim = match v.val_p {
        Valuation::Infinite => return Ok((None, "zero".into(), meta)),
        Valuation::Finite(x) => x,
    };
    let euler = match euler_valuation_sum(spec, pctx)? {
        Valuation::Infinite => return Ok((None, "euler-vanishes".into(), meta)),
        Valuation::Finite(x) => x,
    };
    Ok((Some(imprim - euler), "ok".into(), meta))
}

/// Run the scan.  Rows across one level are independent and processed in
/// parallel; the output order is canonical regardless of scheduling.
pub fn theorem_scan(
    ctx: &CMCurveCtx,
    pctx: &PrimeContext,
    config: &ScanConfig,
) -> Result<ScanTable> {
    let mut rows: Vec<ScanRow> = Vec::new();
    for &level in &config.levels {
        let kappas = kappa_list(ctx, level)?;
        let spec0 =
            HeckeCharSpec::new(ctx, config.k, config.j, level, kappas[0].1.clone(), config.prec)?;
        let partials = if config.route.direct() {
            Some(partials_via_eisenstein(ctx, &spec0)?)
        } else {
            None
        };
        let gc = if config.route.gamma() && config.j == 0 {
            Some(gamma_ctx(ctx, pctx, &spec0, config.delta_variant, config.den_bound)?)
        } else {
            None
        };
        let level_rows: Vec<Vec<ScanRow>> = kappas
            .par_iter()
            .map(|(idx, kappa)| -> Result<Vec<ScanRow>> {
                let spec = HeckeCharSpec::new(
                    ctx,
                    config.k,
                    config.j,
                    level,
                    kappa.clone(),
                    config.prec,
                )?;
                let mut out = Vec::new();
                if let Some(p) = &partials {
                    let (ord, status, ball) =
                        direct_row(ctx, &spec, p, pctx, config.den_bound)?;
                    out.push(ScanRow {
                        level,
                        kappa_index: *idx,
                        route: "direct",
                        ord,
                        status,
                        ball,
                    });
                }
                if config.route.gamma() {
                    let (ord, status) = match &gc {
                        Some(g) => gamma_row(&spec, g, pctx)?,
                        None => (None, "unavailable".into()),
                    };
                    out.push(ScanRow {
                        level,
                        kappa_index: *idx,
                        route: "gamma",
                        ord,
                        status,
                        ball: None,
                    });
                }
                Ok(out)
            })
            .collect::<Result<Vec<_>>>()?;
        rows.extend(level_rows.into_iter().flatten());
    }
    let mut counts: Vec<(Rational, usize)> = Vec::new();
    for r in rows.iter().filter_map(|r| r.ord.as_ref()) {
        match counts.iter_mut().find(|(v, _)| v == r) {
            Some((_, n)) => *n += 1,
            None => counts.push((r.clone(), 1)),
        }
    }
    let c_observed = counts.iter().max_by_key(|(_, n)| *n).map(|(v, _)| v.clone());
    let exceptions = match &c_observed {
        None => Vec::new(),
        Some(m) => rows
            .iter()
            .enumerate()
            .filter(|(_, r)| r.ord.as_ref().is_some_and(|o| o != m))
            .map(|(i, _)| i)
            .collect(),
    };
    Ok(ScanTable { rows, c_observed, exceptions })
}

/// CSV serialization, one line per row, stable column order.
pub fn table_csv(table: &ScanTable) -> String {
    let mut out = String::from("m,n,kappa_index_1,kappa_index_2,route,ord_p_num,ord_p_den,status\n");
    for r in &table.rows {
        let (num, den) = match &r.ord {
            Some(o) => (o.numer().to_string(), o.denom().to_string()),
            None => (String::new(), String::new()),
        };
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{}\n",
            r.level.0, r.level.1, r.kappa_index.0, r.kappa_index.1, r.route, num, den, r.status
        ));
    }
    out
}

/// JSON mirror of the CSV with the enclosure metadata attached.
pub fn table_json(table: &ScanTable) -> String {
    let rows: Vec<serde_json::Value> = table
        .rows
        .iter()
        .map(|r| {
            serde_json::json!({
                "m": r.level.0,
                "n": r.level.1,
                "kappa_index": [r.kappa_index.0, r.kappa_index.1],
                "route": r.route,
                "ord_p": r.ord.as_ref().map(|o| [o.numer().to_string(), o.denom().to_string()]),
                "status": r.status,
                "ball": r.ball.map(|(re, im, rad)| serde_json::json!({
                    "re": re, "im": im, "radius": rad,
                })),
            })
        })
        .collect();
    let doc = serde_json::json!({
        "rows": rows,
        "c_observed": table.c_observed.as_ref().map(|o| [o.numer().to_string(), o.denom().to_string()]),
        "exceptions": table.exceptions,
    });
    serde_json::to_string_pretty(&doc).expect("serialization cannot fail")
}
