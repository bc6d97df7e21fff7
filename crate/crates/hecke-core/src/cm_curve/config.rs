//! Plain-text curve configuration.
//!
//! `key = value` lines with `#` comments.  Keys: `disc`, `g2`, `g3`
//! (rationals), `omega_hint` (decimal), `conductor` (as `a,b,e` meaning
//! `(a + b*tau)^e`), `q`, `p`.
//!
//! ```text
//! disc = -4
//! g2 = 4
//! g3 = 0
//! omega_hint = 2.6220575542921198
//! conductor = 1,1,3
//! q = 5
//! p = 13
//! ```

use super::ctx::CMCurveCtx;
use super::{CurveError, Result};
use crate::arith::ideal::IdealK;
use crate::arith::quad::{Field, QuadElem};
use rug::Rational;
use std::collections::HashMap;

pub fn parse_curve_config(text: &str, prec: u32) -> Result<CMCurveCtx> {
    let mut kv = HashMap::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| CurveError::BadConfig(format!("line {}: expected key = value", lineno + 1)))?;
        kv.insert(k.trim().to_string(), v.trim().to_string());
    }
    let get = |k: &str| -> Result<&String> {
        kv.get(k).ok_or_else(|| CurveError::BadConfig(format!("missing key {k}")))
    };
    let disc: i64 = get("disc")?
        .parse()
        .map_err(|_| CurveError::BadConfig("bad disc".into()))?;
    let field = Field::new(disc).map_err(|e| CurveError::BadConfig(e.to_string()))?;
    let rat = |k: &str| -> Result<Rational> {
        get(k)?
            .parse::<Rational>()
            .map_err(|_| CurveError::BadConfig(format!("bad rational for {k}")))
    };
    let g2 = rat("g2")?;
    let g3 = rat("g3")?;
    let omega_hint: f64 = get("omega_hint")?
        .parse()
        .map_err(|_| CurveError::BadConfig("bad omega_hint".into()))?;
    let cond = {
        let parts: Vec<&str> = get("conductor")?.split(',').map(|s| s.trim()).collect();
        if parts.len() != 2 && parts.len() != 3 {
            return Err(CurveError::BadConfig("conductor must be a,b or a,b,e".into()));
        }
        let a: i128 = parts[0].parse().map_err(|_| CurveError::BadConfig("bad conductor".into()))?;
        let b: i128 = parts[1].parse().map_err(|_| CurveError::BadConfig("bad conductor".into()))?;
        let e: u32 = if parts.len() == 3 {
            parts[2].parse().map_err(|_| CurveError::BadConfig("bad conductor exponent".into()))?
        } else {
            1
        };
        IdealK::new(QuadElem::new(field, a, b)).pow(e)
    };
    let q: u64 = get("q")?.parse().map_err(|_| CurveError::BadConfig("bad q".into()))?;
    let p: u64 = get("p")?.parse().map_err(|_| CurveError::BadConfig("bad p".into()))?;
    CMCurveCtx::new(field, g2, g3, cond, q, p, omega_hint, prec)
}

/// The reference configuration: the lemniscatic curve over Q(i).
pub const REFERENCE_CONFIG: &str = "\
disc = -4
g2 = 4
g3 = 0
omega_hint = 2.6220575542921198
conductor = 1,1,3
q = 5
p = 13
";
