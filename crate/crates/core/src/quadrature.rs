//! Adaptive Simpson quadrature.

use crate::error::{CwError, Result};

const MAX_DEPTH: u32 = 48;
const INITIAL_PANELS: usize = 16;

struct Panel {
    a: f64,
    fa: f64,
    m: f64,
    fm: f64,
    b: f64,
    fb: f64,
    whole: f64,
}

fn panel(f: &impl Fn(f64) -> f64, a: f64, fa: f64, b: f64, fb: f64) -> Panel {
    let m = 0.5 * (a + b);
    let fm = f(m);
    Panel {
        a,
        fa,
        m,
        fm,
        b,
        fb,
        whole: (b - a) / 6.0 * (fa + 4.0 * fm + fb),
    }
}

/// Returns (integral, error left over at the depth limit).
fn refine(f: &impl Fn(f64) -> f64, p: Panel, tol: f64, depth: u32) -> (f64, f64) {
    let left = panel(f, p.a, p.fa, p.m, p.fm);
    let right = panel(f, p.m, p.fm, p.b, p.fb);
    let delta = left.whole + right.whole - p.whole;
    if delta.abs() <= 15.0 * tol || depth >= MAX_DEPTH || p.m <= p.a || p.b <= p.m {
        let unresolved = if delta.abs() <= 15.0 * tol {
            0.0
        } else {
            delta.abs() / 15.0
        };
        return (left.whole + right.whole + delta / 15.0, unresolved);
    }
    let (l, el) = refine(f, left, 0.5 * tol, depth + 1);
    let (r, er) = refine(f, right, 0.5 * tol, depth + 1);
    (l + r, el + er)
}

/// `∫_a^b f` to absolute tolerance `tol`.
///
/// The interval is first split into a few equal panels so that narrow
/// features are not missed by the initial five-point estimate.
pub fn integrate(f: impl Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> Result<f64> {
    if a == b {
        return Ok(0.0);
    }
    if !(a.is_finite() && b.is_finite()) {
        return Err(CwError::domain("integration limits must be finite"));
    }
    let (lo, hi, sign) = if a < b { (a, b, 1.0) } else { (b, a, -1.0) };
    let h = (hi - lo) / INITIAL_PANELS as f64;
    let panel_tol = tol / INITIAL_PANELS as f64;
    let mut total = 0.0;
    let mut unresolved = 0.0;
    let mut x0 = lo;
    let mut f0 = f(lo);
    for k in 1..=INITIAL_PANELS {
        let x1 = if k == INITIAL_PANELS {
            hi
        } else {
            lo + k as f64 * h
        };
        let f1 = f(x1);
        let (v, e) = refine(&f, panel(&f, x0, f0, x1, f1), panel_tol, 0);
        total += v;
        unresolved += e;
        x0 = x1;
        f0 = f1;
    }
    if !total.is_finite() {
        return Err(CwError::Quadrature {
            achieved: f64::INFINITY,
            target: tol,
        });
    }
    if unresolved > tol {
        return Err(CwError::Quadrature {
            achieved: unresolved,
            target: tol,
        });
    }
    Ok(sign * total)
}
