//! Low-temperature (β > 1) machinery: the spontaneous magnetization and the
//! recentred, rescaled spins built from it.

use serde::{Deserialize, Serialize};

use super::sampler::{Restandardization, SpinMatrix};
use crate::error::{CwError, Result};

const FIXED_POINT_TOL: f64 = 1e-12;

/// Positive solution `m` of `tanh(β m) = m` for some `β > 1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Magnetization {
    beta: f64,
    m: f64,
}

impl Magnetization {
    /// The magnetization `m` together with the inverse temperature that makes
    /// it a fixed point, `β = artanh(m) / m`.
    pub fn from_value(m: f64) -> Result<Self> {
        if !(m > 0.0 && m < 1.0) {
            return Err(CwError::domain(format!(
                "magnetization must lie in (0,1), got {m}"
            )));
        }
        Ok(Self {
            beta: m.atanh() / m,
            m,
        })
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn value(&self) -> f64 {
        self.m
    }

    /// `1 − m²`, the conditional spin variance at the mode.
    pub fn variance(&self) -> f64 {
        1.0 - self.m * self.m
    }
}

/// Unique positive root of `g(m) = tanh(β m) − m`.
///
/// Newton steps safeguarded by a bisection bracket; `g > 0` on `(0, m*)` and
/// `g < 0` on `(m*, 1]`.
pub fn solve_magnetization(beta: f64) -> Result<Magnetization> {
    if !(beta.is_finite() && beta > 1.0) {
        return Err(CwError::domain(format!(
            "no positive fixed point of tanh(beta m) = m for beta = {beta} ≤ 1"
        )));
    }
    let g = |m: f64| (beta * m).tanh() - m;
    let mut hi = 1.0;
    let mut lo = 0.5;
    while g(lo) <= 0.0 {
        lo *= 0.5;
        if lo < 1e-300 {
            return Err(CwError::Numerical(format!(
                "could not bracket the magnetization for beta = {beta}"
            )));
        }
    }
    let mut m = 0.9_f64.clamp(lo, hi);
    for _ in 0..500 {
        let gm = g(m);
        if gm == 0.0 {
            break;
        }
        if gm > 0.0 {
            lo = m;
        } else {
            hi = m;
        }
        let sech2 = 1.0 - (beta * m).tanh().powi(2);
        let slope = beta * sech2 - 1.0;
        let newton = m - gm / slope;
        let next = if slope != 0.0 && newton > lo && newton < hi {
            newton
        } else {
            0.5 * (lo + hi)
        };
        if next == m || hi - lo <= 4.0 * f64::EPSILON * hi {
            break;
        }
        m = next;
    }
    let residual = g(m).abs();
    if residual > FIXED_POINT_TOL {
        return Err(CwError::Numerical(format!(
            "magnetization iteration stalled at residual {residual:.3e}"
        )));
    }
    Ok(Magnetization { beta, m })
}

fn sign_of(value: f64) -> i8 {
    if value > 0.0 {
        1
    } else if value < 0.0 {
        -1
    } else {
        0
    }
}

/// `Z = (Y − m σ) / √(1 − m²)` entrywise, with `σ` the sign of the mixing
/// draw, or of the spin sum when the matrix came from a Metropolis chain.
/// `σ = 0` when that quantity is exactly zero.
pub fn restandardize(x: &SpinMatrix, m: &Magnetization) -> Result<SpinMatrix> {
    if x.is_restandardized() {
        return Err(CwError::input("matrix is already restandardized"));
    }
    let mv = m.value();
    if !(mv > 0.0 && mv < 1.0) {
        return Err(CwError::domain(format!(
            "magnetization must lie in (0,1), got {mv}"
        )));
    }
    let sign = match x.mixing_draw() {
        Some(t) => sign_of(t),
        None => sign_of(x.spin_sum()),
    };
    Ok(apply_restandardization(
        x,
        Restandardization { m: mv, sign },
    ))
}

pub(crate) fn apply_restandardization(x: &SpinMatrix, r: Restandardization) -> SpinMatrix {
    let shift = r.m * r.sign as f64;
    let scale = (1.0 - r.m * r.m).sqrt();
    let entries = x.entries().iter().map(|&y| (y - shift) / scale).collect();
    x.with_entries(entries, Some(r))
}

/// Inverse of [`restandardize`].
pub fn unrestandardize(z: &SpinMatrix) -> Result<SpinMatrix> {
    let Some(r) = z.restandardization() else {
        return Err(CwError::input("matrix is not restandardized"));
    };
    let shift = r.m * r.sign as f64;
    let scale = (1.0 - r.m * r.m).sqrt();
    let entries = z.entries().iter().map(|&v| v * scale + shift).collect();
    Ok(z.with_entries(entries, None))
}

fn check_conditional_args(t: f64, m: f64) -> Result<()> {
    if !(t > -1.0 && t < 1.0) || t == 0.0 {
        return Err(CwError::domain(format!(
            "t must lie in (-1,1) \\ {{0}}, got {t}"
        )));
    }
    if !(m > 0.0 && m < 1.0) {
        return Err(CwError::domain(format!("m must lie in (0,1), got {m}")));
    }
    Ok(())
}

/// `E(Z | M = t) = (t − m·sign t) / √(1 − m²)`.
pub fn zeta(t: f64, m: f64) -> Result<f64> {
    check_conditional_args(t, m)?;
    let centre = if t > 0.0 { m } else { -m };
    Ok((t - centre) / (1.0 - m * m).sqrt())
}

/// `E(1 − Z² | M = t) = 2m·sign(t)·(t − m·sign t) / (1 − m²)`.
pub fn psi(t: f64, m: f64) -> Result<f64> {
    check_conditional_args(t, m)?;
    let (sign, centre) = if t > 0.0 { (1.0, m) } else { (-1.0, -m) };
    Ok(sign * 2.0 * m * (t - centre) / (1.0 - m * m))
}
