//! Marchenko–Pastur and semicircle limit laws.
//!
//! Stieltjes transforms use `S(z) = ∫ (x − z)⁻¹ dμ(x)` for `Im z > 0`, with
//! the complex square root taken on the branch with nonnegative imaginary
//! part (see [`complex_sqrt_upper`]).

use std::f64::consts::PI;
use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{CwError, Result};
use crate::quadrature::integrate;

/// Absolute tolerance for CDF and moment quadratures.
pub const QUAD_TOL: f64 = 1e-12;

/// Shared interface for step and continuous distribution functions.
pub trait CumulativeDistribution {
    /// `P(X ≤ x)`.
    fn cdf(&self, x: f64) -> f64;
    /// `P(X < x)`.
    fn cdf_left(&self, x: f64) -> f64;
    /// Points carrying positive mass.
    fn jump_points(&self) -> Vec<f64>;
}

/// A limit law for empirical spectral distributions.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum SpectralLaw {
    /// Standard Marchenko–Pastur law with ratio `y = p/n`.
    MarchenkoPastur { ratio: f64 },
    /// Semicircle law on `[−2, 2]`.
    Semicircle,
}

impl fmt::Display for SpectralLaw {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SpectralLaw::MarchenkoPastur { ratio } => write!(f, "mp(y={ratio})"),
            SpectralLaw::Semicircle => f.write_str("semicircle"),
        }
    }
}

fn check_ratio(y: f64) -> Result<()> {
    if y > 0.0 && y.is_finite() {
        Ok(())
    } else {
        Err(CwError::domain(format!(
            "ratio must be positive and finite, got {y}"
        )))
    }
}

fn check_upper(z: Complex64) -> Result<()> {
    if z.im > 0.0 && z.re.is_finite() && z.im.is_finite() {
        Ok(())
    } else {
        Err(CwError::domain(format!(
            "Stieltjes transforms need Im z > 0, got {}{:+}i",
            z.re, z.im
        )))
    }
}

impl SpectralLaw {
    pub fn marchenko_pastur(ratio: f64) -> Result<Self> {
        check_ratio(ratio)?;
        Ok(SpectralLaw::MarchenkoPastur { ratio })
    }

    /// Closed support of the absolutely continuous part.
    pub fn support(&self) -> (f64, f64) {
        match *self {
            SpectralLaw::MarchenkoPastur { ratio } => mp_support(ratio),
            SpectralLaw::Semicircle => (-2.0, 2.0),
        }
    }

    /// Mass of the atom at zero.
    pub fn atom_mass(&self) -> f64 {
        match *self {
            SpectralLaw::MarchenkoPastur { ratio } => mp_atom_mass(ratio),
            SpectralLaw::Semicircle => 0.0,
        }
    }

    pub fn density(&self, x: f64) -> f64 {
        match *self {
            SpectralLaw::MarchenkoPastur { ratio } => mp_density(ratio, x),
            SpectralLaw::Semicircle => semicircle_density(x),
        }
    }

    pub fn stieltjes(&self, z: Complex64) -> Result<Complex64> {
        match *self {
            SpectralLaw::MarchenkoPastur { ratio } => mp_stieltjes(ratio, z),
            SpectralLaw::Semicircle => semicircle_stieltjes(z),
        }
    }

    /// CDF with quadrature errors surfaced.
    pub fn try_cdf(&self, x: f64) -> Result<f64> {
        match *self {
            SpectralLaw::MarchenkoPastur { ratio } => mp_cdf(ratio, x),
            SpectralLaw::Semicircle => Ok(semicircle_cdf(x)),
        }
    }

    /// Density samples `(x, f(x))` on `points` equispaced nodes of `[lo, hi]`.
    pub fn density_curve(&self, lo: f64, hi: f64, points: usize) -> Vec<(f64, f64)> {
        match points {
            0 => Vec::new(),
            1 => vec![(lo, self.density(lo))],
            _ => (0..points)
                .map(|k| {
                    let x = lo + (hi - lo) * k as f64 / (points - 1) as f64;
                    (x, self.density(x))
                })
                .collect(),
        }
    }
}

impl CumulativeDistribution for SpectralLaw {
    fn cdf(&self, x: f64) -> f64 {
        // The MP integrand is smooth after the edge substitution, so the
        // quadrature cannot fail at QUAD_TOL; fall back to NaN regardless.
        self.try_cdf(x).unwrap_or(f64::NAN)
    }

    fn cdf_left(&self, x: f64) -> f64 {
        let f = self.cdf(x);
        if x == 0.0 {
            f - self.atom_mass()
        } else {
            f
        }
    }

    fn jump_points(&self) -> Vec<f64> {
        if self.atom_mass() > 0.0 {
            vec![0.0]
        } else {
            Vec::new()
        }
    }
}

/// Square root on the branch with `Im ≥ 0`; nonnegative reals map to the
/// nonnegative real root.
pub fn complex_sqrt_upper(z: Complex64) -> Complex64 {
    if z.im == 0.0 {
        return if z.re >= 0.0 {
            Complex64::new(z.re.sqrt(), 0.0)
        } else {
            Complex64::new(0.0, (-z.re).sqrt())
        };
    }
    let t = ((z.norm() + z.re.abs()) / 2.0).sqrt();
    let root = if z.re >= 0.0 {
        Complex64::new(t, z.im / (2.0 * t))
    } else {
        Complex64::new(z.im.abs() / (2.0 * t), t.copysign(z.im))
    };
    if root.im < 0.0 {
        -root
    } else {
        root
    }
}

pub fn mp_support(y: f64) -> (f64, f64) {
    let r = y.sqrt();
    ((1.0 - r).powi(2), (1.0 + r).powi(2))
}

/// `max(0, 1 − 1/y)`.
pub fn mp_atom_mass(y: f64) -> f64 {
    if y > 1.0 {
        1.0 - 1.0 / y
    } else {
        0.0
    }
}

/// Density of the absolutely continuous part; zero outside the open support.
pub fn mp_density(y: f64, x: f64) -> f64 {
    let (a, b) = mp_support(y);
    if !(x > a && x < b) || x <= 0.0 {
        return 0.0;
    }
    ((b - x) * (x - a)).sqrt() / (2.0 * PI * x * y)
}

/// `∫_a^{min(x,b)} h(s) f(s) ds` where `f` has square-root edges at `a`, `b`.
///
/// Each half of the support is mapped by `s = a + u²` resp. `s = b − v²`,
/// which removes the square-root singularity of the derivative.
fn edge_integral<F>(weighted: F, a: f64, b: f64, x: f64, tol: f64) -> Result<f64>
where
    F: Fn(f64) -> f64,
{
    if x <= a {
        return Ok(0.0);
    }
    let x = x.min(b);
    let c = 0.5 * (a + b);
    let left = |u: f64| weighted(a + u * u) * 2.0 * u;
    let right = |v: f64| weighted(b - v * v) * 2.0 * v;
    if x <= c {
        return integrate(left, 0.0, (x - a).sqrt(), tol);
    }
    let lhs = integrate(left, 0.0, (c - a).sqrt(), tol / 2.0)?;
    let rhs = integrate(right, (b - x).sqrt(), (b - c).sqrt(), tol / 2.0)?;
    Ok(lhs + rhs)
}

/// MP CDF: quadrature of the density plus the atom at zero for `y > 1`.
pub fn mp_cdf(y: f64, x: f64) -> Result<f64> {
    check_ratio(y)?;
    let atom = if x >= 0.0 { mp_atom_mass(y) } else { 0.0 };
    let (a, b) = mp_support(y);
    if x >= b {
        return Ok(1.0);
    }
    let cont = edge_integral(|s| mp_density(y, s), a, b, x, QUAD_TOL)?;
    Ok((atom + cont).clamp(0.0, 1.0))
}

/// `k`-th moment by quadrature; the atom at zero only contributes to `k = 0`.
pub fn mp_moment(y: f64, k: u32) -> Result<f64> {
    check_ratio(y)?;
    let (a, b) = mp_support(y);
    let cont = edge_integral(
        |s| s.powi(k as i32) * mp_density(y, s),
        a,
        b,
        b,
        QUAD_TOL * b.powi(k as i32).max(1.0),
    )?;
    let atom = if k == 0 { mp_atom_mass(y) } else { 0.0 };
    Ok(cont + atom)
}

/// Narayana-polynomial closed form `Σ_{r<k} yʳ/(r+1)·C(k,r)·C(k−1,r)`.
pub fn mp_moment_closed_form(y: f64, k: u32) -> f64 {
    if k == 0 {
        return 1.0;
    }
    let binom = |n: u32, r: u32| -> f64 {
        (0..r).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
    };
    (0..k)
        .map(|r| y.powi(r as i32) / (r + 1) as f64 * binom(k, r) * binom(k - 1, r))
        .sum()
}

/// `(1 − y − z + √((1 − y − z)² − 4yz)) / (2yz)`.
pub fn mp_stieltjes(y: f64, z: Complex64) -> Result<Complex64> {
    check_ratio(y)?;
    check_upper(z)?;
    let w = 1.0 - y - z;
    Ok((w + complex_sqrt_upper(w * w - 4.0 * y * z)) / (2.0 * y * z))
}

/// `y·z·S² − (1 − y − z)·S + 1`.
pub fn mp_self_consistent_residual(y: f64, z: Complex64, s: Complex64) -> Complex64 {
    y * z * s * s - (1.0 - y - z) * s + 1.0
}

pub fn semicircle_density(x: f64) -> f64 {
    if x.abs() >= 2.0 {
        0.0
    } else {
        (4.0 - x * x).sqrt() / (2.0 * PI)
    }
}

/// `1/2 + x√(4 − x²)/(4π) + arcsin(x/2)/π` on `[−2, 2]`.
pub fn semicircle_cdf(x: f64) -> f64 {
    if x <= -2.0 {
        0.0
    } else if x >= 2.0 {
        1.0
    } else {
        0.5 + x * (4.0 - x * x).sqrt() / (4.0 * PI) + (x / 2.0).asin() / PI
    }
}

/// `(−z + √(z² − 4)) / 2`.
pub fn semicircle_stieltjes(z: Complex64) -> Result<Complex64> {
    check_upper(z)?;
    Ok((-z + complex_sqrt_upper(z * z - 4.0)) / 2.0)
}

/// `s² + z·s + 1`.
pub fn semicircle_self_consistent_residual(z: Complex64, s: Complex64) -> Complex64 {
    s * s + z * s + 1.0
}

/// `∫ (x − z)⁻¹ dμ(x)` by direct quadrature of the density.
pub fn stieltjes_by_quadrature(law: &SpectralLaw, z: Complex64, tol: f64) -> Result<Complex64> {
    check_upper(z)?;
    let (a, b) = law.support();
    let re = edge_integral(|x| law.density(x) * (1.0 / (x - z)).re, a, b, b, tol)?;
    let im = edge_integral(|x| law.density(x) * (1.0 / (x - z)).im, a, b, b, tol)?;
    let atom = law.atom_mass();
    let atom_part = if atom > 0.0 {
        atom / (-z)
    } else {
        Complex64::new(0.0, 0.0)
    };
    Ok(Complex64::new(re, im) + atom_part)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn upper_grid() -> Vec<Complex64> {
        let mut pts = Vec::new();
        for k in 0..50 {
            let a = -3.0 + 6.0 * k as f64 / 49.0;
            pts.push(c(a, 0.1));
            pts.push(c(a, 1.0));
        }
        pts
    }

    #[test]
    fn sqrt_branch() {
        assert_eq!(complex_sqrt_upper(c(4.0, 0.0)), c(2.0, 0.0));
        let r = complex_sqrt_upper(c(-5.0, 0.0));
        assert_eq!(r.re, 0.0);
        assert!((r.im - 5.0_f64.sqrt()).abs() < 1e-15);
        let r = complex_sqrt_upper(c(0.0, 1.0));
        let h = std::f64::consts::FRAC_1_SQRT_2;
        assert!((r - c(h, h)).norm() < 1e-15);
        let r = complex_sqrt_upper(c(3.0, -4.0));
        assert!(r.im > 0.0);
        assert!((r * r - c(3.0, -4.0)).norm() < 1e-14 * 5.0);
        assert_eq!(complex_sqrt_upper(c(0.0, 0.0)), c(0.0, 0.0));
    }

    #[test]
    fn mp_density_values() {
        assert_eq!(mp_density(0.25, 3.0), 0.0);
        assert_eq!(mp_density(0.25, 0.25), 0.0);
        assert_eq!(mp_density(0.25, 2.25), 0.0);
        let expected = 2.0 / PI * (1.25_f64 * 0.75).sqrt();
        assert!((mp_density(0.25, 1.0) - expected).abs() < 1e-15);
        assert!((mp_density(0.25, 1.0) - 0.616_404_444_061_5).abs() < 1e-12);
    }

    #[test]
    fn mp_cdf_values() {
        assert_eq!(mp_cdf(0.25, 0.25).unwrap(), 0.0);
        assert!((mp_cdf(0.25, 2.25).unwrap() - 1.0).abs() < 1e-8);
        assert!((mp_cdf(0.25, 2.25 - 1e-12).unwrap() - 1.0).abs() < 1e-8);
        assert!((mp_cdf(4.0, 0.0).unwrap() - 0.75).abs() < 1e-12);
        assert_eq!(mp_cdf(4.0, -1e-12).unwrap(), 0.0);
        let law = SpectralLaw::marchenko_pastur(4.0).unwrap();
        assert_eq!(law.cdf_left(0.0), 0.0);
        assert_eq!(law.jump_points(), vec![0.0]);
        for y in [0.01, 0.25, 1.0, 2.0, 4.0] {
            let (a, b) = mp_support(y);
            let mass = mp_cdf(y, b - 1e-15).unwrap();
            assert!((mass - 1.0).abs() < 1e-8, "y={y}: {mass}");
            let mut prev = 0.0;
            for k in 0..=200 {
                let x = a - 0.1 + (b - a + 0.2) * k as f64 / 200.0;
                let v = mp_cdf(y, x).unwrap();
                assert!(v >= prev, "y={y} x={x}");
                prev = v;
            }
        }
        assert!(mp_cdf(0.0, 1.0).is_err());
    }

    #[test]
    fn mp_moments() {
        assert!((mp_moment(0.25, 0).unwrap() - 1.0).abs() < 1e-10);
        assert!((mp_moment(0.25, 1).unwrap() - 1.0).abs() < 1e-10);
        assert!((mp_moment(0.7, 1).unwrap() - 1.0).abs() < 1e-10);
        assert!((mp_moment(0.25, 2).unwrap() - 1.25).abs() < 1e-6);
        for y in [0.1, 0.5, 1.0, 3.0] {
            for k in 0..6 {
                let q = mp_moment(y, k).unwrap();
                let closed = mp_moment_closed_form(y, k);
                assert!(
                    (q - closed).abs() <= 1e-8 * closed.max(1.0),
                    "y={y} k={k}: {q} vs {closed}"
                );
            }
        }
        assert_eq!(mp_moment_closed_form(2.0, 3), 1.0 + 3.0 * 2.0 + 4.0);
    }

    #[test]
    fn semicircle_values() {
        assert_eq!(semicircle_cdf(0.0), 0.5);
        assert_eq!(semicircle_cdf(-2.0), 0.0);
        assert_eq!(semicircle_cdf(2.0), 1.0);
        for k in 0..=100 {
            let x = -2.5 + 5.0 * k as f64 / 100.0;
            assert!((semicircle_cdf(x) + semicircle_cdf(-x) - 1.0).abs() < 1e-10);
            assert_eq!(semicircle_density(x), semicircle_density(-x));
        }
        let quad = integrate(semicircle_density, -2.0, 1.0, 1e-12).unwrap();
        assert!((quad - semicircle_cdf(1.0)).abs() < 1e-6);
    }

    #[test]
    fn semicircle_transform() {
        let s = semicircle_stieltjes(c(0.0, 1.0)).unwrap();
        assert!(s.re.abs() < 1e-15);
        assert!((s.im - (5.0_f64.sqrt() - 1.0) / 2.0).abs() < 1e-15);
        let z = c(0.5, 0.5);
        let q = stieltjes_by_quadrature(&SpectralLaw::Semicircle, z, 1e-11).unwrap();
        assert!((q - semicircle_stieltjes(z).unwrap()).norm() < 1e-6);
        let s = semicircle_stieltjes(c(0.0, 1e-6)).unwrap();
        assert!((s.im / PI - 1.0 / PI).abs() < 1e-4);
        assert!(semicircle_stieltjes(c(1.0, 0.0)).is_err());
    }

    #[test]
    fn mp_transform() {
        let z = c(1.0, 1.0);
        let law = SpectralLaw::marchenko_pastur(0.25).unwrap();
        let q = stieltjes_by_quadrature(&law, z, 1e-11).unwrap();
        assert!((q - mp_stieltjes(0.25, z).unwrap()).norm() < 1e-6);
        for z in upper_grid() {
            assert!(mp_stieltjes(0.25, z).unwrap().im > 0.0);
            assert!(semicircle_stieltjes(z).unwrap().im > 0.0);
        }
        let t = 1e3;
        let z = c(0.0, t);
        let s = mp_stieltjes(0.25, z).unwrap();
        assert!((s * z + 1.0).norm() <= 2.0 / t);
        assert!(mp_stieltjes(0.25, c(1.0, -1.0)).is_err());
        assert!(mp_stieltjes(0.25, c(1.0, 0.0)).is_err());
    }

    #[test]
    fn self_consistent_equations() {
        for y in [0.25, 1.0, 2.0] {
            for z in upper_grid() {
                let s = mp_stieltjes(y, z).unwrap();
                assert!(mp_self_consistent_residual(y, z, s).norm() < 1e-10);
                let g = semicircle_stieltjes(z).unwrap();
                assert!(semicircle_self_consistent_residual(z, g).norm() < 1e-10);
            }
        }
    }

    #[test]
    fn transforms_match_quadrature_with_atom() {
        let law = SpectralLaw::marchenko_pastur(2.0).unwrap();
        for z in [c(0.3, 0.2), c(-1.0, 1.0), c(4.0, 0.5)] {
            let q = stieltjes_by_quadrature(&law, z, 1e-11).unwrap();
            assert!((q - law.stieltjes(z).unwrap()).norm() < 1e-6, "{z}");
        }
    }

    #[test]
    fn density_curve_grid() {
        let curve = SpectralLaw::Semicircle.density_curve(-2.0, 2.0, 5);
        assert_eq!(curve.len(), 5);
        assert_eq!(curve[2].0, 0.0);
        assert!((curve[2].1 - 1.0 / PI).abs() < 1e-15);
        assert_eq!(curve[0].1, 0.0);
    }
}
