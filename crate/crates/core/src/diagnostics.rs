//! Sample-versus-theory diagnostics: KS distance, empirical Stieltjes
//! transforms, the shift identity, the finite-size residual `δ_n(q)` of the
//! self-consistent equation, resolvent matrix bounds and correlation-rate
//! probes.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::cw::{pair_correlation_exact, solve_magnetization};
use crate::error::{CwError, Result};
use crate::laws::{complex_sqrt_upper, CumulativeDistribution, SpectralLaw};
use crate::linalg::{shifted_complex, ComplexLu, DenseMatrix};
use crate::record::RunRecord;
use crate::spectra::{Esd, Normalization, Spectrum};

/// Relative agreement required between the two `δ_n` routes.
pub const DELTA_AGREEMENT_TOL: f64 = 1e-8;

/// Sup-distance between two distribution functions, evaluated at every
/// jump point of either one using both one-sided limits.
///
/// Exact when at least one argument is a step function and the other is
/// continuous away from its jump points.
pub fn ks_distance(a: &impl CumulativeDistribution, b: &impl CumulativeDistribution) -> f64 {
    let mut points = a.jump_points();
    points.extend(b.jump_points());
    points
        .into_iter()
        .map(|x| {
            let right = (a.cdf(x) - b.cdf(x)).abs();
            let left = (a.cdf_left(x) - b.cdf_left(x)).abs();
            right.max(left)
        })
        .fold(0.0, f64::max)
}

/// KS distance between the ESD of `spec` and `law`.
pub fn ks_to_law(spec: &Spectrum, law: &SpectralLaw) -> f64 {
    ks_distance(&Esd::new(spec), law)
}

fn check_upper(z: Complex64) -> Result<()> {
    if z.im > 0.0 && z.re.is_finite() && z.im.is_finite() {
        Ok(())
    } else {
        Err(CwError::domain(format!(
            "need Im z > 0, got {}{:+}i",
            z.re, z.im
        )))
    }
}

/// `(1/p) Σᵢ 1/(λᵢ − z)`.
pub fn empirical_stieltjes(spec: &Spectrum, z: Complex64) -> Result<Complex64> {
    check_upper(z)?;
    if spec.is_empty() {
        return Err(CwError::input("Stieltjes transform of an empty spectrum"));
    }
    let sum: Complex64 = spec.eigenvalues().iter().map(|&l| 1.0 / (l - z)).sum();
    Ok(sum / spec.len() as f64)
}

/// `(1/p) tr (A − z)⁻¹` by a dense complex solve.
pub fn resolvent_trace(a: &DenseMatrix, z: Complex64) -> Result<Complex64> {
    check_upper(z)?;
    let p = a.rows();
    let inv = ComplexLu::factor(p, shifted_complex(a, z))?.inverse();
    let tr: Complex64 = (0..p).map(|i| inv[i * p + i]).sum();
    Ok(tr / p as f64)
}

fn check_shape(spec: &Spectrum, p: usize, n: usize) -> Result<f64> {
    if p == 0 || n == 0 || spec.len() != p {
        return Err(CwError::input(format!(
            "spectrum of length {} does not match p = {p}, n = {n}",
            spec.len()
        )));
    }
    Ok(p as f64 / n as f64)
}

/// `|S_{y^{-1/2}(V − I)}(z) − y^{1/2} s_V(1 + y^{1/2} z)|` with `y = p/n`.
///
/// The left side is evaluated on the affinely mapped eigenvalues, the right
/// side on the raw ones.
pub fn stieltjes_shift_check(spec: &Spectrum, p: usize, n: usize, z: Complex64) -> Result<f64> {
    let y = check_shape(spec, p, n)?;
    let r = y.sqrt();
    let mapped = spec.affine(1.0, 1.0 / r, Normalization::None);
    let lhs = empirical_stieltjes(&mapped, z)?;
    let rhs = r * empirical_stieltjes(spec, 1.0 + r * z)?;
    Ok((lhs - rhs).norm())
}

/// Finite-size residual of the self-consistent equation at `q = 1 + √y z`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DeltaResidual {
    pub z: [f64; 2],
    pub q: [f64; 2],
    pub ratio: f64,
    /// `s_n(q)`.
    pub stieltjes: [f64; 2],
    /// `δ_n(q) = 1/(1 − q − y − y q s) − s`.
    pub delta: [f64; 2],
    /// `δ_n(q)` from the linear form `(1 − a s + y q s²)/(a − y q s)`.
    pub delta_linear: [f64; 2],
    /// `1 − q − y − y q s`.
    pub denominator: [f64; 2],
    /// Whether `s_n` is the root of the quadratic selected by the upper
    /// square-root branch.
    pub upper_branch: bool,
    /// The two δ routes agree to `DELTA_AGREEMENT_TOL`.
    pub routes_agree: bool,
}

fn pair(c: Complex64) -> [f64; 2] {
    [c.re, c.im]
}

fn unpair(v: [f64; 2]) -> Complex64 {
    Complex64::new(v[0], v[1])
}

impl DeltaResidual {
    pub fn delta_complex(&self) -> Complex64 {
        unpair(self.delta)
    }

    pub fn abs_delta(&self) -> f64 {
        self.delta_complex().norm()
    }

    /// `|√y · δ_n(q)|`.
    pub fn scaled_abs_delta(&self) -> f64 {
        self.ratio.sqrt() * self.abs_delta()
    }
}

/// `δ_n(q)` for the spectrum of a raw `V_n` of shape `p × n`.
pub fn delta_residual(spec: &Spectrum, p: usize, n: usize, z: Complex64) -> Result<DeltaResidual> {
    let y = check_shape(spec, p, n)?;
    check_upper(z)?;
    let q = 1.0 + y.sqrt() * z;
    let s = empirical_stieltjes(spec, q)?;
    let a = 1.0 - q - y;
    let denom = a - y * q * s;
    if denom.norm() <= 1e-14 {
        return Err(CwError::Numerical(format!(
            "self-consistent denominator vanishes at q = {q}"
        )));
    }
    let delta = 1.0 / denom - s;
    let delta_linear = (1.0 - a * s + y * q * s * s) / denom;
    let scale = delta.norm().max(1.0);
    let routes_agree = (delta - delta_linear).norm() <= DELTA_AGREEMENT_TOL * scale;

    // s solves y q s² − (a − y q δ) s + (1 − a δ) = 0; the upper branch picks
    // s = ((a − y q δ) + √disc)/(2 y q).
    let b = a - y * q * delta;
    let disc = b * b - 4.0 * y * q * (1.0 - a * delta);
    let upper = (b + complex_sqrt_upper(disc)) / (2.0 * y * q);
    let upper_branch = (upper - s).norm() <= 1e-6 * s.norm().max(1.0);

    Ok(DeltaResidual {
        z: pair(z),
        q: pair(q),
        ratio: y,
        stieltjes: pair(s),
        delta: pair(delta),
        delta_linear: pair(delta_linear),
        denominator: pair(denom),
        upper_branch,
        routes_agree,
    })
}

/// One inequality: `lhs ≤ rhs`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundEntry {
    pub name: String,
    pub lhs: f64,
    pub rhs: f64,
    pub margin: f64,
}

impl BoundEntry {
    fn new(name: &str, lhs: f64, rhs: f64) -> Self {
        Self {
            name: name.to_owned(),
            lhs,
            rhs,
            margin: rhs - lhs,
        }
    }

    pub fn holds(&self) -> bool {
        self.margin >= 0.0
    }
}

/// Bounds on `F(X) = Xᵀ(XXᵀ/n − z)⁻¹X`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundsReport {
    pub p: usize,
    pub n: usize,
    pub z: [f64; 2],
    pub entry_bound: f64,
    /// i) and ii) on `F`; iii) and iv) on `F/n²`.
    pub bounds: Vec<BoundEntry>,
    /// iii) and iv) applied to `F` itself (not required to hold).
    pub unscaled: Vec<BoundEntry>,
    /// `‖G⁻¹V − I − zG⁻¹‖_F` with `G = V − z`.
    pub identity_residual: f64,
    pub ok: bool,
}

/// Forms `F(X)` for a `p × n` matrix and evaluates the four inequalities.
///
/// The sum bounds iii) and iv) are evaluated for `F/n²`, the quantity their
/// proof bounds; the same two inequalities for `F` itself are reported
/// separately in `unscaled`.
pub fn matrix_bounds_check(
    x: &DenseMatrix,
    z: Complex64,
    entry_bound: f64,
) -> Result<BoundsReport> {
    check_upper(z)?;
    let (p, n) = (x.rows(), x.cols());
    if p == 0 || n == 0 {
        return Err(CwError::input("matrix bounds need a non-empty matrix"));
    }
    let max_abs = x.as_slice().iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    if max_abs > entry_bound {
        return Err(CwError::input(format!(
            "entries reach {max_abs}, above the stated bound {entry_bound}"
        )));
    }
    let gram = x.matmul(&x.transpose())?.scale(1.0 / n as f64);
    let lu = ComplexLu::factor(p, shifted_complex(&gram, z))?;

    // W = G⁻¹X column by column, then F = XᵀW.
    let mut w = vec![Complex64::new(0.0, 0.0); p * n];
    let mut col = vec![Complex64::new(0.0, 0.0); p];
    for j in 0..n {
        for i in 0..p {
            col[i] = Complex64::new(x[(i, j)], 0.0);
        }
        let sol = lu.solve(&col);
        for i in 0..p {
            w[i * n + j] = sol[i];
        }
    }
    let mut f = vec![Complex64::new(0.0, 0.0); n * n];
    for i in 0..n {
        for k in 0..p {
            let xki = x[(k, i)];
            if xki == 0.0 {
                continue;
            }
            for j in 0..n {
                f[i * n + j] += xki * w[k * n + j];
            }
        }
    }

    let eta = z.im;
    let growth = 1.0 + z.norm() / eta;
    let (nf, pf) = (n as f64, p as f64);
    let off_frobenius = (0..n * n)
        .filter(|k| k / n != k % n)
        .map(|k| f[k].norm_sqr())
        .sum::<f64>()
        .sqrt();
    let trace: Complex64 = (0..n).map(|i| f[i * n + i]).sum();
    let total: Complex64 = f.iter().sum();
    let column_off = (0..n)
        .map(|j| {
            (0..n)
                .filter(|&i| i != j)
                .map(|i| f[i * n + j])
                .sum::<Complex64>()
                .norm()
        })
        .fold(0.0, f64::max);
    let b2 = entry_bound * entry_bound;
    let rhs_iii = b2 * pf / eta + growth / nf;
    let rhs_iv = b2 * pf / (nf * eta);
    let n2 = nf * nf;
    let bounds = vec![
        BoundEntry::new("i", off_frobenius, nf * pf.sqrt() * growth),
        BoundEntry::new("ii", trace.norm(), nf * pf * growth),
        BoundEntry::new("iii", total.norm() / n2, rhs_iii),
        BoundEntry::new("iv", column_off / n2, rhs_iv),
    ];
    let unscaled = vec![
        BoundEntry::new("iii", total.norm(), rhs_iii),
        BoundEntry::new("iv", column_off, rhs_iv),
    ];

    let inv = lu.inverse();
    let mut identity_sq = 0.0;
    for i in 0..p {
        for j in 0..p {
            let lhs: Complex64 = (0..p).map(|k| inv[i * p + k] * gram[(k, j)]).sum();
            let id = if i == j { 1.0 } else { 0.0 };
            let rhs = id + z * inv[i * p + j];
            identity_sq += (lhs - rhs).norm_sqr();
        }
    }

    let ok = bounds.iter().all(BoundEntry::holds);
    Ok(BoundsReport {
        p,
        n,
        z: pair(z),
        entry_bound,
        bounds,
        unscaled,
        identity_residual: identity_sq.sqrt(),
        ok,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CorrelationRow {
    #[serde(rename = "N")]
    pub total_spins: usize,
    pub raw: f64,
    pub scaled: f64,
}

/// Which power of `N` the pair correlation is scaled by.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CorrelationScaling {
    /// `N · corr`, for `β < 1`.
    Linear,
    /// `√N · corr`, for `β = 1`.
    SquareRoot,
    /// `corr − m²`, for `β > 1`.
    Offset,
}

impl CorrelationScaling {
    pub fn for_beta(beta: f64) -> Self {
        if beta < 1.0 {
            CorrelationScaling::Linear
        } else if beta == 1.0 {
            CorrelationScaling::SquareRoot
        } else {
            CorrelationScaling::Offset
        }
    }
}

/// Exact pair correlations with the regime-appropriate scaling.
pub fn correlation_rate_probe(beta: f64, sizes: &[usize]) -> Result<Vec<CorrelationRow>> {
    let scaling = CorrelationScaling::for_beta(beta);
    let m2 = match scaling {
        CorrelationScaling::Offset => solve_magnetization(beta)?.value().powi(2),
        _ => 0.0,
    };
    sizes
        .iter()
        .map(|&n| {
            let raw = pair_correlation_exact(beta, n)?;
            let scaled = match scaling {
                CorrelationScaling::Linear => n as f64 * raw,
                CorrelationScaling::SquareRoot => (n as f64).sqrt() * raw,
                CorrelationScaling::Offset => raw - m2,
            };
            Ok(CorrelationRow {
                total_spins: n,
                raw,
                scaled,
            })
        })
        .collect()
}

/// `|a − b| / |b|` for the last two scaled entries.
pub fn last_relative_change(rows: &[CorrelationRow]) -> Option<f64> {
    match rows {
        [.., a, b] => Some((b.scaled - a.scaled).abs() / b.scaled.abs()),
        _ => None,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DeltaEntry {
    pub z_re: f64,
    pub z_im: f64,
    pub abs_delta: f64,
}

impl From<&DeltaResidual> for DeltaEntry {
    fn from(d: &DeltaResidual) -> Self {
        Self {
            z_re: d.z[0],
            z_im: d.z[1],
            abs_delta: d.abs_delta(),
        }
    }
}

/// Serialized bundle of diagnostics for one run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiagnosticsReport {
    pub ks: Option<f64>,
    pub law: Option<SpectralLaw>,
    pub atom_mass: Option<f64>,
    pub zero_eigenvalues: Option<usize>,
    pub top_eigenvalue: Option<f64>,
    pub delta: Vec<DeltaEntry>,
    pub bounds: Vec<BoundEntry>,
    pub bounds_ok: Option<bool>,
    pub correlations: Vec<CorrelationRow>,
    pub metadata: Option<RunRecord>,
}

impl DiagnosticsReport {
    pub fn empty() -> Self {
        Self {
            ks: None,
            law: None,
            atom_mass: None,
            zero_eigenvalues: None,
            top_eigenvalue: None,
            delta: Vec::new(),
            bounds: Vec::new(),
            bounds_ok: None,
            correlations: Vec::new(),
            metadata: None,
        }
    }
}
