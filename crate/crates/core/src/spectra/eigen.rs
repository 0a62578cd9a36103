//! Dense symmetric eigenvalues: Householder reduction to tridiagonal form,
//! then the implicit-shift QL iteration. Eigenvalues only.

use super::{Normalization, Spectrum};
use crate::error::{CwError, Result};
use crate::linalg::DenseMatrix;

pub const MAX_QL_ITERATIONS: usize = 50;

const SYMMETRY_TOL: f64 = 1e-10;

/// Householder reduction of a symmetric matrix to tridiagonal form.
///
/// Returns the diagonal `d` and the sub-diagonal `e` with `e[0] = 0` and
/// `e[i]` coupling rows `i − 1` and `i`. Only the lower triangle is read.
pub fn tridiagonalize(a: &DenseMatrix) -> (Vec<f64>, Vec<f64>) {
    let n = a.rows();
    let mut w = a.clone();
    let mut d = vec![0.0; n];
    let mut e = vec![0.0; n];
    if n == 0 {
        return (d, e);
    }
    for i in (1..n).rev() {
        let l = i - 1;
        let mut h = 0.0;
        if l > 0 {
            let scale: f64 = (0..=l).map(|k| w[(i, k)].abs()).sum();
            if scale == 0.0 {
                e[i] = w[(i, l)];
            } else {
                for k in 0..=l {
                    w[(i, k)] /= scale;
                    h += w[(i, k)] * w[(i, k)];
                }
                let f = w[(i, l)];
                let g = if f >= 0.0 { -h.sqrt() } else { h.sqrt() };
                e[i] = scale * g;
                h -= f * g;
                w[(i, l)] = f - g;
                let mut f = 0.0;
                for j in 0..=l {
                    let mut g = 0.0;
                    for k in 0..=j {
                        g += w[(j, k)] * w[(i, k)];
                    }
                    for k in (j + 1)..=l {
                        g += w[(k, j)] * w[(i, k)];
                    }
                    e[j] = g / h;
                    f += e[j] * w[(i, j)];
                }
                let hh = f / (h + h);
                for j in 0..=l {
                    let f = w[(i, j)];
                    let g = e[j] - hh * f;
                    e[j] = g;
                    for k in 0..=j {
                        w[(j, k)] -= f * e[k] + g * w[(i, k)];
                    }
                }
            }
        } else {
            e[i] = w[(i, l)];
        }
        d[i] = h;
    }
    e[0] = 0.0;
    for (i, di) in d.iter_mut().enumerate() {
        *di = w[(i, i)];
    }
    (d, e)
}

/// Implicit-shift QL on a symmetric tridiagonal matrix, in place.
fn tridiagonal_ql(d: &mut [f64], e: &mut [f64]) -> Result<()> {
    let n = d.len();
    if n == 0 {
        return Ok(());
    }
    for i in 1..n {
        e[i - 1] = e[i];
    }
    e[n - 1] = 0.0;

    for l in 0..n {
        let mut iter = 0;
        loop {
            let mut m = l;
            while m + 1 < n {
                let dd = d[m].abs() + d[m + 1].abs();
                if e[m].abs() <= f64::EPSILON * dd {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            iter += 1;
            if iter > MAX_QL_ITERATIONS {
                return Err(CwError::Numerical(format!(
                    "QL iteration did not converge for eigenvalue {l} after {MAX_QL_ITERATIONS} iterations"
                )));
            }
            // Wilkinson-type shift from the leading 2×2 block.
            let mut g = (d[l + 1] - d[l]) / (2.0 * e[l]);
            let mut r = g.hypot(1.0);
            g = d[m] - d[l] + e[l] / (g + r.copysign(g));
            let (mut s, mut c, mut p) = (1.0, 1.0, 0.0);
            let mut deflated = false;
            for i in (l..m).rev() {
                let f = s * e[i];
                let b = c * e[i];
                r = f.hypot(g);
                e[i + 1] = r;
                if r == 0.0 {
                    // Underflow: the matrix splits; restart on the smaller block.
                    d[i + 1] -= p;
                    e[m] = 0.0;
                    deflated = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[i + 1] - p;
                r = (d[i] - g) * s + 2.0 * c * b;
                p = s * r;
                d[i + 1] = g + p;
                g = c * r - b;
            }
            if deflated {
                continue;
            }
            d[l] -= p;
            e[l] = g;
            e[m] = 0.0;
        }
    }
    Ok(())
}

/// All eigenvalues of a symmetric matrix, sorted descending.
///
/// The input is symmetrized as `(A + Aᵀ)/2` first; inputs further than
/// `1e−10` (relative to the largest entry) from symmetric are rejected.
pub fn symmetric_eigenvalues(a: &DenseMatrix) -> Result<Spectrum> {
    symmetric_eigenvalues_tagged(a, Normalization::None)
}

pub(crate) fn symmetric_eigenvalues_tagged(
    a: &DenseMatrix,
    tag: Normalization,
) -> Result<Spectrum> {
    if !a.is_square() {
        return Err(CwError::input(format!(
            "eigenvalues need a square matrix, got {}x{}",
            a.rows(),
            a.cols()
        )));
    }
    if a.as_slice().iter().any(|v| !v.is_finite()) {
        return Err(CwError::input("matrix has non-finite entries"));
    }
    let scale = a.as_slice().iter().fold(0.0_f64, |acc, v| acc.max(v.abs()));
    if a.asymmetry() > SYMMETRY_TOL * scale.max(f64::MIN_POSITIVE) {
        return Err(CwError::input(format!(
            "matrix is not symmetric (max deviation {:.3e})",
            a.asymmetry()
        )));
    }
    let mut sym = a.clone();
    sym.symmetrize();
    let (mut d, mut e) = tridiagonalize(&sym);
    tridiagonal_ql(&mut d, &mut e)?;
    let residual = (d.iter().sum::<f64>() - sym.trace()).abs();
    Ok(Spectrum::from_eigenvalues(d, tag).with_residual(residual))
}
