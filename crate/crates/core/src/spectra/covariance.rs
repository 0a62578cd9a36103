use super::eigen::symmetric_eigenvalues_tagged;
use super::{Normalization, Spectrum};
use crate::cw::{Magnetization, SpinMatrix};
use crate::error::{CwError, Result};
use crate::linalg::DenseMatrix;

/// A `p × p` symmetric matrix derived from `V = XXᵀ/n`.
#[derive(Debug, Clone, PartialEq)]
pub struct CovarianceMatrix {
    matrix: DenseMatrix,
    normalization: Normalization,
    p: usize,
    n: usize,
    magnetization: Option<f64>,
    seed: Option<u64>,
}

impl CovarianceMatrix {
    pub fn matrix(&self) -> &DenseMatrix {
        &self.matrix
    }

    pub fn normalization(&self) -> Normalization {
        self.normalization
    }

    pub fn p(&self) -> usize {
        self.p
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// `y_n = p/n`.
    pub fn ratio(&self) -> f64 {
        self.p as f64 / self.n as f64
    }

    pub fn magnetization(&self) -> Option<f64> {
        self.magnetization
    }

    pub fn seed(&self) -> Option<u64> {
        self.seed
    }

    pub fn spectrum(&self) -> Result<Spectrum> {
        Ok(symmetric_eigenvalues_tagged(&self.matrix, self.normalization)?.with_seed(self.seed))
    }
}

/// `XXᵀ/n` for a row-major `p × n` array.
pub fn covariance_from_rows(p: usize, n: usize, data: &[f64]) -> Result<CovarianceMatrix> {
    if p == 0 || n == 0 || data.len() != p * n {
        return Err(CwError::input(format!(
            "expected a non-empty {p}x{n} array, got {} values",
            data.len()
        )));
    }
    let mut v = DenseMatrix::zeros(p, p);
    let inv_n = 1.0 / n as f64;
    for i in 0..p {
        let ri = &data[i * n..(i + 1) * n];
        for j in 0..=i {
            let rj = &data[j * n..(j + 1) * n];
            let dot: f64 = ri.iter().zip(rj).map(|(a, b)| a * b).sum();
            v[(i, j)] = dot * inv_n;
            v[(j, i)] = dot * inv_n;
        }
    }
    Ok(CovarianceMatrix {
        matrix: v,
        normalization: Normalization::Raw,
        p,
        n,
        magnetization: None,
        seed: None,
    })
}

/// `V = XXᵀ/n`.
pub fn sample_covariance(x: &SpinMatrix) -> CovarianceMatrix {
    let mut v = covariance_from_rows(x.rows(), x.cols(), x.entries())
        .expect("spin matrix shape is consistent by construction");
    v.seed = Some(x.seed());
    v
}

/// `√(n/p)(V − I)`; maps `raw → null` and `lowtemp → lowtemp-null`.
pub fn rescale_null(v: &CovarianceMatrix) -> Result<CovarianceMatrix> {
    let target = match v.normalization {
        Normalization::Raw => Normalization::Null,
        Normalization::Lowtemp => Normalization::LowtempNull,
        other => {
            return Err(CwError::input(format!(
                "null rescaling needs a raw or lowtemp matrix, got {other}"
            )))
        }
    };
    let scale = (v.n as f64 / v.p as f64).sqrt();
    let mut m = v.matrix.scale(scale);
    for i in 0..v.p {
        m[(i, i)] -= scale;
    }
    m.symmetrize();
    Ok(CovarianceMatrix {
        matrix: m,
        normalization: target,
        ..v.clone()
    })
}

/// `V/(1 − m²)`.
pub fn rescale_lowtemp(v: &CovarianceMatrix, m: &Magnetization) -> Result<CovarianceMatrix> {
    if v.normalization != Normalization::Raw {
        return Err(CwError::input(format!(
            "lowtemp rescaling needs a raw matrix, got {}",
            v.normalization
        )));
    }
    let mv = m.value();
    if !(mv > 0.0 && mv < 1.0) {
        return Err(CwError::domain(format!(
            "magnetization must lie in (0,1), got {mv}"
        )));
    }
    Ok(CovarianceMatrix {
        matrix: v.matrix.scale(1.0 / m.variance()),
        normalization: Normalization::Lowtemp,
        magnetization: Some(mv),
        ..v.clone()
    })
}
