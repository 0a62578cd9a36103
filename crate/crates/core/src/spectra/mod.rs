//! Sample covariance matrices, their rescalings, spectra and empirical
//! spectral distributions.

mod covariance;
mod eigen;
mod esd;

pub use covariance::{
    covariance_from_rows, rescale_lowtemp, rescale_null, sample_covariance, CovarianceMatrix,
};
pub use eigen::{symmetric_eigenvalues, tridiagonalize, MAX_QL_ITERATIONS};
pub use esd::{histogram, Esd, Histogram, HistogramBin};

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::CwError;

/// Which transformation of `V = XXᵀ/n` a matrix or spectrum carries.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Normalization {
    /// `V` itself.
    Raw,
    /// `√(n/p)(V − I)`.
    Null,
    /// `V/(1 − m²)`.
    Lowtemp,
    /// `√(n/p)(V/(1 − m²) − I)`.
    LowtempNull,
    /// Not derived from a covariance matrix.
    None,
}

impl fmt::Display for Normalization {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Normalization::Raw => "raw",
            Normalization::Null => "null",
            Normalization::Lowtemp => "lowtemp",
            Normalization::LowtempNull => "lowtemp-null",
            Normalization::None => "none",
        })
    }
}

impl FromStr for Normalization {
    type Err = CwError;

    fn from_str(s: &str) -> Result<Self, CwError> {
        match s {
            "raw" => Ok(Normalization::Raw),
            "null" => Ok(Normalization::Null),
            "lowtemp" => Ok(Normalization::Lowtemp),
            "lowtemp-null" => Ok(Normalization::LowtempNull),
            "none" => Ok(Normalization::None),
            other => Err(CwError::input(format!("unknown normalization '{other}'"))),
        }
    }
}

/// Eigenvalues sorted non-increasing, `λ₁ ≥ ⋯ ≥ λ_p`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Spectrum {
    eigenvalues: Vec<f64>,
    normalization: Normalization,
    seed: Option<u64>,
    /// `|Σλ − tr A|` for the matrix the spectrum was computed from.
    residual: f64,
}

impl Spectrum {
    /// Sorts the given values into descending order.
    pub fn from_eigenvalues(mut eigenvalues: Vec<f64>, normalization: Normalization) -> Self {
        eigenvalues.sort_by(|a, b| b.total_cmp(a));
        Self {
            eigenvalues,
            normalization,
            seed: None,
            residual: 0.0,
        }
    }

    pub(crate) fn with_residual(mut self, residual: f64) -> Self {
        self.residual = residual;
        self
    }

    pub fn with_seed(mut self, seed: Option<u64>) -> Self {
        self.seed = seed;
        self
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    pub fn len(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eigenvalues.is_empty()
    }

    pub fn normalization(&self) -> Normalization {
        self.normalization
    }

    pub fn seed(&self) -> Option<u64> {
        self.seed
    }

    pub fn residual(&self) -> f64 {
        self.residual
    }

    /// `λ₁`, if any.
    pub fn top(&self) -> Option<f64> {
        self.eigenvalues.first().copied()
    }

    /// The spectrum without its `k` largest eigenvalues.
    pub fn drop_top(&self, k: usize) -> Spectrum {
        Spectrum {
            eigenvalues: self.eigenvalues.iter().skip(k).copied().collect(),
            ..self.clone()
        }
    }

    /// Applies `x ↦ scale·(x − shift)` to every eigenvalue.
    pub fn affine(&self, shift: f64, scale: f64, normalization: Normalization) -> Spectrum {
        let mut eigenvalues: Vec<f64> = self
            .eigenvalues
            .iter()
            .map(|&x| scale * (x - shift))
            .collect();
        if scale < 0.0 {
            eigenvalues.reverse();
        }
        Spectrum {
            eigenvalues,
            normalization,
            ..self.clone()
        }
    }

    /// Number of eigenvalues with `|λ| ≤ tol · |λ₁|`.
    pub fn count_near_zero(&self, rel_tol: f64) -> usize {
        let scale = self.eigenvalues.iter().fold(0.0_f64, |a, v| a.max(v.abs()));
        self.eigenvalues
            .iter()
            .filter(|v| v.abs() <= rel_tol * scale)
            .count()
    }

    /// Sets eigenvalues with `|λ| ≤ tol · |λ₁|` to exactly zero.
    pub fn snap_near_zero(&self, rel_tol: f64) -> Spectrum {
        let scale = self.eigenvalues.iter().fold(0.0_f64, |a, v| a.max(v.abs()));
        let eigenvalues = self
            .eigenvalues
            .iter()
            .map(|&v| if v.abs() <= rel_tol * scale { 0.0 } else { v })
            .collect();
        Spectrum {
            eigenvalues,
            ..self.clone()
        }
    }
}
