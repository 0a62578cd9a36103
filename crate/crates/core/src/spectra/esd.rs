use serde::{Deserialize, Serialize};

use super::Spectrum;
use crate::error::{CwError, Result};
use crate::laws::CumulativeDistribution;

/// Empirical spectral distribution: the uniform measure on the eigenvalues.
#[derive(Debug, Clone, PartialEq)]
pub struct Esd {
    ascending: Vec<f64>,
}

impl Esd {
    pub fn new(spec: &Spectrum) -> Self {
        Self::from_values(spec.eigenvalues().to_vec())
    }

    pub fn from_values(mut values: Vec<f64>) -> Self {
        values.sort_by(f64::total_cmp);
        Self { ascending: values }
    }

    pub fn len(&self) -> usize {
        self.ascending.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ascending.is_empty()
    }

    /// Support points in ascending order (with multiplicity).
    pub fn points(&self) -> &[f64] {
        &self.ascending
    }

    fn fraction(&self, count: usize) -> f64 {
        if self.ascending.is_empty() {
            0.0
        } else {
            count as f64 / self.ascending.len() as f64
        }
    }
}

impl CumulativeDistribution for Esd {
    /// `#{λᵢ ≤ x}/p`.
    fn cdf(&self, x: f64) -> f64 {
        self.fraction(self.ascending.partition_point(|&v| v <= x))
    }

    /// `#{λᵢ < x}/p`.
    fn cdf_left(&self, x: f64) -> f64 {
        self.fraction(self.ascending.partition_point(|&v| v < x))
    }

    fn jump_points(&self) -> Vec<f64> {
        let mut pts = self.ascending.clone();
        pts.dedup();
        pts
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HistogramBin {
    pub left: f64,
    pub right: f64,
    pub count: usize,
    pub density: f64,
}

/// Uniform-bin histogram; the last bin is closed on the right.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Histogram {
    pub bins: Vec<HistogramBin>,
    /// Eigenvalues counted (after dropping the top ones).
    pub total: usize,
    /// Eigenvalues outside the range.
    pub outside: usize,
    pub dropped_top: usize,
}

impl Histogram {
    pub fn range(&self) -> (f64, f64) {
        (self.bins[0].left, self.bins[self.bins.len() - 1].right)
    }

    /// `Σ density · width`.
    pub fn mass(&self) -> f64 {
        self.bins
            .iter()
            .map(|b| b.density * (b.right - b.left))
            .sum()
    }
}

/// Histogram of `spec` without its `drop_top_k` largest eigenvalues.
///
/// `range = None` spans the remaining eigenvalues. Density is
/// `count/(p_remaining · width)`.
pub fn histogram(
    spec: &Spectrum,
    bins: usize,
    range: Option<(f64, f64)>,
    drop_top_k: usize,
) -> Result<Histogram> {
    if bins == 0 {
        return Err(CwError::input("histogram needs at least one bin"));
    }
    let kept = spec.drop_top(drop_top_k);
    let values = kept.eigenvalues();
    if values.is_empty() {
        return Err(CwError::input(format!(
            "no eigenvalues left after dropping the top {drop_top_k}"
        )));
    }
    let (lo, hi) = match range {
        Some(r) => r,
        None => {
            let lo = values[values.len() - 1];
            let hi = values[0];
            if hi > lo {
                (lo, hi)
            } else {
                (lo - 0.5, hi + 0.5)
            }
        }
    };
    if !(lo.is_finite() && hi.is_finite() && hi > lo) {
        return Err(CwError::input(format!(
            "empty histogram range [{lo}, {hi}]"
        )));
    }
    let width = (hi - lo) / bins as f64;
    let mut counts = vec![0usize; bins];
    let mut outside = 0;
    for &v in values {
        if v < lo || v > hi {
            outside += 1;
            continue;
        }
        let k = (((v - lo) / width).floor() as usize).min(bins - 1);
        counts[k] += 1;
    }
    let total = values.len();
    let bins = counts
        .into_iter()
        .enumerate()
        .map(|(k, count)| {
            let left = lo + k as f64 * width;
            let right = if k + 1 == bins {
                hi
            } else {
                lo + (k + 1) as f64 * width
            };
            HistogramBin {
                left,
                right,
                count,
                density: count as f64 / (total as f64 * width),
            }
        })
        .collect();
    Ok(Histogram {
        bins,
        total,
        outside,
        dropped_top: drop_top_k.min(spec.len()),
    })
}
