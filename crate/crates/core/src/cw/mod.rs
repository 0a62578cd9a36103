//! The Curie–Weiss distribution on the complete graph.
//!
//! `N` exchangeable spins `y ∈ {−1,+1}^N` with weight `exp(β S² / (2N))`,
//! where `S` is the spin sum. A `p × n` spin matrix uses all `N = n·p`
//! entries as one Curie–Weiss vector, arranged row-major.

mod exact;
mod lowtemp;
mod mixing;
mod sampler;

pub use exact::{
    exact_config_prob, log_partition, pair_correlation_exact, product_moment_exact, SpinSumPmf,
    DEFAULT_ENUMERATION_CAP,
};
pub(crate) use lowtemp::apply_restandardization;
pub use lowtemp::{psi, restandardize, solve_magnetization, unrestandardize, zeta, Magnetization};
pub use mixing::{
    build_mixing_cdf, mixing_log_density_unnormalized, sample_mixing, MixingDensity,
    DEFAULT_GRID_SIZE,
};
pub use sampler::{
    sample_cw_matrix_definetti, sample_cw_matrix_metropolis, DeFinettiSampler, MetropolisChain,
    Restandardization, Sampler, SpinMatrix,
};

use serde::{Deserialize, Serialize};

use crate::error::{CwError, Result};

/// Inverse temperature and matrix shape.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CwParams {
    beta: f64,
    p: usize,
    n: usize,
}

impl CwParams {
    pub fn new(beta: f64, p: usize, n: usize) -> Result<Self> {
        if !(beta.is_finite() && beta > 0.0) {
            return Err(CwError::domain(format!(
                "beta must be positive, got {beta}"
            )));
        }
        if p == 0 || n == 0 {
            return Err(CwError::domain(format!(
                "matrix shape must be positive, got {p}x{n}"
            )));
        }
        p.checked_mul(n)
            .ok_or_else(|| CwError::domain("p·n overflows usize"))?;
        Ok(Self { beta, p, n })
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    /// Number of rows (covariates).
    pub fn p(&self) -> usize {
        self.p
    }

    /// Number of columns (sample size).
    pub fn n(&self) -> usize {
        self.n
    }

    /// Total spin count `N = n·p`.
    pub fn total_spins(&self) -> usize {
        self.p * self.n
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn params_validate() {
        let p = CwParams::new(0.5, 3, 7).unwrap();
        assert_eq!(p.total_spins(), 21);
        assert!(CwParams::new(0.0, 3, 7).is_err());
        assert!(CwParams::new(-1.0, 3, 7).is_err());
        assert!(CwParams::new(f64::NAN, 3, 7).is_err());
        assert!(CwParams::new(1.0, 0, 7).is_err());
        assert!(CwParams::new(1.0, 3, 0).is_err());
    }
}
