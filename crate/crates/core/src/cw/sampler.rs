use std::fmt;
use std::str::FromStr;

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::mixing::{build_mixing_cdf, sample_mixing, MixingDensity, DEFAULT_GRID_SIZE};
use super::CwParams;
use crate::error::{CwError, Result};
use crate::rng::{rng_from_seed, CwRng};

/// How a spin matrix was generated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Sampler {
    /// Exact: one mixing draw, then conditionally i.i.d. spins.
    Definetti,
    /// Single-spin-flip Metropolis chain.
    Metropolis,
    /// Loaded from a file; provenance unknown.
    External,
}

impl fmt::Display for Sampler {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Sampler::Definetti => "definetti",
            Sampler::Metropolis => "metropolis",
            Sampler::External => "external",
        })
    }
}

impl FromStr for Sampler {
    type Err = CwError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "definetti" => Ok(Sampler::Definetti),
            "metropolis" => Ok(Sampler::Metropolis),
            "external" => Ok(Sampler::External),
            other => Err(CwError::input(format!("unknown sampler '{other}'"))),
        }
    }
}

/// Magnetization and centring sign applied by a restandardization.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Restandardization {
    pub m: f64,
    pub sign: i8,
}

/// A `p × n` matrix of Curie–Weiss spins, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct SpinMatrix {
    params: CwParams,
    entries: Vec<f64>,
    mixing_draw: Option<f64>,
    restandardization: Option<Restandardization>,
    seed: u64,
    sampler: Sampler,
    sweeps: Option<usize>,
}

impl SpinMatrix {
    /// Wraps raw ±1 spins, e.g. read back from disk.
    pub fn from_raw_spins(
        params: CwParams,
        entries: Vec<f64>,
        sampler: Sampler,
        seed: u64,
        mixing_draw: Option<f64>,
        sweeps: Option<usize>,
    ) -> Result<Self> {
        if entries.len() != params.total_spins() {
            return Err(CwError::input(format!(
                "expected {} entries for a {}x{} matrix, got {}",
                params.total_spins(),
                params.p(),
                params.n(),
                entries.len()
            )));
        }
        if let Some(pos) = entries.iter().position(|&v| v != 1.0 && v != -1.0) {
            return Err(CwError::input(format!(
                "entry {pos} has value {}, expected ±1",
                entries[pos]
            )));
        }
        Ok(Self {
            params,
            entries,
            mixing_draw,
            restandardization: None,
            seed,
            sampler,
            sweeps,
        })
    }

    pub(crate) fn with_entries(
        &self,
        entries: Vec<f64>,
        restandardization: Option<Restandardization>,
    ) -> Self {
        Self {
            entries,
            restandardization,
            ..self.clone()
        }
    }

    pub fn params(&self) -> &CwParams {
        &self.params
    }

    pub fn rows(&self) -> usize {
        self.params.p()
    }

    pub fn cols(&self) -> usize {
        self.params.n()
    }

    pub fn entries(&self) -> &[f64] {
        &self.entries
    }

    pub fn row(&self, i: usize) -> &[f64] {
        let n = self.cols();
        &self.entries[i * n..(i + 1) * n]
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.entries[i * self.cols() + j]
    }

    pub fn mixing_draw(&self) -> Option<f64> {
        self.mixing_draw
    }

    pub fn is_restandardized(&self) -> bool {
        self.restandardization.is_some()
    }

    pub fn restandardization(&self) -> Option<Restandardization> {
        self.restandardization
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn sampler(&self) -> Sampler {
        self.sampler
    }

    pub fn sweeps(&self) -> Option<usize> {
        self.sweeps
    }

    pub fn spin_sum(&self) -> f64 {
        self.entries.iter().sum()
    }

    /// Largest absolute entry.
    pub fn max_abs(&self) -> f64 {
        self.entries.iter().fold(0.0, |acc, v| acc.max(v.abs()))
    }
}

/// Exact sampler: caches the mixing table for one `(β, N)`.
#[derive(Debug, Clone)]
pub struct DeFinettiSampler {
    params: CwParams,
    density: MixingDensity,
}

impl DeFinettiSampler {
    pub fn new(params: &CwParams) -> Result<Self> {
        let density = build_mixing_cdf(params.beta(), params.total_spins(), DEFAULT_GRID_SIZE)?;
        Ok(Self {
            params: *params,
            density,
        })
    }

    pub fn density(&self) -> &MixingDensity {
        &self.density
    }

    /// Fills `out` with `N` spins and returns the mixing draw.
    pub fn sample_into<R: Rng + ?Sized>(&self, rng: &mut R, out: &mut [f64]) -> f64 {
        let t = sample_mixing(&self.density, rng);
        let p_up = 0.5 * (1.0 + t);
        for y in out.iter_mut() {
            *y = if rng.random::<f64>() < p_up {
                1.0
            } else {
                -1.0
            };
        }
        t
    }

    pub fn sample(&self, seed: u64) -> SpinMatrix {
        let mut rng = rng_from_seed(seed);
        let mut entries = vec![0.0; self.params.total_spins()];
        let t = self.sample_into(&mut rng, &mut entries);
        SpinMatrix {
            params: self.params,
            entries,
            mixing_draw: Some(t),
            restandardization: None,
            seed,
            sampler: Sampler::Definetti,
            sweeps: None,
        }
    }
}

/// Draws one `p × n` matrix with the exact mixing construction.
pub fn sample_cw_matrix_definetti(params: &CwParams, seed: u64) -> Result<SpinMatrix> {
    Ok(DeFinettiSampler::new(params)?.sample(seed))
}

/// Single-spin-flip Metropolis chain on the complete-graph energy
/// `−β S²/(2N)`, tracking the running sum `S`.
#[derive(Debug, Clone)]
pub struct MetropolisChain {
    beta: f64,
    spins: Vec<i8>,
    sum: i64,
    rng: CwRng,
    proposed: u64,
    accepted: u64,
}

impl MetropolisChain {
    /// Chain started from i.i.d. fair signs.
    pub fn new(beta: f64, n_spins: usize, seed: u64) -> Result<Self> {
        if !(beta.is_finite() && beta > 0.0) {
            return Err(CwError::domain(format!(
                "beta must be positive, got {beta}"
            )));
        }
        if n_spins == 0 {
            return Err(CwError::domain("spin count must be ≥ 1"));
        }
        let mut rng = rng_from_seed(seed);
        let spins: Vec<i8> = (0..n_spins)
            .map(|_| if rng.random_bool(0.5) { 1 } else { -1 })
            .collect();
        let sum = spins.iter().map(|&s| s as i64).sum();
        Ok(Self {
            beta,
            spins,
            sum,
            rng,
            proposed: 0,
            accepted: 0,
        })
    }

    /// Log acceptance ratio for flipping spin `y` when the current sum is `sum`.
    pub fn log_ratio(beta: f64, n_spins: usize, sum: i64, y: i8) -> f64 {
        let new_sum = sum - 2 * y as i64;
        beta / (2.0 * n_spins as f64) * ((new_sum * new_sum - sum * sum) as f64)
    }

    /// `min(1, exp(Δ))`.
    pub fn acceptance_probability(beta: f64, n_spins: usize, sum: i64, y: i8) -> f64 {
        Self::log_ratio(beta, n_spins, sum, y).exp().min(1.0)
    }

    pub fn step(&mut self) {
        let n = self.spins.len();
        let i = self.rng.random_range(0..n);
        let y = self.spins[i];
        let delta = Self::log_ratio(self.beta, n, self.sum, y);
        self.proposed += 1;
        if delta >= 0.0 || self.rng.random::<f64>() < delta.exp() {
            self.spins[i] = -y;
            self.sum -= 2 * y as i64;
            self.accepted += 1;
        }
    }

    /// `N` proposed flips.
    pub fn sweep(&mut self) {
        for _ in 0..self.spins.len() {
            self.step();
        }
    }

    pub fn run(&mut self, sweeps: usize) {
        for _ in 0..sweeps {
            self.sweep();
        }
    }

    pub fn spins(&self) -> &[i8] {
        &self.spins
    }

    pub fn sum(&self) -> i64 {
        self.sum
    }

    pub fn acceptance_rate(&self) -> f64 {
        if self.proposed == 0 {
            0.0
        } else {
            self.accepted as f64 / self.proposed as f64
        }
    }

    /// Discards `burn_in` sweeps, then records the spin sum every
    /// `sweeps_between` sweeps, `count` times.
    pub fn sum_snapshots(
        &mut self,
        burn_in: usize,
        sweeps_between: usize,
        count: usize,
    ) -> Vec<i64> {
        self.run(burn_in);
        (0..count)
            .map(|_| {
                self.run(sweeps_between);
                self.sum
            })
            .collect()
    }
}

/// Runs `sweeps · N` proposed flips from i.i.d. fair signs and returns the
/// final state as a `p × n` matrix.
pub fn sample_cw_matrix_metropolis(
    params: &CwParams,
    sweeps: usize,
    seed: u64,
) -> Result<SpinMatrix> {
    if sweeps == 0 {
        return Err(CwError::domain("Metropolis needs at least one sweep"));
    }
    let mut chain = MetropolisChain::new(params.beta(), params.total_spins(), seed)?;
    chain.run(sweeps);
    Ok(SpinMatrix {
        params: *params,
        entries: chain.spins.iter().map(|&s| s as f64).collect(),
        mixing_draw: None,
        restandardization: None,
        seed,
        sampler: Sampler::Metropolis,
        sweeps: Some(sweeps),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cw::exact::{exact_config_prob, pair_correlation_exact};
    use crate::rng::derive_seed;

    #[test]
    fn definetti_is_deterministic() {
        let params = CwParams::new(0.5, 6, 9).unwrap();
        let a = sample_cw_matrix_definetti(&params, 42).unwrap();
        let b = sample_cw_matrix_definetti(&params, 42).unwrap();
        assert_eq!(a, b);
        let c = sample_cw_matrix_definetti(&params, 43).unwrap();
        assert_ne!(a.entries(), c.entries());
        assert!(a.entries().iter().all(|&v| v == 1.0 || v == -1.0));
        assert!(a.mixing_draw().is_some());
        assert!(!a.is_restandardized());
    }

    #[test]
    fn metropolis_is_deterministic() {
        let params = CwParams::new(1.2, 4, 5).unwrap();
        let a = sample_cw_matrix_metropolis(&params, 10, 42).unwrap();
        let b = sample_cw_matrix_metropolis(&params, 10, 42).unwrap();
        assert_eq!(a, b);
        assert!(a.mixing_draw().is_none());
        assert_eq!(a.sweeps(), Some(10));
        assert!(sample_cw_matrix_metropolis(&params, 0, 1).is_err());
    }

    #[test]
    fn metropolis_acceptance_rule() {
        // |S| unchanged: Δ = 0, always accepted.
        assert_eq!(MetropolisChain::acceptance_probability(0.7, 9, 1, 1), 1.0);
        assert_eq!(MetropolisChain::acceptance_probability(0.7, 9, -1, -1), 1.0);
        // Moving towards alignment increases S², always accepted.
        assert_eq!(MetropolisChain::acceptance_probability(0.7, 9, 3, -1), 1.0);
        // Moving away: exp(β/(2N)·((S−2)² − S²)).
        let p = MetropolisChain::acceptance_probability(0.7, 9, 3, 1);
        assert!((p - (0.7_f64 / 18.0 * (1.0 - 9.0)).exp()).abs() < 1e-15);
    }

    #[test]
    fn running_sum_stays_consistent() {
        let mut chain = MetropolisChain::new(1.5, 37, 8).unwrap();
        for _ in 0..50 {
            chain.sweep();
            let s: i64 = chain.spins().iter().map(|&v| v as i64).sum();
            assert_eq!(s, chain.sum());
        }
        assert!(chain.acceptance_rate() > 0.0);
    }

    fn config_index(spins: &[f64]) -> usize {
        spins
            .iter()
            .enumerate()
            .filter(|(_, &v)| v > 0.0)
            .fold(0, |acc, (i, _)| acc | (1 << i))
    }

    fn tv_against(
        beta: f64,
        replicas: usize,
        master: u64,
        reference: impl Fn(&[i8]) -> f64,
    ) -> f64 {
        let params = CwParams::new(beta, 2, 4).unwrap();
        let sampler = DeFinettiSampler::new(&params).unwrap();
        let mut counts = vec![0usize; 256];
        let mut buf = vec![0.0; 8];
        for r in 0..replicas {
            let mut rng = rng_from_seed(derive_seed(master, r as u64));
            sampler.sample_into(&mut rng, &mut buf);
            counts[config_index(&buf)] += 1;
        }
        (0..256)
            .map(|mask| {
                let config: Vec<i8> = (0..8)
                    .map(|i| if mask >> i & 1 == 1 { 1 } else { -1 })
                    .collect();
                (counts[mask] as f64 / replicas as f64 - reference(&config)).abs()
            })
            .sum::<f64>()
            / 2.0
    }

    #[test]
    fn near_zero_beta_gives_uniform_configs() {
        let tv = tv_against(1e-6, 1_000_000, 17, |_| 1.0 / 256.0);
        assert!(tv <= 0.03, "{tv}");
    }

    #[test]
    fn definetti_matches_exact_law() {
        let tv = tv_against(0.5, 1_000_000, 18, |c| exact_config_prob(0.5, c).unwrap());
        assert!(tv <= 0.03, "{tv}");
    }

    #[test]
    fn metropolis_pair_correlation() {
        let n_spins = 100;
        let mut chain = MetropolisChain::new(0.5, n_spins, 5).unwrap();
        let snaps = chain.sum_snapshots(0, 500, 200);
        let n = n_spins as f64;
        let empirical = snaps
            .iter()
            .map(|&s| ((s * s) as f64 - n) / (n * (n - 1.0)))
            .sum::<f64>()
            / snaps.len() as f64;
        let exact = pair_correlation_exact(0.5, n_spins).unwrap();
        assert!((empirical - exact).abs() <= 0.02, "{empirical} vs {exact}");
    }
}
