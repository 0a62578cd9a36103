//! Exact oracles built on exchangeability: the law of a configuration depends
//! only on its spin sum, so everything reduces to a PMF over `N + 1` sums.

use crate::error::{CwError, Result};

/// Largest spin count accepted by the enumeration oracles.
pub const DEFAULT_ENUMERATION_CAP: usize = 1_000_000;

fn check_beta(beta: f64) -> Result<()> {
    // β = 0 (independent fair signs) is a valid limit for the oracles.
    if beta.is_finite() && beta >= 0.0 {
        Ok(())
    } else {
        Err(CwError::domain(format!(
            "beta must be finite and ≥ 0, got {beta}"
        )))
    }
}

fn check_size(n_spins: usize, cap: usize) -> Result<()> {
    if n_spins == 0 {
        return Err(CwError::domain("spin count must be ≥ 1"));
    }
    if n_spins > cap {
        return Err(CwError::CapExceeded { n: n_spins, cap });
    }
    Ok(())
}

fn log_sum_exp(values: &[f64]) -> f64 {
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let sum: f64 = values.iter().map(|v| (v - max).exp()).sum();
    max + sum.ln()
}

/// Exact law of the spin sum `S` of `N` Curie–Weiss spins.
///
/// Index `j` holds `P(S = 2j − N)`, i.e. the probability of exactly `j`
/// up-spins. The table is mirrored so that `P(S = k) = P(S = −k)` holds
/// bit-exactly.
#[derive(Debug, Clone)]
pub struct SpinSumPmf {
    beta: f64,
    n_spins: usize,
    log_partition: f64,
    probs: Vec<f64>,
}

impl SpinSumPmf {
    pub fn new(beta: f64, n_spins: usize) -> Result<Self> {
        Self::with_cap(beta, n_spins, DEFAULT_ENUMERATION_CAP)
    }

    pub fn with_cap(beta: f64, n_spins: usize, cap: usize) -> Result<Self> {
        check_beta(beta)?;
        check_size(n_spins, cap)?;
        let log_w = log_weights(beta, n_spins);
        let log_z = log_sum_exp(&log_w);
        let half = n_spins / 2;
        let mut probs = vec![0.0; n_spins + 1];
        for j in 0..=half {
            let v = (log_w[j] - log_z).exp();
            probs[j] = v;
            probs[n_spins - j] = v;
        }
        Ok(Self {
            beta,
            n_spins,
            log_partition: log_z,
            probs,
        })
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn n_spins(&self) -> usize {
        self.n_spins
    }

    /// `ln Z_{β,N}`.
    pub fn log_partition(&self) -> f64 {
        self.log_partition
    }

    /// Probability of `j` up-spins.
    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    /// `P(S = k)`; zero for sums of the wrong parity or out of range.
    pub fn prob_of_sum(&self, k: i64) -> f64 {
        let n = self.n_spins as i64;
        if k.abs() > n || (k + n) % 2 != 0 {
            return 0.0;
        }
        self.probs[((k + n) / 2) as usize]
    }

    /// Iterator over `(k, P(S = k))` in increasing `k`.
    pub fn iter(&self) -> impl Iterator<Item = (i64, f64)> + '_ {
        let n = self.n_spins as i64;
        self.probs
            .iter()
            .enumerate()
            .map(move |(j, &p)| (2 * j as i64 - n, p))
    }

    /// `E[S²]`.
    pub fn second_moment(&self) -> f64 {
        self.iter().map(|(k, p)| (k * k) as f64 * p).sum()
    }

    /// `E[Y_1 ⋯ Y_l]`, averaging the hypergeometric conditional moment over
    /// the sum law. The terms for `j` and `N − j` are paired so the result is
    /// exactly zero for odd `l`.
    pub fn product_moment(&self, l: usize) -> Result<f64> {
        let n = self.n_spins;
        if l == 0 {
            return Ok(1.0);
        }
        if l > n {
            return Err(CwError::domain(format!(
                "product moment order {l} exceeds N = {n}"
            )));
        }
        let sign = if l.is_multiple_of(2) { 1.0 } else { -1.0 };
        let mut total = 0.0;
        for j in 0..=n / 2 {
            let mirror = n - j;
            let h = conditional_product_moment(n, j, l);
            if mirror == j {
                // h(j) = (−1)^l h(j) at the centre.
                total += self.probs[j] * h * (1.0 + sign) / 2.0;
            } else {
                total += self.probs[j] * (h + sign * h);
            }
        }
        Ok(total)
    }
}

/// `ln[C(N, j) · exp(β (2j − N)² / (2N))]` for `j = 0..=N`, computed on the
/// lower half and mirrored.
fn log_weights(beta: f64, n_spins: usize) -> Vec<f64> {
    let n = n_spins as f64;
    let mut out = vec![0.0; n_spins + 1];
    let mut ln_binom = 0.0;
    for j in 0..=n_spins / 2 {
        let k = 2.0 * j as f64 - n;
        out[j] = ln_binom + beta * k * k / (2.0 * n);
        out[n_spins - j] = out[j];
        ln_binom += ((n - j as f64) / (j as f64 + 1.0)).ln();
    }
    out
}

/// `E[Y_1 ⋯ Y_l | j up-spins among N]`: draw `l` spins without replacement;
/// the product is `(−1)^r` with `r` the number of down-spins drawn.
fn conditional_product_moment(n: usize, j: usize, l: usize) -> f64 {
    let up = j as f64;
    let down = (n - j) as f64;
    let total = n as f64;
    let mut sum = 0.0;
    let mut binom = 1.0;
    for r in 0..=l {
        let a = l - r;
        if a <= j && r <= n - j {
            let mut term = binom;
            // Falling factorials of the up- and down-counts over that of N.
            for i in 0..a {
                term *= (up - i as f64) / (total - i as f64);
            }
            for i in 0..r {
                term *= (down - i as f64) / (total - (a + i) as f64);
            }
            if r % 2 == 1 {
                sum -= term;
            } else {
                sum += term;
            }
        }
        binom = binom * (l - r) as f64 / (r + 1) as f64;
    }
    sum
}

/// `ln Z_{β,N}` by log-sum-exp over the `N + 1` spin sums.
pub fn log_partition(beta: f64, n_spins: usize) -> Result<f64> {
    Ok(SpinSumPmf::new(beta, n_spins)?.log_partition())
}

/// Probability of one configuration `y ∈ {−1,+1}^N`.
pub fn exact_config_prob(beta: f64, config: &[i8]) -> Result<f64> {
    let n_spins = config.len();
    check_beta(beta)?;
    check_size(n_spins, DEFAULT_ENUMERATION_CAP)?;
    let mut sum: i64 = 0;
    for (i, &y) in config.iter().enumerate() {
        match y {
            1 => sum += 1,
            -1 => sum -= 1,
            other => {
                return Err(CwError::input(format!(
                    "spin {i} has value {other}, expected ±1"
                )))
            }
        }
    }
    let log_z = log_partition(beta, n_spins)?;
    let s = sum as f64;
    Ok((beta * s * s / (2.0 * n_spins as f64) - log_z).exp())
}

/// `E[Y_1 Y_2] = (E[S²] − N) / (N (N − 1))`.
pub fn pair_correlation_exact(beta: f64, n_spins: usize) -> Result<f64> {
    if n_spins < 2 {
        return Err(CwError::domain("pair correlation needs N ≥ 2"));
    }
    let pmf = SpinSumPmf::new(beta, n_spins)?;
    let n = n_spins as f64;
    Ok((pmf.second_moment() - n) / (n * (n - 1.0)))
}

/// `E[Y_1 ⋯ Y_l]` for `1 ≤ l ≤ N`.
pub fn product_moment_exact(beta: f64, n_spins: usize, l: usize) -> Result<f64> {
    if l == 0 {
        return Err(CwError::domain("product moment order must be ≥ 1"));
    }
    SpinSumPmf::new(beta, n_spins)?.product_moment(l)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    /// Brute force over all 2^N configurations, accumulated per spin sum.
    fn brute_force_sum_pmf(beta: f64, n_spins: usize) -> Vec<f64> {
        let n = n_spins as f64;
        let mut log_w = Vec::with_capacity(1 << n_spins);
        let mut ups = Vec::with_capacity(1 << n_spins);
        for mask in 0u32..(1u32 << n_spins) {
            let j = mask.count_ones() as usize;
            let s = 2.0 * j as f64 - n;
            log_w.push(beta * s * s / (2.0 * n));
            ups.push(j);
        }
        let log_z = log_sum_exp(&log_w);
        let mut out = vec![0.0; n_spins + 1];
        for (lw, j) in log_w.iter().zip(ups) {
            out[j] += (lw - log_z).exp();
        }
        out
    }

    fn all_configs(n_spins: usize) -> impl Iterator<Item = Vec<i8>> {
        (0u32..(1u32 << n_spins)).map(move |mask| {
            (0..n_spins)
                .map(|i| if mask >> i & 1 == 1 { 1 } else { -1 })
                .collect()
        })
    }

    #[test]
    fn log_partition_small_cases() {
        for &beta in &[0.1, 0.5, 1.0, 2.7] {
            assert_relative_eq!(
                log_partition(beta, 1).unwrap(),
                std::f64::consts::LN_2 + beta / 2.0,
                epsilon = 1e-14
            );
            assert_relative_eq!(
                log_partition(beta, 2).unwrap(),
                (2.0 * f64::exp(beta) + 2.0).ln(),
                epsilon = 1e-14
            );
        }
        for &n in &[1usize, 7, 100] {
            assert_relative_eq!(
                log_partition(1e-15, n).unwrap(),
                n as f64 * std::f64::consts::LN_2,
                max_relative = 1e-12
            );
        }
    }

    #[test]
    fn log_partition_is_finite_at_large_n() {
        let z = log_partition(3.0, 1_000_000).unwrap();
        assert!(z.is_finite());
        assert!(matches!(
            log_partition(0.5, DEFAULT_ENUMERATION_CAP + 1),
            Err(CwError::CapExceeded { .. })
        ));
    }

    #[test]
    fn config_prob_examples() {
        assert_relative_eq!(exact_config_prob(0.8, &[1]).unwrap(), 0.5, epsilon = 1e-15);
        let beta: f64 = 1.3;
        assert_relative_eq!(
            exact_config_prob(beta, &[1, 1]).unwrap(),
            beta.exp() / (2.0 * beta.exp() + 2.0),
            epsilon = 1e-15
        );
        assert!(matches!(
            exact_config_prob(0.5, &[1, 0, -1]),
            Err(CwError::Input(_))
        ));
    }

    #[test]
    fn config_prob_sign_flip_and_exchangeability() {
        let beta = 0.9;
        let c = [1, -1, 1, 1, -1, 1, 1];
        let flipped: Vec<i8> = c.iter().map(|y| -y).collect();
        let permuted = [1, 1, 1, 1, 1, -1, -1];
        let pc = exact_config_prob(beta, &c).unwrap();
        assert_eq!(pc, exact_config_prob(beta, &flipped).unwrap());
        assert_eq!(pc, exact_config_prob(beta, &permuted).unwrap());
    }

    #[test]
    fn config_probs_sum_to_one() {
        for n_spins in 1..=12 {
            for &beta in &[0.3, 1.0, 1.7] {
                let total: f64 = all_configs(n_spins)
                    .map(|c| exact_config_prob(beta, &c).unwrap())
                    .sum();
                assert!(
                    (total - 1.0).abs() <= 1e-10,
                    "N={n_spins} beta={beta}: {total}"
                );
            }
        }
    }

    #[test]
    fn pmf_matches_brute_force() {
        for n_spins in 1..=16 {
            for &beta in &[0.05, 0.5, 1.0, 1.5, 4.0] {
                let exact = SpinSumPmf::new(beta, n_spins).unwrap();
                let brute = brute_force_sum_pmf(beta, n_spins);
                for (a, b) in exact.probs().iter().zip(&brute) {
                    assert!(
                        (a - b).abs() <= 1e-12,
                        "N={n_spins} beta={beta}: {a} vs {b}"
                    );
                }
            }
        }
    }

    #[test]
    fn pmf_examples() {
        let pmf = SpinSumPmf::new(1e-15, 4).unwrap();
        let expected = [1.0, 4.0, 6.0, 4.0, 1.0].map(|c| c / 16.0);
        for (a, b) in pmf.probs().iter().zip(expected) {
            assert_relative_eq!(*a, b, epsilon = 1e-14);
        }

        let beta: f64 = 0.7;
        let pmf = SpinSumPmf::new(beta, 2).unwrap();
        let denom = 2.0 * beta.exp() + 2.0;
        assert_relative_eq!(pmf.prob_of_sum(2), beta.exp() / denom, epsilon = 1e-15);
        assert_relative_eq!(pmf.prob_of_sum(-2), beta.exp() / denom, epsilon = 1e-15);
        assert_relative_eq!(pmf.prob_of_sum(0), 2.0 / denom, epsilon = 1e-15);
        assert_eq!(pmf.prob_of_sum(1), 0.0);
        assert_eq!(pmf.prob_of_sum(4), 0.0);

        let pmf = SpinSumPmf::new(0.5, 100).unwrap();
        let total: f64 = pmf.probs().iter().sum();
        assert!((total - 1.0).abs() <= 1e-12);
        for k in 0..=100 {
            assert_eq!(pmf.prob_of_sum(k), pmf.prob_of_sum(-k));
        }
    }

    #[test]
    fn pair_correlation_examples() {
        for &beta in &[0.2_f64, 1.0, 2.5] {
            assert_relative_eq!(
                pair_correlation_exact(beta, 2).unwrap(),
                (beta / 2.0).tanh(),
                epsilon = 1e-14
            );
        }
        for &n in &[2usize, 10, 1000] {
            assert!(pair_correlation_exact(1e-15, n).unwrap().abs() < 1e-12);
        }
        assert!(pair_correlation_exact(0.5, 1).is_err());
    }

    #[test]
    fn pair_correlation_bounds() {
        for &n in &[2usize, 3, 17, 500] {
            for &beta in &[0.1, 1.0, 3.0] {
                let c = pair_correlation_exact(beta, n).unwrap();
                assert!(c >= -1.0 / (n as f64 - 1.0) - 1e-15 && c <= 1.0);
            }
        }
    }

    #[test]
    fn product_moments() {
        for &n in &[3usize, 4, 9, 64, 1001] {
            for l in [1usize, 3, 5].into_iter().filter(|&l| l <= n) {
                // Bit-exact zero for odd orders.
                assert_eq!(product_moment_exact(1.3, n, l).unwrap(), 0.0);
            }
        }
        for &beta in &[0.4_f64, 1.9] {
            assert_relative_eq!(
                product_moment_exact(beta, 2, 2).unwrap(),
                (beta / 2.0).tanh(),
                epsilon = 1e-14
            );
        }
        // Hypergeometric route agrees with the second-moment route.
        for &n in &[5usize, 50, 4096] {
            for &beta in &[0.5, 1.0, 1.5] {
                let a = product_moment_exact(beta, n, 2).unwrap();
                let b = pair_correlation_exact(beta, n).unwrap();
                assert!((a - b).abs() <= 1e-12, "N={n} beta={beta}: {a} vs {b}");
            }
        }
        assert!(product_moment_exact(0.5, 3, 4).is_err());
        assert!(product_moment_exact(0.5, 3, 0).is_err());
    }

    #[test]
    fn product_moment_four_matches_brute_force() {
        let n_spins = 10;
        let beta = 1.2;
        let expected: f64 = all_configs(n_spins)
            .map(|c| {
                let prod: i8 = c[..4].iter().product();
                prod as f64 * exact_config_prob(beta, &c).unwrap()
            })
            .sum();
        let got = product_moment_exact(beta, n_spins, 4).unwrap();
        assert!((got - expected).abs() <= 1e-12, "{got} vs {expected}");
    }

    #[test]
    fn high_temperature_pair_correlation_rate() {
        // N·E[Y1Y2] settles to a positive constant as N doubles.
        let scaled: Vec<f64> = (8..=12)
            .map(|e| {
                let n = 1usize << e;
                n as f64 * product_moment_exact(0.5, n, 2).unwrap()
            })
            .collect();
        assert!(scaled.iter().all(|&v| v > 0.0));
        let last = scaled[scaled.len() - 1];
        let prev = scaled[scaled.len() - 2];
        assert!(((last - prev) / last).abs() <= 0.05, "{scaled:?}");
    }
}
