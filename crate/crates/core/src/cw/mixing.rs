//! The de Finetti mixing variable `M` of the Curie–Weiss law.
//!
//! Conditionally on `M = t`, the spins are i.i.d. with `P(+1) = (1 + t)/2`.
//! `M` has density proportional to `exp(−(N/2) F_β(t)) / (1 − t²)` on
//! `(−1, 1)` with `F_β(s) = artanh(s)²/β + ln(1 − s²)`.
//!
//! Quadrature runs in `x = artanh(t)`, where the density becomes
//! `exp(−N x²/(2β)) cosh(x)^N`: smooth, with Gaussian tails and modes at
//! `x = ±β m` (`m` the magnetization, zero for `β ≤ 1`), independent of `N`.
//! The table stores `t = tanh(x)` nodes.

use rand::Rng;

use super::lowtemp::solve_magnetization;
use crate::error::{CwError, Result};

pub const DEFAULT_GRID_SIZE: usize = 4096;

/// Refinement factor and half-width (in `t`) of the refined band around modes.
const MODE_REFINEMENT: usize = 8;
const MODE_BAND: f64 = 0.1;
/// Log-density drop below the peak at which the integration window ends.
const LOG_CUTOFF: f64 = 80.0;
/// Target relative quadrature error for the normalization.
const QUAD_TARGET: f64 = 1e-10;
const MAX_DOUBLINGS: usize = 4;

fn check_t(t: f64) -> Result<()> {
    if t > -1.0 && t < 1.0 {
        Ok(())
    } else {
        Err(CwError::domain(format!(
            "mixing density is defined on (-1,1), got t = {t}"
        )))
    }
}

/// `F_β(s) = artanh(s)²/β + ln(1 − s²)`.
fn rate_function(beta: f64, s: f64) -> f64 {
    // F is even; evaluate on |s| so the symmetry holds bit-exactly.
    let a = s.abs().atanh();
    a * a / beta + (-s * s).ln_1p()
}

/// `−(N/2) F_β(t) − ln(1 − t²)`: the log of the unnormalized density of `M`.
pub fn mixing_log_density_unnormalized(beta: f64, n_spins: usize, t: f64) -> Result<f64> {
    check_t(t)?;
    Ok(-(n_spins as f64) / 2.0 * rate_function(beta, t) - (-t * t).ln_1p())
}

fn ln_cosh(x: f64) -> f64 {
    let a = x.abs();
    a + (-2.0 * a).exp().ln_1p() - std::f64::consts::LN_2
}

/// Log-density of `artanh(M)`, unnormalized.
fn log_density_x(beta: f64, n: f64, x: f64) -> f64 {
    -n * x * x / (2.0 * beta) + n * ln_cosh(x)
}

/// Tabulated CDF of the mixing variable.
#[derive(Debug, Clone)]
pub struct MixingDensity {
    beta: f64,
    n_spins: usize,
    log_norm: f64,
    /// Positive mode of `artanh(M)`, mapped back to `t` (zero when unimodal).
    mode: f64,
    quad_error: f64,
    t: Vec<f64>,
    cdf: Vec<f64>,
}

struct Segment {
    a: f64,
    b: f64,
    intervals: usize,
}

/// Cumulative integral of one segment at each of its nodes.
///
/// Composite Simpson over interval pairs; the interior node of a pair uses
/// the partial integral of the same interpolating parabola.
fn cumulative_simpson(values: &[f64], h: f64, start: f64, out: &mut Vec<f64>) {
    let mut acc = start;
    for pair in values.windows(3).step_by(2) {
        let (f0, f1, f2) = (pair[0], pair[1], pair[2]);
        out.push(acc + h / 12.0 * (5.0 * f0 + 8.0 * f1 - f2));
        acc += h / 3.0 * (f0 + 4.0 * f1 + f2);
        out.push(acc);
    }
}

fn simpson(values: &[f64], h: f64) -> f64 {
    values
        .windows(3)
        .step_by(2)
        .map(|w| h / 3.0 * (w[0] + 4.0 * w[1] + w[2]))
        .sum()
}

fn round_up_to_multiple(v: usize, k: usize) -> usize {
    v.div_ceil(k).max(1) * k
}

impl MixingDensity {
    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn n_spins(&self) -> usize {
        self.n_spins
    }

    /// `ln ∫_{(−1,1)} exp(−(N/2)F_β(s)) / (1 − s²) ds`.
    pub fn log_norm(&self) -> f64 {
        self.log_norm
    }

    /// Locations of the density peaks in `t` (one at 0, or `±m`).
    pub fn modes(&self) -> Vec<f64> {
        if self.mode > 0.0 {
            vec![-self.mode, self.mode]
        } else {
            vec![0.0]
        }
    }

    /// Richardson estimate of the relative error of the normalization.
    pub fn quadrature_error(&self) -> f64 {
        self.quad_error
    }

    /// Table of `(t, CDF(t))` pairs, increasing in `t`.
    pub fn table(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.t.iter().copied().zip(self.cdf.iter().copied())
    }

    pub fn len(&self) -> usize {
        self.t.len()
    }

    pub fn is_empty(&self) -> bool {
        self.t.is_empty()
    }

    /// Normalized density `f(t)`.
    pub fn density(&self, t: f64) -> Result<f64> {
        Ok((mixing_log_density_unnormalized(self.beta, self.n_spins, t)? - self.log_norm).exp())
    }

    /// Piecewise-linear CDF through the table nodes.
    pub fn cdf(&self, t: f64) -> f64 {
        if t <= self.t[0] {
            return 0.0;
        }
        let last = self.t.len() - 1;
        if t >= self.t[last] {
            return 1.0;
        }
        let i = self.t.partition_point(|&v| v <= t) - 1;
        let w = (t - self.t[i]) / (self.t[i + 1] - self.t[i]);
        self.cdf[i] + w * (self.cdf[i + 1] - self.cdf[i])
    }

    /// Inverse of [`cdf`](Self::cdf) for `u ∈ [0, 1]`.
    pub fn quantile(&self, u: f64) -> f64 {
        let last = self.cdf.len() - 1;
        if u <= self.cdf[0] {
            return self.t[0];
        }
        if u >= self.cdf[last] {
            return self.t[last];
        }
        let i = self.cdf.partition_point(|&c| c <= u) - 1;
        let dc = self.cdf[i + 1] - self.cdf[i];
        let w = (u - self.cdf[i]) / dc;
        self.t[i] + w * (self.t[i + 1] - self.t[i])
    }

    /// `E[g(M)]` under the tabulated (piecewise-uniform) law, by the midpoint
    /// of each table cell.
    pub fn expectation(&self, g: impl Fn(f64) -> f64) -> f64 {
        self.t
            .windows(2)
            .zip(self.cdf.windows(2))
            .map(|(t, c)| g(0.5 * (t[0] + t[1])) * (c[1] - c[0]))
            .sum()
    }
}

/// Tabulates the CDF of the mixing variable for `N` spins.
///
/// The positive half-line in `x = artanh(t)` is cut where the log-density
/// falls `LOG_CUTOFF` below its peak; the window carries `grid_size`
/// Simpson intervals, refined ×8 where `|t − mode| ≤ 0.1`. The table is
/// mirrored, so `CDF(0) = 1/2` exactly.
pub fn build_mixing_cdf(beta: f64, n_spins: usize, grid_size: usize) -> Result<MixingDensity> {
    if !(beta.is_finite() && beta > 0.0) {
        return Err(CwError::domain(format!(
            "beta must be positive, got {beta}"
        )));
    }
    if n_spins == 0 {
        return Err(CwError::domain("spin count must be ≥ 1"));
    }
    if grid_size < 256 {
        return Err(CwError::domain(format!(
            "grid_size must be ≥ 256, got {grid_size}"
        )));
    }
    let n = n_spins as f64;
    let mode_x = if beta > 1.0 {
        beta * solve_magnetization(beta)?.value()
    } else {
        0.0
    };
    let lg = |x: f64| log_density_x(beta, n, x);
    let peak = lg(mode_x);
    let below = |x: f64| lg(x) - peak < -LOG_CUTOFF;

    // Right end of the window.
    let mut step = (beta / n).sqrt().max(1e-6);
    while !below(mode_x + step) {
        step *= 2.0;
    }
    let right = bisect(below, mode_x, mode_x + step);

    // Left end: either the origin or the point where the inner tail dies off.
    let left = if mode_x > 0.0 && below(0.0) {
        bisect(|x| !below(x), 0.0, mode_x)
    } else {
        0.0
    };

    let mode_t = mode_x.tanh();
    let band_lo = (mode_t - MODE_BAND).max(0.0).atanh().clamp(left, right);
    let band_hi = if mode_t + MODE_BAND >= 1.0 {
        right
    } else {
        (mode_t + MODE_BAND).atanh().clamp(left, right)
    };
    let h_base = (right - left) / grid_size as f64;

    let mut attempt = 0;
    loop {
        let scale = 1usize << attempt;
        let mut segments = Vec::new();
        if left > 0.0 {
            // Inner gap between the origin and the window: negligible mass.
            segments.push(Segment {
                a: 0.0,
                b: left,
                intervals: 8 * scale,
            });
        }
        for (a, b, refine) in [
            (left, band_lo, 1),
            (band_lo, band_hi, MODE_REFINEMENT),
            (band_hi, right, 1),
        ] {
            if b > a {
                let raw = ((b - a) / h_base * refine as f64).ceil() as usize;
                segments.push(Segment {
                    a,
                    b,
                    intervals: round_up_to_multiple(raw, 4) * scale,
                });
            }
        }

        let mut xs = vec![0.0];
        let mut cum = vec![0.0];
        let mut coarse_total = 0.0;
        for seg in &segments {
            let h = (seg.b - seg.a) / seg.intervals as f64;
            let values: Vec<f64> = (0..=seg.intervals)
                .map(|i| (lg(seg.a + h * i as f64) - peak).exp())
                .collect();
            let start = *cum.last().unwrap();
            cumulative_simpson(&values, h, start, &mut cum);
            xs.extend((1..=seg.intervals).map(|i| {
                if i == seg.intervals {
                    seg.b
                } else {
                    seg.a + h * i as f64
                }
            }));
            let coarse: Vec<f64> = values.iter().step_by(2).copied().collect();
            coarse_total += simpson(&coarse, 2.0 * h);
        }
        let half_mass = *cum.last().unwrap();
        let quad_error = ((half_mass - coarse_total) / 15.0 / half_mass).abs();
        if quad_error > QUAD_TARGET {
            attempt += 1;
            if attempt > MAX_DOUBLINGS {
                return Err(CwError::Quadrature {
                    achieved: quad_error,
                    target: QUAD_TARGET,
                });
            }
            continue;
        }

        let log_norm = peak + (2.0 * half_mass).ln();
        let (t, cdf) = mirror_table(&xs, &cum, half_mass);
        return Ok(MixingDensity {
            beta,
            n_spins,
            log_norm,
            mode: mode_t,
            quad_error,
            t,
            cdf,
        });
    }
}

/// Symmetric full-line table from the half-line cumulative integral.
fn mirror_table(xs: &[f64], cum: &[f64], half_mass: f64) -> (Vec<f64>, Vec<f64>) {
    let total = 2.0 * half_mass;
    let mut t = Vec::with_capacity(2 * xs.len() + 1);
    let mut cdf = Vec::with_capacity(2 * xs.len() + 1);
    let mut push = |tv: f64, cv: f64| {
        match t.last() {
            // Nodes near ±1 collapse once tanh saturates; keep the later mass.
            Some(&prev) if tv <= prev => {
                *cdf.last_mut().unwrap() = cv;
            }
            _ => {
                t.push(tv);
                cdf.push(cv);
            }
        }
    };
    push(-1.0, 0.0);
    for (x, c) in xs.iter().zip(cum).rev() {
        if *x > 0.0 {
            push(-x.tanh(), 0.5 - c / total);
        }
    }
    push(0.0, 0.5);
    for (x, c) in xs.iter().zip(cum) {
        if *x > 0.0 {
            push(x.tanh(), 0.5 + c / total);
        }
    }
    push(1.0, 1.0);
    (t, cdf)
}

/// Bisection for the boundary of a predicate that is false at `lo` and true
/// at `hi`.
fn bisect(pred: impl Fn(f64) -> bool, mut lo: f64, mut hi: f64) -> f64 {
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if pred(mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    hi
}

/// One draw of the mixing variable by inverse-CDF sampling.
pub fn sample_mixing<R: Rng + ?Sized>(density: &MixingDensity, rng: &mut R) -> f64 {
    let u: f64 = rng.random();
    density.quantile(u)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cw::exact::log_partition;
    use crate::rng::rng_from_seed;

    #[test]
    fn log_density_examples() {
        for &n in &[1usize, 50, 10_000] {
            assert_eq!(mixing_log_density_unnormalized(0.9, n, 0.0).unwrap(), 0.0);
        }
        let a = mixing_log_density_unnormalized(0.7, 50, 0.3).unwrap();
        let b = mixing_log_density_unnormalized(0.7, 50, -0.3).unwrap();
        assert_eq!(a, b);
        assert!(mixing_log_density_unnormalized(0.7, 50, 1.0).is_err());
        assert!(mixing_log_density_unnormalized(0.7, 50, -1.5).is_err());
    }

    /// Grid argmax of the `t`-density on `(0, 1)`.
    fn argmax_t(beta: f64, n: usize) -> f64 {
        let mut best = (f64::NEG_INFINITY, 0.0);
        let steps = 200_000;
        for i in 1..steps {
            let t = i as f64 / steps as f64;
            let v = mixing_log_density_unnormalized(beta, n, t).unwrap();
            if v > best.0 {
                best = (v, t);
            }
        }
        best.1
    }

    #[test]
    fn density_peaks_at_magnetization() {
        let t = argmax_t(1.29727, 1_000_000);
        assert!((t - 0.75).abs() <= 1e-3, "{t}");
        let t = argmax_t(1.5, 1000);
        assert!((t - 0.858).abs() <= 1e-2, "{t}");
    }

    #[test]
    fn normalization_matches_partition_function() {
        // Z = sqrt(N/(2πβ)) 2^N ∫ exp(−N x²/(2β)) cosh(x)^N dx.
        for &(beta, n) in &[
            (0.5, 1usize),
            (0.5, 8),
            (1.0, 100),
            (1.5, 1000),
            (0.5, 160_000),
            (1.29727, 160_000),
            (1.5, 1_000_000),
            (6.0, 3),
        ] {
            let d = build_mixing_cdf(beta, n, DEFAULT_GRID_SIZE).unwrap();
            let nf = n as f64;
            let via_mixing = 0.5 * (nf / (2.0 * std::f64::consts::PI * beta)).ln()
                + nf * std::f64::consts::LN_2
                + d.log_norm();
            let exact = log_partition(beta, n).unwrap();
            assert!(
                (via_mixing - exact).abs() <= 1e-8 * exact.abs().max(1.0),
                "beta={beta} N={n}: {via_mixing} vs {exact}"
            );
        }
    }

    #[test]
    fn table_is_monotone_and_symmetric() {
        for &(beta, n) in &[(0.5, 10_000usize), (1.5, 1000), (1.0, 50), (3.0, 2)] {
            let d = build_mixing_cdf(beta, n, 512).unwrap();
            let table: Vec<(f64, f64)> = d.table().collect();
            assert_eq!(table[0], (-1.0, 0.0));
            assert_eq!(*table.last().unwrap(), (1.0, 1.0));
            for w in table.windows(2) {
                assert!(w[1].0 > w[0].0);
                assert!(w[1].1 >= w[0].1);
            }
            assert_eq!(d.cdf(0.0), 0.5);
            for &t in &[0.01, 0.2, 0.6, 0.9] {
                assert!((d.cdf(t) + d.cdf(-t) - 1.0).abs() <= 1e-12);
            }
            assert!(d.quadrature_error() <= QUAD_TARGET);
        }
    }

    #[test]
    fn bimodal_low_temperature_table() {
        let d = build_mixing_cdf(1.5, 1000, DEFAULT_GRID_SIZE).unwrap();
        let modes = d.modes();
        assert_eq!(modes.len(), 2);
        assert!((modes[1] - 0.858).abs() <= 1e-3);
        assert_eq!(modes[0], -modes[1]);
        // Nearly all the mass sits near the modes.
        let near = d.cdf(0.95) - d.cdf(0.75);
        assert!((near - 0.5).abs() <= 1e-3, "{near}");
    }

    #[test]
    fn second_moment_decays_like_one_over_n() {
        let e4 = build_mixing_cdf(0.5, 10_000, DEFAULT_GRID_SIZE)
            .unwrap()
            .expectation(|t| t * t);
        let e5 = build_mixing_cdf(0.5, 100_000, DEFAULT_GRID_SIZE)
            .unwrap()
            .expectation(|t| t * t);
        // Gaussian approximation: E[artanh(M)²] ≈ β/((1−β)N) = 1/N.
        assert!((e4 * 1e4 - 1.0).abs() <= 0.05, "{e4}");
        assert!((e5 * 1e5 - 1.0).abs() <= 0.05, "{e5}");
        assert!(e4 <= 10.0 * e5 * 10.0);
    }

    #[test]
    fn quantile_inverts_cdf() {
        let d = build_mixing_cdf(0.5, 10_000, 1024).unwrap();
        assert_eq!(d.quantile(0.5), 0.0);
        for &u in &[1e-6, 0.1, 0.37, 0.5, 0.81, 0.999_999] {
            assert!((d.cdf(d.quantile(u)) - u).abs() <= 1e-12);
        }
    }

    #[test]
    fn sampling_symmetry() {
        let d = build_mixing_cdf(0.5, 10_000, DEFAULT_GRID_SIZE).unwrap();
        let mut rng = rng_from_seed(3);
        let draws = 1_000_000;
        let mean: f64 = (0..draws).map(|_| sample_mixing(&d, &mut rng)).sum::<f64>() / draws as f64;
        assert!(mean.abs() <= 3e-3, "{mean}");

        let d = build_mixing_cdf(1.5, 1000, DEFAULT_GRID_SIZE).unwrap();
        let positive = (0..draws)
            .filter(|_| sample_mixing(&d, &mut rng) > 0.0)
            .count() as f64
            / draws as f64;
        assert!((positive - 0.5).abs() <= 2e-3, "{positive}");
    }

    #[test]
    fn rejects_bad_arguments() {
        assert!(build_mixing_cdf(0.5, 100, 255).is_err());
        assert!(build_mixing_cdf(0.0, 100, 4096).is_err());
        assert!(build_mixing_cdf(0.5, 0, 4096).is_err());
    }
}
