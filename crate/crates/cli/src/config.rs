//! Command-line arguments and their resolution into a run configuration.

use std::collections::BTreeSet;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use cw_spectra::cw::{solve_magnetization, CwParams, Magnetization, Sampler};
use cw_spectra::laws::SpectralLaw;
use cw_spectra::spectra::Normalization;

use crate::error::CliError;

/// Below this `p/n`, `--law auto` picks the semicircle regime.
pub const SEMICIRCLE_RATIO: f64 = 0.05;

#[derive(Debug, Parser)]
#[command(
    name = "cw-spectra",
    version,
    about = "Curie-Weiss spin matrices and their covariance spectra"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Draw a spin matrix and write it with its run record.
    Sample(RunArgs),
    /// Eigenvalues of the (rescaled) sample covariance matrix.
    Spectrum(RunArgs),
    /// KS distance to the limit law and the self-consistent residual grid.
    Compare(RunArgs),
    /// Exact pair correlations with regime scaling.
    Correlations(RunArgs),
    /// Resolvent matrix bounds on a sampled matrix.
    Bounds(RunArgs),
    /// Histogram, limit density and SVG plot of one spectrum.
    Figure(RunArgs),
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Sample(_) => "sample",
            Command::Spectrum(_) => "spectrum",
            Command::Compare(_) => "compare",
            Command::Correlations(_) => "correlations",
            Command::Bounds(_) => "bounds",
            Command::Figure(_) => "figure",
        }
    }

    pub fn args(&self) -> &RunArgs {
        match self {
            Command::Sample(a)
            | Command::Spectrum(a)
            | Command::Compare(a)
            | Command::Correlations(a)
            | Command::Bounds(a)
            | Command::Figure(a) => a,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SamplerChoice {
    Definetti,
    Metropolis,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum LawChoice {
    Auto,
    Mp,
    Semicircle,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum RescaleChoice {
    Auto,
    None,
    Null,
    Lowtemp,
    LowtempNull,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, ValueEnum)]
pub enum Format {
    Csv,
    Json,
    Svg,
}

#[derive(Debug, Clone, Args)]
pub struct RunArgs {
    /// Inverse temperature.
    #[arg(long, default_value_t = 0.5)]
    pub beta: f64,
    /// Rows (covariates).
    #[arg(long, default_value_t = 200)]
    pub p: usize,
    /// Columns (sample size).
    #[arg(long, default_value_t = 800)]
    pub n: usize,
    #[arg(long, value_enum, default_value_t = SamplerChoice::Definetti)]
    pub sampler: SamplerChoice,
    /// Metropolis sweeps (N proposed flips each).
    #[arg(long, default_value_t = 100)]
    pub sweeps: usize,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    #[arg(long, default_value_t = 50)]
    pub bins: usize,
    /// Largest eigenvalues to exclude from histograms and KS.
    #[arg(long = "drop-top", default_value_t = 0)]
    pub drop_top: usize,
    #[arg(long, value_enum, default_value_t = LawChoice::Auto)]
    pub law: LawChoice,
    #[arg(long, value_enum, default_value_t = RescaleChoice::Auto)]
    pub rescale: RescaleChoice,
    /// Output directory.
    #[arg(long, default_value = "out")]
    pub out: PathBuf,
    /// Artifact formats to write (repeatable); all by default.
    #[arg(long, value_enum)]
    pub format: Vec<Format>,
    /// Independent replicas for `compare`, seeded from `--seed`.
    #[arg(long, default_value_t = 1)]
    pub replicas: usize,
    /// Spin CSV for `spectrum`; its run record is read from the `.json`
    /// file with the same stem.
    #[arg(long)]
    pub input: Option<PathBuf>,
    /// Spin counts `N` for `correlations`.
    #[arg(long, value_delimiter = ',', default_values_t = [256usize, 512, 1024, 2048, 4096])]
    pub sizes: Vec<usize>,
    /// Write or use restandardized spins (`β > 1` only).
    #[arg(long)]
    pub restandardize: bool,
}

/// Resolved settings shared by all commands.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub params: CwParams,
    pub sampler: Sampler,
    pub sweeps: usize,
    pub seed: u64,
    pub bins: usize,
    pub drop_top: usize,
    pub law: SpectralLaw,
    pub normalization: Normalization,
    pub magnetization: Option<Magnetization>,
    pub out_dir: PathBuf,
    pub formats: BTreeSet<Format>,
    pub replicas: usize,
    pub sizes: Vec<usize>,
    pub restandardize: bool,
}

/// The configuration echoed into JSON reports.
#[derive(Debug, Clone, Serialize)]
pub struct ConfigEcho {
    pub beta: f64,
    pub p: usize,
    pub n: usize,
    pub sampler: Sampler,
    pub sweeps: Option<usize>,
    pub seed: u64,
    pub bins: usize,
    pub drop_top: usize,
    pub law: SpectralLaw,
    pub rescale: Normalization,
    pub magnetization: Option<f64>,
    pub replicas: usize,
}

impl RunConfig {
    pub fn from_args(args: &RunArgs) -> Result<Self, CliError> {
        Self::build(args, args.beta, args.p, args.n, args.restandardize)
    }

    /// Uses `beta`, `p`, `n` from a stored run instead of the flags.
    pub fn with_shape(
        args: &RunArgs,
        beta: f64,
        p: usize,
        n: usize,
        restandardized: bool,
    ) -> Result<Self, CliError> {
        Self::build(args, beta, p, n, restandardized)
    }

    fn build(
        args: &RunArgs,
        beta: f64,
        p: usize,
        n: usize,
        restandardized: bool,
    ) -> Result<Self, CliError> {
        let params = CwParams::new(beta, p, n).map_err(|e| CliError::Config(e.to_string()))?;
        if args.bins == 0 {
            return Err(CliError::Config("--bins must be at least 1".into()));
        }
        if args.replicas == 0 {
            return Err(CliError::Config("--replicas must be at least 1".into()));
        }
        if args.sampler == SamplerChoice::Metropolis && args.sweeps == 0 {
            return Err(CliError::Config("--sweeps must be at least 1".into()));
        }
        if args.restandardize && beta <= 1.0 {
            return Err(CliError::Config(format!(
                "--restandardize needs beta > 1, got {beta}"
            )));
        }
        let (normalization, law) =
            resolve_regime(beta, p, n, args.law, args.rescale, restandardized)?;
        let needs_m = matches!(
            normalization,
            Normalization::Lowtemp | Normalization::LowtempNull
        ) || args.restandardize;
        let magnetization = if needs_m {
            Some(solve_magnetization(beta).map_err(|e| CliError::Config(e.to_string()))?)
        } else {
            None
        };
        let formats = if args.format.is_empty() {
            [Format::Csv, Format::Json, Format::Svg]
                .into_iter()
                .collect()
        } else {
            args.format.iter().copied().collect()
        };
        Ok(Self {
            params,
            sampler: match args.sampler {
                SamplerChoice::Definetti => Sampler::Definetti,
                SamplerChoice::Metropolis => Sampler::Metropolis,
            },
            sweeps: args.sweeps,
            seed: args.seed,
            bins: args.bins,
            drop_top: args.drop_top,
            law,
            normalization,
            magnetization,
            out_dir: args.out.clone(),
            formats,
            replicas: args.replicas,
            sizes: args.sizes.clone(),
            restandardize: args.restandardize,
        })
    }

    pub fn wants(&self, f: Format) -> bool {
        self.formats.contains(&f)
    }

    pub fn echo(&self) -> ConfigEcho {
        ConfigEcho {
            beta: self.params.beta(),
            p: self.params.p(),
            n: self.params.n(),
            sampler: self.sampler,
            sweeps: (self.sampler == Sampler::Metropolis).then_some(self.sweeps),
            seed: self.seed,
            bins: self.bins,
            drop_top: self.drop_top,
            law: self.law,
            rescale: self.normalization,
            magnetization: self.magnetization.map(|m| m.value()),
            replicas: self.replicas,
        }
    }
}

/// Picks the rescaling and the reference law.
///
/// `auto` rescaling follows the regime: `β ≤ 1` uses `V` (MP) or
/// `√(n/p)(V − I)` (semicircle), `β > 1` the same after dividing by
/// `1 − m²`. An `auto` law follows the rescaling, or `p/n` when both are
/// `auto`. Input that is already restandardized is never divided by `1 − m²`.
pub fn resolve_regime(
    beta: f64,
    p: usize,
    n: usize,
    law: LawChoice,
    rescale: RescaleChoice,
    restandardized: bool,
) -> Result<(Normalization, SpectralLaw), CliError> {
    let low_temp = beta > 1.0 && !restandardized;
    let ratio = p as f64 / n as f64;
    let mp = || SpectralLaw::marchenko_pastur(ratio).map_err(|e| CliError::Config(e.to_string()));
    let normalization = match rescale {
        RescaleChoice::Auto => {
            let semicircle = match law {
                LawChoice::Mp => false,
                LawChoice::Semicircle => true,
                LawChoice::Auto => ratio < SEMICIRCLE_RATIO,
            };
            match (semicircle, low_temp) {
                (false, false) => Normalization::Raw,
                (true, false) => Normalization::Null,
                (false, true) => Normalization::Lowtemp,
                (true, true) => Normalization::LowtempNull,
            }
        }
        RescaleChoice::None => Normalization::Raw,
        RescaleChoice::Null => Normalization::Null,
        RescaleChoice::Lowtemp => Normalization::Lowtemp,
        RescaleChoice::LowtempNull => Normalization::LowtempNull,
    };
    if matches!(
        normalization,
        Normalization::Lowtemp | Normalization::LowtempNull
    ) {
        if beta <= 1.0 {
            return Err(CliError::Config(format!(
                "{normalization} rescaling needs beta > 1, got {beta}"
            )));
        }
        if restandardized {
            return Err(CliError::Config(format!(
                "input is already restandardized; {normalization} rescaling does not apply"
            )));
        }
    }
    let law = match law {
        LawChoice::Mp => mp()?,
        LawChoice::Semicircle => SpectralLaw::Semicircle,
        LawChoice::Auto => match normalization {
            Normalization::Null | Normalization::LowtempNull => SpectralLaw::Semicircle,
            _ => mp()?,
        },
    };
    Ok((normalization, law))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn regime_resolution() {
        let r = |beta, p, n, law, rescale| resolve_regime(beta, p, n, law, rescale, false);
        let (norm, law) = r(0.5, 200, 800, LawChoice::Auto, RescaleChoice::Auto).unwrap();
        assert_eq!(norm, Normalization::Raw);
        assert_eq!(law, SpectralLaw::MarchenkoPastur { ratio: 0.25 });
        let (norm, law) = r(0.5, 100, 10_000, LawChoice::Auto, RescaleChoice::Auto).unwrap();
        assert_eq!((norm, law), (Normalization::Null, SpectralLaw::Semicircle));
        let (norm, _) = r(1.5, 200, 800, LawChoice::Auto, RescaleChoice::Auto).unwrap();
        assert_eq!(norm, Normalization::Lowtemp);
        let (norm, law) = r(1.5, 200, 800, LawChoice::Semicircle, RescaleChoice::Auto).unwrap();
        assert_eq!(
            (norm, law),
            (Normalization::LowtempNull, SpectralLaw::Semicircle)
        );
        let (norm, law) = r(0.5, 200, 800, LawChoice::Auto, RescaleChoice::Null).unwrap();
        assert_eq!((norm, law), (Normalization::Null, SpectralLaw::Semicircle));
        assert!(r(0.5, 200, 800, LawChoice::Auto, RescaleChoice::Lowtemp).is_err());
        assert!(resolve_regime(1.5, 2, 2, LawChoice::Auto, RescaleChoice::Lowtemp, true).is_err());
        let (norm, _) =
            resolve_regime(1.5, 2, 2, LawChoice::Auto, RescaleChoice::Auto, true).unwrap();
        assert_eq!(norm, Normalization::Raw);
    }
}
