use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use cw_spectra::cw::{
    restandardize, sample_cw_matrix_metropolis, DeFinettiSampler, Sampler, SpinMatrix,
};
use cw_spectra::diagnostics::{
    correlation_rate_probe, delta_residual, ks_to_law, last_relative_change, matrix_bounds_check,
    BoundsReport, CorrelationRow, CorrelationScaling, DeltaEntry, DiagnosticsReport,
};
use cw_spectra::laws::SpectralLaw;
use cw_spectra::linalg::DenseMatrix;
use cw_spectra::record::{
    format_real, read_spin_csv, write_density_curve_csv, write_histogram_csv, write_spectrum_csv,
    write_spin_csv, RunRecord,
};
use cw_spectra::rng::derive_seed;
use cw_spectra::spectra::{
    histogram, rescale_lowtemp, rescale_null, sample_covariance, Normalization, Spectrum,
};

use crate::config::{ConfigEcho, Format, RunConfig};
use crate::error::CliError;
use crate::output::OutputDir;
use crate::svg;

/// Eigenvalues within this fraction of `|λ₁|` count as zero when the limit
/// law has an atom there.
pub const ZERO_TOL: f64 = 1e-9;

pub const DELTA_GRID: [(f64, f64); 5] =
    [(0.0, 1.0), (1.0, 1.0), (-1.0, 1.0), (0.0, 2.0), (2.0, 0.5)];
pub const BOUNDS_GRID: [(f64, f64); 3] = [(0.0, 1.0), (1.0, 1.0), (-2.0, 0.5)];
pub const CURVE_POINTS: usize = 512;

/// Draws the spin matrix for one replica, restandardized when requested.
fn draw(
    cfg: &RunConfig,
    definetti: Option<&DeFinettiSampler>,
    seed: u64,
) -> Result<SpinMatrix, CliError> {
    let x = match (cfg.sampler, definetti) {
        (Sampler::Metropolis, _) => sample_cw_matrix_metropolis(&cfg.params, cfg.sweeps, seed)?,
        (_, Some(s)) => s.sample(seed),
        (_, None) => DeFinettiSampler::new(&cfg.params)?.sample(seed),
    };
    if cfg.restandardize {
        let m = cfg
            .magnetization
            .as_ref()
            .expect("magnetization resolved with --restandardize");
        Ok(restandardize(&x, m)?)
    } else {
        Ok(x)
    }
}

fn definetti_for(cfg: &RunConfig) -> Result<Option<DeFinettiSampler>, CliError> {
    match cfg.sampler {
        Sampler::Definetti => Ok(Some(DeFinettiSampler::new(&cfg.params)?)),
        _ => Ok(None),
    }
}

fn replica_seed(cfg: &RunConfig, i: usize) -> u64 {
    if cfg.replicas == 1 {
        cfg.seed
    } else {
        derive_seed(cfg.seed, i as u64)
    }
}

/// The spectrum in the configured normalization, and the spectrum of the
/// covariance matrix on the Marchenko–Pastur scale (`V` or `V/(1 − m²)`).
struct Spectra {
    used: Spectrum,
    mp_scale: Spectrum,
}

fn spectra_of(cfg: &RunConfig, x: &SpinMatrix) -> Result<Spectra, CliError> {
    let v = sample_covariance(x);
    let base = match cfg.normalization {
        Normalization::Lowtemp | Normalization::LowtempNull => {
            let m = cfg
                .magnetization
                .as_ref()
                .expect("magnetization resolved for lowtemp");
            rescale_lowtemp(&v, m)?
        }
        _ => v,
    };
    let mp_scale = base.spectrum()?;
    let used = match cfg.normalization {
        Normalization::Null | Normalization::LowtempNull => rescale_null(&base)?.spectrum()?,
        _ => mp_scale.clone(),
    };
    Ok(Spectra { used, mp_scale })
}

/// Drops the top eigenvalues and, for a law with an atom at zero, snaps
/// numerically zero eigenvalues onto it.
fn comparable(spec: &Spectrum, law: &SpectralLaw, drop_top: usize) -> Spectrum {
    let kept = spec.drop_top(drop_top);
    if law.atom_mass() > 0.0 {
        kept.snap_near_zero(ZERO_TOL)
    } else {
        kept
    }
}

pub fn sample(cfg: &RunConfig) -> Result<(), CliError> {
    let out = OutputDir::create(&cfg.out_dir)?;
    let x = draw(cfg, definetti_for(cfg)?.as_ref(), cfg.seed)?;
    if cfg.wants(Format::Csv) {
        report_written(out.write_with("spins.csv", |b| write_spin_csv(&x, b))?);
    }
    if cfg.wants(Format::Json) {
        report_written(out.write_json("spins.json", &RunRecord::from_matrix(&x))?);
    }
    Ok(())
}

#[derive(Serialize)]
struct SpectrumReport<'a> {
    config: ConfigEcho,
    normalization: Normalization,
    len: usize,
    top_eigenvalue: Option<f64>,
    trace_residual: f64,
    metadata: &'a RunRecord,
}

pub fn spectrum(cfg: &RunConfig, record: Option<(RunRecord, SpinMatrix)>) -> Result<(), CliError> {
    let (record, x) = match record {
        Some(loaded) => loaded,
        None => {
            let x = draw(cfg, definetti_for(cfg)?.as_ref(), cfg.seed)?;
            (RunRecord::from_matrix(&x), x)
        }
    };
    let out = OutputDir::create(&cfg.out_dir)?;
    let spec = spectra_of(cfg, &x)?.used;
    if cfg.wants(Format::Csv) {
        report_written(out.write_with("eigenvalues.csv", |b| write_spectrum_csv(&spec, b))?);
    }
    if cfg.wants(Format::Json) {
        let report = SpectrumReport {
            config: cfg.echo(),
            normalization: spec.normalization(),
            len: spec.len(),
            top_eigenvalue: spec.top(),
            trace_residual: spec.residual(),
            metadata: &record,
        };
        report_written(out.write_json("spectrum.json", &report)?);
    }
    Ok(())
}

/// Reads a spin CSV and the run record stored beside it.
pub fn load_spins(path: &Path) -> Result<(RunRecord, SpinMatrix), CliError> {
    let sidecar = path.with_extension("json");
    let text = fs::read_to_string(&sidecar).map_err(|e| CliError::io(&sidecar, e))?;
    let record = RunRecord::from_json(&text)?;
    let file = fs::File::open(path).map_err(|e| CliError::io(path, e))?;
    let x = read_spin_csv(std::io::BufReader::new(file), &record)?;
    Ok((record, x))
}

#[derive(Debug, Clone, Serialize)]
struct ReplicaSummary {
    index: usize,
    seed: u64,
    ks: f64,
    top_eigenvalue: Option<f64>,
    zero_eigenvalues: usize,
}

struct ReplicaRun {
    summary: ReplicaSummary,
    record: RunRecord,
    spectrum: Spectrum,
    delta: Vec<DeltaEntry>,
}

#[derive(Serialize)]
struct CompareReport {
    config: ConfigEcho,
    #[serde(flatten)]
    diagnostics: DiagnosticsReport,
    drop_top: usize,
    ks_median: f64,
    replicas: Vec<ReplicaSummary>,
}

fn median(values: &mut [f64]) -> f64 {
    values.sort_by(f64::total_cmp);
    let k = values.len();
    if k % 2 == 1 {
        values[k / 2]
    } else {
        0.5 * (values[k / 2 - 1] + values[k / 2])
    }
}

fn run_replica(
    cfg: &RunConfig,
    definetti: Option<&DeFinettiSampler>,
    index: usize,
) -> Result<ReplicaRun, CliError> {
    let seed = replica_seed(cfg, index);
    let x = draw(cfg, definetti, seed)?;
    let Spectra { used, mp_scale } = spectra_of(cfg, &x)?;
    let ks = ks_to_law(&comparable(&used, &cfg.law, cfg.drop_top), &cfg.law);
    let (p, n) = (cfg.params.p(), cfg.params.n());
    let delta = DELTA_GRID
        .iter()
        .map(|&(re, im)| {
            delta_residual(&mp_scale, p, n, Complex64::new(re, im)).map(|d| DeltaEntry::from(&d))
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(ReplicaRun {
        summary: ReplicaSummary {
            index,
            seed,
            ks,
            top_eigenvalue: used.top(),
            zero_eigenvalues: used.count_near_zero(ZERO_TOL),
        },
        record: RunRecord::from_matrix(&x),
        spectrum: used,
        delta,
    })
}

pub fn compare(cfg: &RunConfig) -> Result<(), CliError> {
    let out = OutputDir::create(&cfg.out_dir)?;
    let definetti = definetti_for(cfg)?;
    let runs = (0..cfg.replicas)
        .into_par_iter()
        .map(|i| run_replica(cfg, definetti.as_ref(), i))
        .collect::<Result<Vec<_>, _>>()?;

    if cfg.wants(Format::Csv) {
        report_written(out.write_with("eigenvalues.csv", |b| {
            write_spectrum_csv(&runs[0].spectrum, b)
        })?);
        if runs.len() > 1 {
            for run in &runs {
                let dir = out.subdir(&format!("replica-{}", run.summary.index))?;
                report_written(
                    dir.write_with("eigenvalues.csv", |b| write_spectrum_csv(&run.spectrum, b))?,
                );
            }
        }
    }

    let mut ks: Vec<f64> = runs.iter().map(|r| r.summary.ks).collect();
    let ks_median = median(&mut ks);
    let first = &runs[0];
    let diagnostics = DiagnosticsReport {
        ks: Some(first.summary.ks),
        law: Some(cfg.law),
        atom_mass: Some(cfg.law.atom_mass()),
        zero_eigenvalues: Some(first.summary.zero_eigenvalues),
        top_eigenvalue: first.summary.top_eigenvalue,
        delta: first.delta.clone(),
        metadata: Some(first.record.clone()),
        ..DiagnosticsReport::empty()
    };
    if cfg.wants(Format::Json) {
        let report = CompareReport {
            config: cfg.echo(),
            diagnostics,
            drop_top: cfg.drop_top,
            ks_median,
            replicas: runs.iter().map(|r| r.summary.clone()).collect(),
        };
        report_written(out.write_json("report.json", &report)?);
    }
    println!(
        "ks = {:.6} (median over {} replica(s): {:.6})",
        first.summary.ks,
        runs.len(),
        ks_median
    );
    Ok(())
}

#[derive(Serialize)]
struct CorrelationReport {
    beta: f64,
    scaling: CorrelationScaling,
    rows: Vec<CorrelationRow>,
    last_relative_change: Option<f64>,
}

pub fn correlations(cfg: &RunConfig) -> Result<(), CliError> {
    let out = OutputDir::create(&cfg.out_dir)?;
    let beta = cfg.params.beta();
    let rows = correlation_rate_probe(beta, &cfg.sizes)?;
    if cfg.wants(Format::Csv) {
        let mut text = String::from("N,raw,scaled\n");
        for r in &rows {
            let _ = writeln!(
                text,
                "{},{},{}",
                r.total_spins,
                format_real(r.raw),
                format_real(r.scaled)
            );
        }
        report_written(out.write_bytes("correlations.csv", text.as_bytes())?);
    }
    let report = CorrelationReport {
        beta,
        scaling: CorrelationScaling::for_beta(beta),
        last_relative_change: last_relative_change(&rows),
        rows,
    };
    if cfg.wants(Format::Json) {
        report_written(out.write_json("report.json", &report)?);
    }
    Ok(())
}

#[derive(Serialize)]
struct BoundsSummary<'a> {
    config: ConfigEcho,
    ok: bool,
    reports: &'a [BoundsReport],
    metadata: RunRecord,
}

pub fn bounds(cfg: &RunConfig) -> Result<(), CliError> {
    let out = OutputDir::create(&cfg.out_dir)?;
    let x = draw(cfg, definetti_for(cfg)?.as_ref(), cfg.seed)?;
    let dense = DenseMatrix::from_row_major(x.rows(), x.cols(), x.entries().to_vec())?;
    let entry_bound = x.max_abs();
    let reports = BOUNDS_GRID
        .iter()
        .map(|&(re, im)| matrix_bounds_check(&dense, Complex64::new(re, im), entry_bound))
        .collect::<Result<Vec<_>, _>>()?;
    let ok = reports.iter().all(|r| r.ok);
    if cfg.wants(Format::Csv) {
        let mut text = String::from("z_re,z_im,bound,lhs,rhs,margin,holds\n");
        for r in &reports {
            for b in &r.bounds {
                let _ = writeln!(
                    text,
                    "{},{},{},{},{},{},{}",
                    format_real(r.z[0]),
                    format_real(r.z[1]),
                    b.name,
                    format_real(b.lhs),
                    format_real(b.rhs),
                    format_real(b.margin),
                    b.holds()
                );
            }
        }
        report_written(out.write_bytes("bounds.csv", text.as_bytes())?);
    }
    if cfg.wants(Format::Json) {
        let summary = BoundsSummary {
            config: cfg.echo(),
            ok,
            reports: &reports,
            metadata: RunRecord::from_matrix(&x),
        };
        report_written(out.write_json("report.json", &summary)?);
    }
    println!("bounds {}", if ok { "hold" } else { "VIOLATED" });
    Ok(())
}

#[derive(Serialize)]
struct FigureReport {
    config: ConfigEcho,
    law: SpectralLaw,
    ks: f64,
    top_eigenvalue: Option<f64>,
    seed: u64,
    dropped: usize,
    range: (f64, f64),
}

pub fn figure(cfg: &RunConfig) -> Result<(), CliError> {
    let out = OutputDir::create(&cfg.out_dir)?;
    let x = draw(cfg, definetti_for(cfg)?.as_ref(), cfg.seed)?;
    let spec = spectra_of(cfg, &x)?.used;
    let kept = comparable(&spec, &cfg.law, cfg.drop_top);
    if kept.is_empty() {
        return Err(CliError::Config(format!(
            "--drop-top {} leaves no eigenvalues out of {}",
            cfg.drop_top,
            spec.len()
        )));
    }
    let ks = ks_to_law(&kept, &cfg.law);
    let (a, b) = cfg.law.support();
    let values = kept.eigenvalues();
    let lo = a.min(values[values.len() - 1]);
    let hi = b.max(values[0]);
    let hist = histogram(&kept, cfg.bins, Some((lo, hi)), 0)?;
    let curve = cfg.law.density_curve(lo, hi, CURVE_POINTS);

    if cfg.wants(Format::Csv) {
        report_written(out.write_with("eigenvalues.csv", |w| write_spectrum_csv(&spec, w))?);
        report_written(out.write_with("histogram.csv", |w| write_histogram_csv(&hist, w))?);
        report_written(
            out.write_with("density_curve.csv", |w| write_density_curve_csv(&curve, w))?,
        );
    }
    if cfg.wants(Format::Json) {
        let report = FigureReport {
            config: cfg.echo(),
            law: cfg.law,
            ks,
            top_eigenvalue: spec.top(),
            seed: cfg.seed,
            dropped: cfg.drop_top,
            range: (lo, hi),
        };
        report_written(out.write_json("report.json", &report)?);
    }
    if cfg.wants(Format::Svg) {
        let title = format!(
            "beta = {}, p = {}, n = {}, {} vs {}",
            cfg.params.beta(),
            cfg.params.p(),
            cfg.params.n(),
            cfg.normalization,
            law_name(&cfg.law)
        );
        report_written(
            out.write_bytes("figure.svg", svg::render(&hist, &curve, &title).as_bytes())?,
        );
    }
    Ok(())
}

fn law_name(law: &SpectralLaw) -> String {
    match law {
        SpectralLaw::MarchenkoPastur { ratio } => format!("Marchenko-Pastur (y = {ratio})"),
        SpectralLaw::Semicircle => "semicircle".to_owned(),
    }
}

fn report_written(path: std::path::PathBuf) {
    println!("wrote {}", path.display());
}
