//! On-disk artifacts: spin-matrix, spectrum, histogram and density-curve CSV
//! files, and the JSON run record.
//!
//! Reals are written with 17 significant digits so that every value reads
//! back bit-exactly.

use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use crate::cw::{apply_restandardization, CwParams, Restandardization, Sampler, SpinMatrix};
use crate::error::{CwError, Result};
use crate::rng::RNG_ALGORITHM;
use crate::spectra::{Histogram, Normalization, Spectrum};

pub const SCHEMA_VERSION: u32 = 1;

/// Provenance of a spin matrix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub schema: u32,
    pub beta: f64,
    pub p: usize,
    pub n: usize,
    pub seed: u64,
    pub sampler: Sampler,
    pub sweeps: Option<usize>,
    pub mixing_draw: Option<f64>,
    pub restandardized: bool,
    pub restandardization: Option<Restandardization>,
    pub rng: String,
}

impl RunRecord {
    pub fn from_matrix(x: &SpinMatrix) -> Self {
        let params = x.params();
        Self {
            schema: SCHEMA_VERSION,
            beta: params.beta(),
            p: params.p(),
            n: params.n(),
            seed: x.seed(),
            sampler: x.sampler(),
            sweeps: x.sweeps(),
            mixing_draw: x.mixing_draw(),
            restandardized: x.is_restandardized(),
            restandardization: x.restandardization(),
            rng: RNG_ALGORITHM.to_owned(),
        }
    }

    pub fn params(&self) -> Result<CwParams> {
        CwParams::new(self.beta, self.p, self.n)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let rec: RunRecord = serde_json::from_str(s)?;
        if rec.schema != SCHEMA_VERSION {
            return Err(CwError::input(format!(
                "unsupported run record schema {} (expected {SCHEMA_VERSION})",
                rec.schema
            )));
        }
        if rec.restandardized != rec.restandardization.is_some() {
            return Err(CwError::input(
                "run record restandardized flag disagrees with its restandardization",
            ));
        }
        Ok(rec)
    }
}

/// `x` with 17 significant digits.
pub fn format_real(x: f64) -> String {
    format!("{x:.16e}")
}

fn parse_real(field: &str) -> Result<f64> {
    field
        .trim()
        .parse::<f64>()
        .map_err(|e| CwError::input(format!("cannot parse '{field}' as a number: {e}")))
}

fn headerless_writer<W: Write>(w: W) -> csv::Writer<W> {
    csv::WriterBuilder::new().has_headers(false).from_writer(w)
}

fn headerless_reader<R: Read>(r: R) -> csv::Reader<R> {
    csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .from_reader(r)
}

/// `p` rows of `n` values; raw spins as `-1`/`1`.
pub fn write_spin_csv<W: Write>(x: &SpinMatrix, w: W) -> Result<()> {
    let mut out = headerless_writer(w);
    let raw = !x.is_restandardized();
    for i in 0..x.rows() {
        let row: Vec<String> = x
            .row(i)
            .iter()
            .map(|&v| {
                if raw {
                    format!("{}", v as i64)
                } else {
                    format_real(v)
                }
            })
            .collect();
        out.write_record(&row)?;
    }
    out.flush()?;
    Ok(())
}

/// Reads a spin CSV written by [`write_spin_csv`], using `record` for the
/// shape and provenance.
pub fn read_spin_csv<R: Read>(r: R, record: &RunRecord) -> Result<SpinMatrix> {
    let params = record.params()?;
    let mut values = Vec::with_capacity(params.total_spins());
    for (i, row) in headerless_reader(r).records().enumerate() {
        let row = row?;
        if row.len() != params.n() {
            return Err(CwError::input(format!(
                "row {i} has {} columns, expected {}",
                row.len(),
                params.n()
            )));
        }
        for field in row.iter() {
            values.push(parse_real(field)?);
        }
    }
    if values.len() != params.total_spins() {
        return Err(CwError::input(format!(
            "expected {} rows, got {}",
            params.p(),
            values.len() / params.n().max(1)
        )));
    }
    match record.restandardization {
        None => SpinMatrix::from_raw_spins(
            params,
            values,
            record.sampler,
            record.seed,
            record.mixing_draw,
            record.sweeps,
        ),
        Some(rs) => {
            let shift = rs.m * rs.sign as f64;
            let scale = (1.0 - rs.m * rs.m).sqrt();
            let mut spins = Vec::with_capacity(values.len());
            for (k, v) in values.iter().enumerate() {
                let y = v * scale + shift;
                let s = if y > 0.0 { 1.0 } else { -1.0 };
                if (y - s).abs() > 1e-9 {
                    return Err(CwError::input(format!(
                        "entry {k} = {v} is not a restandardized spin for m = {}",
                        rs.m
                    )));
                }
                spins.push(s);
            }
            let raw = SpinMatrix::from_raw_spins(
                params,
                spins,
                record.sampler,
                record.seed,
                record.mixing_draw,
                record.sweeps,
            )?;
            Ok(apply_restandardization(&raw, rs))
        }
    }
}

/// One eigenvalue per line, descending.
pub fn write_spectrum_csv<W: Write>(spec: &Spectrum, w: W) -> Result<()> {
    let mut out = headerless_writer(w);
    for &v in spec.eigenvalues() {
        out.write_record([format_real(v)])?;
    }
    out.flush()?;
    Ok(())
}

pub fn read_spectrum_csv<R: Read>(r: R, normalization: Normalization) -> Result<Spectrum> {
    let mut values = Vec::new();
    for row in headerless_reader(r).records() {
        let row = row?;
        match row.len() {
            1 => values.push(parse_real(&row[0])?),
            k => {
                return Err(CwError::input(format!(
                    "spectrum line has {k} fields, expected 1"
                )))
            }
        }
    }
    if values.iter().any(|v| !v.is_finite()) {
        return Err(CwError::input("spectrum contains non-finite values"));
    }
    Ok(Spectrum::from_eigenvalues(values, normalization))
}

/// Columns `bin_left, bin_right, count, density`.
pub fn write_histogram_csv<W: Write>(h: &Histogram, w: W) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(["bin_left", "bin_right", "count", "density"])?;
    for b in &h.bins {
        out.write_record([
            format_real(b.left),
            format_real(b.right),
            b.count.to_string(),
            format_real(b.density),
        ])?;
    }
    out.flush()?;
    Ok(())
}

/// Columns `x, f(x)`.
pub fn write_density_curve_csv<W: Write>(curve: &[(f64, f64)], w: W) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(["x", "f(x)"])?;
    for &(x, f) in curve {
        out.write_record([format_real(x), format_real(f)])?;
    }
    out.flush()?;
    Ok(())
}
