//! Curie–Weiss random spin matrices and the spectra of their sample
//! covariance matrices.
//!
//! * [`cw`]: exact Curie–Weiss law, mixing representation and samplers.
//! * [`spectra`]: sample covariance, rescalings, dense symmetric eigensolver,
//!   empirical spectral distributions and histograms.
//! * [`laws`]: Marchenko–Pastur and semicircle limit laws.
//! * [`diagnostics`]: KS distance, Stieltjes-transform identities and
//!   finite-size residuals, resolvent bounds, correlation-rate probes.
//! * [`record`]: CSV/JSON artifacts.

pub mod cw;
pub mod diagnostics;
pub mod error;
pub mod laws;
pub mod linalg;
pub mod quadrature;
pub mod record;
pub mod rng;
pub mod spectra;

pub use error::{CwError, Result};
