//! CSV and JSON emission for sweep results.
//!
//! CSV: comma separated, header row, `\n` line endings, shortest round-trip
//! decimal floats. An optional first line `# generated-at-unix=<secs>` is the
//! only run-dependent content.

use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::spectral::{InverseNormReport, SpectralReport};
use crate::walk::{RootPoint, WalkEstimate};
use crate::witness::WitnessReport;
use num_rational::BigRational;
use num_traits::ToPrimitive;
use serde::{Deserialize, Serialize};
use std::io::Write;
use std::time::{SystemTime, UNIX_EPOCH};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

pub fn timestamp_line() -> String {
    let secs = SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0);
    format!("# generated-at-unix={secs}\n")
}

pub fn to_csv<S: Serialize>(rows: &[S]) -> Result<String> {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(Vec::new());
    for r in rows {
        w.serialize(r).map_err(|e| Error::Io(e.into()))?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Io(e.into_error()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

pub fn to_json<S: Serialize>(rows: &[S]) -> Result<String> {
    let mut s = serde_json::to_string_pretty(rows).map_err(|e| Error::Io(e.into()))?;
    s.push('\n');
    Ok(s)
}

/// Renders rows in the requested format, prefixing CSV with a timestamp line
/// when asked.
pub fn render<S: Serialize>(rows: &[S], format: Format, timestamp: bool) -> Result<String> {
    match format {
        Format::Json => to_json(rows),
        Format::Csv => {
            let body = to_csv(rows)?;
            Ok(if timestamp { timestamp_line() + &body } else { body })
        }
    }
}

pub fn emit<W: Write>(mut out: W, text: &str) -> Result<()> {
    out.write_all(text.as_bytes())?;
    out.flush()?;
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WitnessRow {
    pub n: u32,
    pub sup_f: f64,
    pub sup_laplacian_f: f64,
    pub ratio: f64,
    pub bound_1_over_n: f64,
}

impl<T: Scalar> From<&WitnessReport<T>> for WitnessRow {
    fn from(r: &WitnessReport<T>) -> Self {
        WitnessRow {
            n: r.n,
            sup_f: r.sup_f.to_f64_lossy(),
            sup_laplacian_f: r.sup_laplacian_f.to_f64_lossy(),
            ratio: r.ratio.to_f64_lossy(),
            bound_1_over_n: r.bound.to_f64_lossy(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WalkRow {
    pub n: u32,
    pub p_2n_exact: String,
    pub p_2n: f64,
    pub root_estimate: f64,
    pub mc_estimate: Option<f64>,
    pub mc_stderr: Option<f64>,
    pub seed: u64,
}

impl WalkRow {
    pub fn new(point: &RootPoint, mc: Option<&WalkEstimate>, seed: u64) -> Self {
        WalkRow {
            n: point.n,
            p_2n_exact: point.p_2n_exact.clone(),
            p_2n: point.p_2n,
            root_estimate: point.root_estimate,
            mc_estimate: mc.map(|m| m.estimate),
            mc_stderr: mc.map(|m| m.stderr),
            seed,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GreensRow {
    pub n: u32,
    pub partial_sum_exact: String,
    pub partial_sum: f64,
}

impl GreensRow {
    pub fn new(n: u32, sum: &BigRational) -> Self {
        GreensRow {
            n,
            partial_sum_exact: sum.to_string(),
            partial_sum: sum.to_f64().unwrap_or(f64::NAN),
        }
    }
}

pub type SpectralRow = SpectralReport;
pub type InverseNormRow = InverseNormReport;
