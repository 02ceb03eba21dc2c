//! Serializable records and the CSV/JSON writers. Non-finite numbers are
//! written as `null` in JSON and as `inf`/`nan` in CSV.

use std::fmt::Write as _;
use std::fs;
use std::io::{self, Write};

use engel::Covector;
use serde::Serialize;

use crate::args::{Format, OutputArgs};
use crate::Failure;

#[derive(Debug, Clone, Copy, Serialize)]
pub struct LambdaJson {
    pub theta: f64,
    pub c: f64,
    pub alpha: f64,
}

impl From<&Covector> for LambdaJson {
    fn from(l: &Covector) -> Self {
        LambdaJson { theta: l.theta, c: l.c, alpha: l.alpha }
    }
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct EllipticJson {
    pub phi: f64,
    pub k: f64,
    pub alpha: f64,
    pub sign: f64,
}

#[derive(Debug, Serialize)]
pub struct ClassifyReport {
    pub lambda: LambdaJson,
    pub stratum: String,
    pub energy: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub elliptic: Option<EllipticJson>,
}

#[derive(Debug, Serialize)]
pub struct MaxwellReport {
    pub lambda: LambdaJson,
    pub stratum: String,
    pub t_max1: f64,
    pub t_max2: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub k: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub p_z1: Option<f64>,
}

#[derive(Debug, Serialize)]
pub struct ConjugateReport {
    pub lambda: LambdaJson,
    pub stratum: String,
    pub t_max1: f64,
    pub t_max2: f64,
    pub conj_times: Vec<f64>,
    pub status: &'static str,
    pub method: &'static str,
    pub ceiling: f64,
    /// Brackets of same-sign near-zero minima, possible tangential zeros.
    pub flagged: Vec<(f64, f64)>,
    pub identically_degenerate: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub reason: Option<String>,
}

/// One certificate. `min_margin > 0` exactly when a margin check passes;
/// counting checks carry `violations` instead.
#[derive(Debug, Clone, Serialize)]
pub struct Check {
    pub suite: &'static str,
    pub name: String,
    pub size: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub min_margin: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub violations: Option<usize>,
    pub pass: bool,
}

impl Check {
    pub fn margin(suite: &'static str, name: impl Into<String>, size: usize, min_margin: f64) -> Check {
        Check {
            suite,
            name: name.into(),
            size,
            min_margin: Some(min_margin),
            violations: None,
            pass: min_margin > 0.0,
        }
    }

    pub fn count(suite: &'static str, name: impl Into<String>, size: usize, violations: usize) -> Check {
        Check {
            suite,
            name: name.into(),
            size,
            min_margin: None,
            violations: Some(violations),
            pass: violations == 0,
        }
    }
}

#[derive(Debug, Serialize)]
pub struct VerifyReport {
    pub suite: &'static str,
    pub seed: u64,
    pub records: Vec<Check>,
    pub status: &'static str,
}

#[derive(Debug, Serialize)]
pub struct XvalRowJson {
    pub t: f64,
    pub det: f64,
    pub rj1: f64,
    pub ratio: f64,
    pub used: bool,
}

#[derive(Debug, Serialize)]
pub struct XvalJson {
    pub lambda: LambdaJson,
    pub stratum: String,
    pub elliptic: EllipticJson,
    pub rows: Vec<XvalRowJson>,
    pub spread: f64,
    pub skipped: usize,
    /// Rows left out of the spread: sign undetermined, kernel error bound
    /// above 1e-3 of its value, or magnitude below 1e-6 of the largest.
    pub skipped_reason: &'static str,
    pub kernel_roots: Vec<f64>,
    pub det_roots: Vec<f64>,
    pub zero_sets_match: bool,
    pub status: &'static str,
}

/// A real number as a CSV field: 17 significant digits.
pub fn num(v: f64) -> String {
    if v.is_finite() {
        format!("{v:.16e}")
    } else if v.is_nan() {
        "nan".into()
    } else if v > 0.0 {
        "inf".into()
    } else {
        "-inf".into()
    }
}

/// CSV text from a header and rows of already formatted fields.
pub fn csv(header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> String {
    let mut s = header.join(",");
    s.push('\n');
    for r in rows {
        let _ = writeln!(s, "{}", r.join(","));
    }
    s
}

pub fn json<T: Serialize>(v: &T) -> Result<String, Failure> {
    let mut s = serde_json::to_string_pretty(v).map_err(|e| Failure::Io(e.to_string()))?;
    s.push('\n');
    Ok(s)
}

pub fn emit(output: &OutputArgs, text: &str) -> Result<(), Failure> {
    match &output.out {
        Some(path) => fs::write(path, text).map_err(|e| Failure::Io(format!("{}: {e}", path.display()))),
        None => {
            let mut out = io::stdout().lock();
            out.write_all(text.as_bytes())
                .and_then(|_| out.flush())
                .map_err(|e| Failure::Io(e.to_string()))
        }
    }
}

/// Renders with `json` or `csv` depending on the chosen format.
pub fn render<T: Serialize>(
    output: &OutputArgs,
    default: Format,
    value: &T,
    as_csv: impl FnOnce() -> String,
) -> Result<(), Failure> {
    let text = match output.format_or(default) {
        Format::Json => json(value)?,
        Format::Csv => as_csv(),
    };
    emit(output, &text)
}
