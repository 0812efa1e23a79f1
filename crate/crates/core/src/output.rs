//! Result files: CSV with a metadata preamble, or a structured JSON document.
//!
//! Files are written to a temporary file in the target directory and renamed
//! into place, so a failed run never leaves a partial file behind.

use std::fmt::Write as _;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::Serialize;
use thiserror::Error;

use crate::experiments::{ExperimentResult, Row, Table};
use crate::TOOL_VERSION;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum OutputFormat {
    #[default]
    Csv,
    Structured,
}

impl FromStr for OutputFormat {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "csv" => Ok(OutputFormat::Csv),
            "structured" | "json" => Ok(OutputFormat::Structured),
            other => Err(format!("unknown output format `{other}` (expected csv or structured)")),
        }
    }
}

#[derive(Debug, Error)]
pub enum OutputError {
    #[error("cannot write to {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
}

/// Formats like C's `%.9g`: nine significant digits, trailing zeros
/// trimmed, exponent form outside `1e-4 <= |v| < 1e9`.
pub fn format_number(v: f64) -> String {
    if v.is_nan() {
        return "nan".into();
    }
    if v.is_infinite() {
        return if v > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if v == 0.0 {
        return "0".into();
    }
    let sci = format!("{v:.8e}");
    let (mantissa, exp) = sci.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    if !(-4..9).contains(&exp) {
        let m = trim_zeros(mantissa);
        let sign = if exp < 0 { '-' } else { '+' };
        return format!("{m}e{sign}{:02}", exp.abs());
    }
    let decimals = (8 - exp).max(0) as usize;
    trim_zeros(&format!("{v:.decimals$}")).to_string()
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

fn preamble(result: &ExperimentResult) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "# tool={TOOL_VERSION}");
    let _ = writeln!(out, "# experiment={}", result.name);
    let _ = writeln!(out, "# seed={}", result.seed);
    let _ = writeln!(out, "# config_hash={}", result.config_hash);
    for (k, v) in &result.params {
        let _ = writeln!(out, "# param {k}={v}");
    }
    out
}

/// Main result as CSV: one row per metric.
pub fn to_csv(result: &ExperimentResult) -> String {
    let mut out = preamble(result);
    out.push_str("experiment,seed,label,metric,value,dispersion\n");
    for Row { label, metric, value, dispersion } in &result.rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{}",
            csv_field(&result.name),
            result.seed,
            csv_field(label),
            csv_field(metric),
            format_number(*value),
            dispersion.map(format_number).unwrap_or_default()
        );
    }
    out
}

/// A secondary table as CSV with the same preamble.
pub fn table_to_csv(result: &ExperimentResult, table: &Table) -> String {
    let mut out = preamble(result);
    let _ = writeln!(out, "# table={}", table.name);
    out.push_str(&table.columns.iter().map(|c| csv_field(c)).collect::<Vec<_>>().join(","));
    out.push('\n');
    for row in &table.rows {
        out.push_str(&row.iter().map(|v| format_number(*v)).collect::<Vec<_>>().join(","));
        out.push('\n');
    }
    out
}

#[derive(Serialize)]
struct Document<'a> {
    tool: &'a str,
    #[serde(flatten)]
    result: &'a ExperimentResult,
}

pub fn to_structured(result: &ExperimentResult) -> String {
    let mut s = serde_json::to_string_pretty(&Document { tool: TOOL_VERSION, result }).expect("serializable result");
    s.push('\n');
    s
}

/// File name stem shared by every file of one run.
pub fn file_stem(result: &ExperimentResult) -> String {
    format!("{}_{}", result.name, result.seed)
}

/// Renders every file for `result`: `(file name, contents)` pairs.
pub fn render(result: &ExperimentResult, format: OutputFormat) -> Vec<(String, String)> {
    let stem = file_stem(result);
    match format {
        OutputFormat::Csv => {
            let mut files = vec![(format!("{stem}.csv"), to_csv(result))];
            for t in &result.tables {
                files.push((format!("{stem}_{}.csv", t.name), table_to_csv(result, t)));
            }
            files
        }
        OutputFormat::Structured => vec![(format!("{stem}.json"), to_structured(result))],
    }
}

/// Writes `contents` to `path` through a temporary file in the same directory.
pub fn write_atomic(path: &Path, contents: &str) -> Result<(), OutputError> {
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
    let io = |source| OutputError::Io { path: path.to_path_buf(), source };
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(io)?;
    tmp.write_all(contents.as_bytes()).map_err(io)?;
    tmp.flush().map_err(io)?;
    tmp.persist(path).map_err(|e| io(e.error))?;
    Ok(())
}

/// Renders and writes all files into `dir`, creating it if needed. Every
/// file is rendered before the first one is written.
pub fn write_result(result: &ExperimentResult, dir: &Path, format: OutputFormat) -> Result<Vec<PathBuf>, OutputError> {
    let files = render(result, format);
    std::fs::create_dir_all(dir).map_err(|source| OutputError::Io { path: dir.to_path_buf(), source })?;
    files
        .into_iter()
        .map(|(name, contents)| {
            let path = dir.join(name);
            write_atomic(&path, &contents)?;
            Ok(path)
        })
        .collect()
}
