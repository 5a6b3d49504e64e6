//! CSV rows and JSON summaries.

use serde::Serialize;
use std::io::Write;
use std::path::{Path, PathBuf};

pub const CSV_HEADER: &str = "experiment_id,lambda,varpi,measured,predicted,ratio,truncation_error";

/// One line of the results table. Empty cells are written for `None`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResultRow {
    pub experiment_id: String,
    pub lambda: Option<f64>,
    pub varpi: Option<i64>,
    pub measured: f64,
    pub predicted: Option<f64>,
    pub ratio: Option<f64>,
    pub truncation_error: Option<f64>,
}

impl ResultRow {
    /// A row whose ratio is `measured/predicted` when `predicted ≠ 0`.
    pub fn new(id: &str, lambda: Option<f64>, varpi: Option<i64>, measured: f64, predicted: Option<f64>) -> Self {
        let ratio = predicted.filter(|&p| p != 0.0).map(|p| measured / p);
        Self {
            experiment_id: id.to_string(),
            lambda,
            varpi,
            measured,
            predicted,
            ratio,
            truncation_error: None,
        }
    }

    pub fn with_truncation(mut self, e: f64) -> Self {
        self.truncation_error = Some(e);
        self
    }

    pub fn to_csv(&self) -> String {
        let cell = |x: Option<f64>| x.map(fmt_num).unwrap_or_default();
        format!(
            "{},{},{},{},{},{},{}",
            self.experiment_id,
            cell(self.lambda),
            self.varpi.map(|v| v.to_string()).unwrap_or_default(),
            fmt_num(self.measured),
            cell(self.predicted),
            cell(self.ratio),
            cell(self.truncation_error)
        )
    }
}

/// Outcome of the `--check` thresholds.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub passed: bool,
    pub detail: String,
}

/// Rows plus metadata produced by one subcommand.
#[derive(Debug, Clone, Serialize)]
pub struct Report {
    pub experiment_id: String,
    pub subcommand: String,
    pub rows: Vec<ResultRow>,
    pub metadata: serde_json::Value,
    pub check: Check,
}

/// Shortest round-trip decimal, switching to exponent form outside
/// `[1e−4, 1e16)`.
pub fn fmt_num(x: f64) -> String {
    let a = x.abs();
    if a != 0.0 && a.is_finite() && !(1e-4..1e16).contains(&a) {
        format!("{x:e}")
    } else {
        x.to_string()
    }
}

pub fn csv_string(rows: &[ResultRow]) -> String {
    let mut s = String::from(CSV_HEADER);
    s.push('\n');
    for r in rows {
        s.push_str(&r.to_csv());
        s.push('\n');
    }
    s
}

/// Writes `<id>_<subcommand>.csv` and `.json` into `dir`.
pub fn write_report(dir: &Path, report: &Report) -> std::io::Result<(PathBuf, PathBuf)> {
    std::fs::create_dir_all(dir)?;
    let stem = format!("{}_{}", report.experiment_id, report.subcommand);
    let csv = dir.join(format!("{stem}.csv"));
    let json = dir.join(format!("{stem}.json"));
    std::fs::File::create(&csv)?.write_all(csv_string(&report.rows).as_bytes())?;
    let mut f = std::fs::File::create(&json)?;
    serde_json::to_writer_pretty(&mut f, report).map_err(std::io::Error::other)?;
    f.write_all(b"\n")?;
    Ok((csv, json))
}
