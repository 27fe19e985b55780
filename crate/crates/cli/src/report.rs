//! Consolidated summary of a run directory.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

#[derive(Debug, thiserror::Error)]
pub enum ReportError {
    #[error("{0}: no MANIFEST, not a run directory")]
    MissingManifest(String),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("malformed checks.csv line {0}")]
    Malformed(usize),
}

#[derive(Debug, Clone, PartialEq)]
pub struct CheckRow {
    pub check: String,
    pub pass: bool,
    /// Labels of violated measurements with `value (tol)`.
    pub violations: Vec<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunSummary {
    pub complete: bool,
    pub error: Option<String>,
    /// Failures first, then passes; each group in run order.
    pub rows: Vec<CheckRow>,
}

pub fn summarize(dir: &Path) -> Result<RunSummary, ReportError> {
    let manifest = dir.join("MANIFEST");
    if !manifest.is_file() {
        return Err(ReportError::MissingManifest(dir.display().to_string()));
    }
    let text = fs::read_to_string(manifest)?;
    let complete = text.lines().any(|l| l == "status=complete");
    let error = text.lines().find_map(|l| l.strip_prefix("error=")).map(str::to_string);
    let mut rows: Vec<CheckRow> = Vec::new();
    let csv = dir.join("checks.csv");
    if csv.is_file() {
        for (n, line) in fs::read_to_string(csv)?.lines().enumerate().skip(1) {
            let f: Vec<&str> = line.split(',').collect();
            if f.len() != 5 {
                return Err(ReportError::Malformed(n + 1));
            }
            let (check, label, value, tol, pass) = (f[0], f[1], f[2], f[3], f[4] == "true");
            let idx = match rows.iter().position(|r| r.check == check) {
                Some(i) => i,
                None => {
                    rows.push(CheckRow { check: check.to_string(), pass: true, violations: Vec::new() });
                    rows.len() - 1
                }
            };
            if label == "verdict" {
                rows[idx].pass = pass;
            } else if !pass {
                rows[idx].violations.push(format!("{label}={value} (tol {tol})"));
            }
        }
    }
    rows.sort_by_key(|r| r.pass);
    Ok(RunSummary { complete, error, rows })
}

pub fn render(s: &RunSummary) -> String {
    let mut out = String::new();
    if !s.complete {
        let _ = writeln!(out, "*** incomplete run ***");
        if let Some(e) = &s.error {
            let _ = writeln!(out, "error: {e}");
        }
    }
    let width = s.rows.iter().map(|r| r.check.len()).max().unwrap_or(5).max(5);
    let _ = writeln!(out, "{:width$}  verdict  violations", "check");
    for r in &s.rows {
        let _ = writeln!(out, "{:width$}  {:7}  {}", r.check, if r.pass { "pass" } else { "fail" }, r.violations.join("; "));
    }
    let fails = s.rows.iter().filter(|r| !r.pass).count();
    let _ = writeln!(out, "{} checks, {fails} failed", s.rows.len());
    out
}
