//! Pass/fail records produced by every check in the crate.

use std::fmt;

/// One measured quantity of a check.
#[derive(Debug, Clone, PartialEq)]
pub struct Measurement {
    pub label: String,
    pub value: f64,
    /// Upper bound the value is checked against; `None` for informational entries.
    pub tolerance: Option<f64>,
}

impl Measurement {
    /// `true` when the value respects its tolerance (informational entries always do).
    pub fn within(&self) -> bool {
        match self.tolerance {
            Some(tol) => self.value <= tol,
            None => true,
        }
    }
}

/// Structured result of an invariant check.
///
/// Measurements with a tolerance are read as `value <= tolerance`. A check
/// whose pass condition is not of that form (a lower bound, a disjunction)
/// records the relevant quantities as informational entries and sets `pass`
/// directly.
#[derive(Debug, Clone, PartialEq)]
pub struct Report {
    pub name: String,
    pub pass: bool,
    pub measurements: Vec<Measurement>,
    pub notes: String,
}

impl Report {
    pub fn new(name: impl Into<String>) -> Self {
        Self { name: name.into(), pass: true, measurements: Vec::new(), notes: String::new() }
    }

    /// Adds a bounded measurement; a violated bound fails the report.
    pub fn check(&mut self, label: impl Into<String>, value: f64, tolerance: f64) -> bool {
        let m = Measurement { label: label.into(), value, tolerance: Some(tolerance) };
        let ok = m.within();
        self.pass &= ok;
        self.measurements.push(m);
        ok
    }

    /// Adds an informational measurement.
    pub fn record(&mut self, label: impl Into<String>, value: f64) {
        self.measurements.push(Measurement { label: label.into(), value, tolerance: None });
    }

    pub fn fail(&mut self) {
        self.pass = false;
    }

    pub fn note(&mut self, text: impl AsRef<str>) {
        if !self.notes.is_empty() {
            self.notes.push_str("; ");
        }
        self.notes.push_str(text.as_ref());
    }

    pub fn value(&self, label: &str) -> Option<f64> {
        self.measurements.iter().find(|m| m.label == label).map(|m| m.value)
    }

    /// Rows of the `check,label,value,tolerance,pass` CSV schema (no header).
    pub fn csv_rows(&self) -> Vec<String> {
        let mut rows: Vec<String> = self
            .measurements
            .iter()
            .map(|m| {
                let tol = m.tolerance.map(|t| t.to_string()).unwrap_or_default();
                format!("{},{},{},{},{}", self.name, m.label, m.value, tol, m.within())
            })
            .collect();
        rows.push(format!("{},verdict,{},,{}", self.name, u8::from(self.pass), self.pass));
        rows
    }
}

pub const REPORT_CSV_HEADER: &str = "check,label,value,tolerance,pass";

impl fmt::Display for Report {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "{}: {}", self.name, if self.pass { "pass" } else { "fail" })?;
        for m in &self.measurements {
            match m.tolerance {
                Some(t) => writeln!(f, "  {} = {:.6e} (tol {:.6e}){}", m.label, m.value, t, if m.within() { "" } else { "  VIOLATED" })?,
                None => writeln!(f, "  {} = {:.6e}", m.label, m.value)?,
            }
        }
        if !self.notes.is_empty() {
            writeln!(f, "  notes: {}", self.notes)?;
        }
        Ok(())
    }
}
