//! Structured experiment results with CSV and JSON serialization.
//!
//! One report carries a config echo, a rectangular table of per-metric rows
//! (stable column order), the audit verdicts, and wall-clock time. CSV is
//! the primary output; JSON mirrors it with a schema version so downstream
//! tooling can detect layout changes.

use std::io::Write;
use std::time::Duration;

use serde::{Deserialize, Serialize};

use crate::error::Result;

pub const REPORT_SCHEMA_VERSION: &str = "1";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    Csv,
    Json,
}

/// One audited bound: how many instances were checked and how many failed.
/// A passing run has every `violations` count at zero.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AuditVerdict {
    pub bound: String,
    pub checked: usize,
    pub violations: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub first_violation: Option<String>,
}

/// Tabular experiment output.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub schema_version: String,
    /// Echo of the fully-resolved configuration that produced the run.
    pub config: String,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<String>>,
    pub audits: Vec<AuditVerdict>,
    pub wall_clock_secs: f64,
}

impl ExperimentReport {
    pub fn new(config: impl Into<String>, columns: &[&str]) -> Self {
        ExperimentReport {
            schema_version: REPORT_SCHEMA_VERSION.to_owned(),
            config: config.into(),
            columns: columns.iter().map(|s| (*s).to_owned()).collect(),
            rows: Vec::new(),
            audits: Vec::new(),
            wall_clock_secs: 0.0,
        }
    }

    pub fn push_row(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.columns.len(), "row width mismatch");
        self.rows.push(row);
    }

    pub fn set_wall_clock(&mut self, elapsed: Duration) {
        self.wall_clock_secs = elapsed.as_secs_f64();
    }

    pub fn violations(&self) -> usize {
        self.audits.iter().map(|a| a.violations).sum()
    }

    /// CSV with a header row; audit verdicts are appended as comment lines
    /// so the table itself stays rectangular.
    pub fn to_csv(&self) -> Result<String> {
        let mut writer = csv::Writer::from_writer(Vec::new());
        writer.write_record(&self.columns)?;
        for row in &self.rows {
            writer.write_record(row)?;
        }
        let mut bytes = writer.into_inner().map_err(|e| e.into_error())?;
        for audit in &self.audits {
            let line = format!(
                "# audit: {} checked={} violations={}\n",
                audit.bound, audit.checked, audit.violations
            );
            bytes.extend_from_slice(line.as_bytes());
        }
        Ok(String::from_utf8(bytes).expect("csv output is utf8"))
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn emit(&self, format: OutputFormat, mut sink: impl Write) -> Result<()> {
        let text = match format {
            OutputFormat::Csv => self.to_csv()?,
            OutputFormat::Json => self.to_json()?,
        };
        sink.write_all(text.as_bytes())?;
        Ok(())
    }
}
