//! Versioned run reports: JSON (nested, reloadable) and CSV (one verdict per
//! row), written atomically via a temp file in the target directory followed
//! by a rename.
//!
//! Every report embeds the full set of inputs that produced it (seed,
//! quadrature orders, tolerances, command-line parameters) so a run can be
//! reproduced bit for bit from the report alone.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::io::Write as _;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{OuError, Result};
use crate::inequalities::Verdict;

/// Schema version embedded in every report.
pub const REPORT_VERSION: u32 = 1;

/// Fixed CSV header, one verdict per row.
pub const CSV_HEADER: &str = "name,lhs,rhs,margin,slack,holds,error_estimate,params";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OutputFormat {
    Json,
    Csv,
}

impl FromStr for OutputFormat {
    type Err = OuError;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "json" => Ok(OutputFormat::Json),
            "csv" => Ok(OutputFormat::Csv),
            other => Err(OuError::InvalidParam(format!(
                "unknown output format `{other}`; expected json or csv"
            ))),
        }
    }
}

/// A complete run record: command, inputs, verdicts, wall time.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Report {
    pub version: u32,
    pub command: String,
    pub inputs: BTreeMap<String, String>,
    pub verdicts: Vec<Verdict>,
    /// Wall-clock seconds for the run.
    pub timing: f64,
}

impl Report {
    pub fn new(command: impl Into<String>) -> Self {
        Report {
            version: REPORT_VERSION,
            command: command.into(),
            inputs: BTreeMap::new(),
            verdicts: Vec::new(),
            timing: 0.0,
        }
    }

    pub fn add_input(&mut self, key: impl Into<String>, value: impl Into<String>) {
        self.inputs.insert(key.into(), value.into());
    }

    pub fn push_verdict(&mut self, v: Verdict) {
        self.verdicts.push(v);
    }

    pub fn push_verdicts(&mut self, vs: impl IntoIterator<Item = Verdict>) {
        self.verdicts.extend(vs);
    }

    pub fn all_hold(&self) -> bool {
        self.verdicts.iter().all(|v| v.holds)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let rep: Report = serde_json::from_str(text)?;
        if rep.version != REPORT_VERSION {
            return Err(OuError::InvalidParam(format!(
                "report schema version {} not supported (expected {REPORT_VERSION})",
                rep.version
            )));
        }
        Ok(rep)
    }

    /// CSV rendering with the fixed header; the params column packs the
    /// verdict inputs as `k=v` pairs joined by `;`, quoted per RFC 4180.
    pub fn to_csv(&self) -> String {
        let mut out = String::from(CSV_HEADER);
        out.push('\n');
        for v in &self.verdicts {
            let params = v
                .inputs
                .iter()
                .map(|(k, val)| format!("{k}={val}"))
                .collect::<Vec<_>>()
                .join(";");
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{},{}",
                v.name,
                v.lhs,
                v.rhs,
                v.margin,
                v.slack,
                v.holds,
                v.error_estimate,
                csv_quote(&params)
            );
        }
        out
    }

    /// Plain-text table for terminal display.
    pub fn to_table(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(
            out,
            "{:<18} {:>14} {:>14} {:>12} {:>10} {:>6}",
            "name", "lhs", "rhs", "margin", "slack", "holds"
        );
        for v in &self.verdicts {
            let _ = writeln!(
                out,
                "{:<18} {:>14.6e} {:>14.6e} {:>12.3e} {:>10.2e} {:>6}",
                v.name, v.lhs, v.rhs, v.margin, v.slack, v.holds
            );
        }
        out
    }

    pub fn render(&self, format: OutputFormat) -> Result<String> {
        match format {
            OutputFormat::Json => self.to_json(),
            OutputFormat::Csv => Ok(self.to_csv()),
        }
    }

    /// Writes the rendered report to `path` atomically (temp file in the
    /// same directory, then rename).
    pub fn write_atomic(&self, path: &Path, format: OutputFormat) -> Result<()> {
        write_atomic(path, &self.render(format)?)
    }
}

/// Atomic text write: temp file next to the target, flushed, then renamed
/// over it.
pub fn write_atomic(path: &Path, content: &str) -> Result<()> {
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(content.as_bytes())?;
    tmp.flush()?;
    tmp.persist(path).map_err(|e| OuError::Io(e.error))?;
    Ok(())
}

fn csv_quote(field: &str) -> String {
    format!("\"{}\"", field.replace('"', "\"\""))
}
