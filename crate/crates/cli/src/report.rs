//! report.json, report.txt, CSV tables and metadata.json.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use fockforge_core::verify::CheckMode;
use serde::{Deserialize, Serialize};

use crate::config::{Format, RunConfig};
use crate::suites::{SuiteOutcome, Table};
use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Summary {
    pub checks: usize,
    pub asserting: usize,
    pub asserting_failed: usize,
    pub negative_controls: usize,
    pub negative_controls_failed: usize,
    pub probes: usize,
    pub pass: bool,
}

/// The canonical report; identical configurations give identical bytes.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunReport {
    pub tool: String,
    pub version: String,
    pub config: RunConfig,
    pub suites: Vec<SuiteOutcome>,
    pub summary: Summary,
}

impl RunReport {
    pub fn new(config: RunConfig, suites: Vec<SuiteOutcome>) -> Self {
        let mut s = Summary {
            checks: 0,
            asserting: 0,
            asserting_failed: 0,
            negative_controls: 0,
            negative_controls_failed: 0,
            probes: 0,
            pass: true,
        };
        for r in suites.iter().flat_map(|o| &o.reports) {
            s.checks += 1;
            match r.mode {
                CheckMode::Asserting => {
                    s.asserting += 1;
                    s.asserting_failed += usize::from(!r.pass);
                }
                CheckMode::NegativeControl => {
                    s.negative_controls += 1;
                    s.negative_controls_failed += usize::from(!r.pass);
                }
                CheckMode::ProbeOnly => s.probes += 1,
            }
        }
        s.pass = s.asserting_failed == 0 && s.negative_controls_failed == 0;
        RunReport {
            tool: "fockforge".into(),
            version: env!("CARGO_PKG_VERSION").into(),
            config,
            suites,
            summary: s,
        }
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(
            out,
            "fockforge {}  modes={} cutoff={} tolerance={:e}",
            self.version, self.config.modes, self.config.cutoff, self.config.tolerance
        );
        for suite in &self.suites {
            let _ = writeln!(
                out,
                "\n[{}] {}  modes={} cutoff={} tolerance={:e}  {}",
                suite.index,
                suite.name,
                suite.modes,
                suite.cutoff,
                suite.tolerance,
                if suite.pass { "PASS" } else { "FAIL" }
            );
            let rows: Vec<[String; 6]> = suite
                .reports
                .iter()
                .map(|r| {
                    [
                        r.check.clone(),
                        mode_label(r.mode).to_string(),
                        format!("{:.3e}", r.residual),
                        format!("{:.3e}", r.tolerance),
                        format!("{:.3e}", r.truncation_budget),
                        verdict(r.mode, r.pass).to_string(),
                    ]
                })
                .collect();
            let header = ["check", "mode", "residual", "tolerance", "budget", "verdict"].map(String::from);
            let mut widths = header.clone().map(|h| h.len());
            for row in &rows {
                for (w, cell) in widths.iter_mut().zip(row) {
                    *w = (*w).max(cell.len());
                }
            }
            for row in std::iter::once(&header).chain(rows.iter()) {
                let cells: Vec<String> = row
                    .iter()
                    .zip(widths)
                    .map(|(c, w)| format!("{c:<w$}"))
                    .collect();
                let _ = writeln!(out, "  {}", cells.join("  ").trim_end());
            }
            for t in &suite.tables {
                let _ = writeln!(out, "  table: {}", t.file);
            }
        }
        let s = &self.summary;
        let _ = writeln!(
            out,
            "\nsummary: {} checks, {} asserting ({} failed), {} negative controls ({} failed), {} probes: {}",
            s.checks,
            s.asserting,
            s.asserting_failed,
            s.negative_controls,
            s.negative_controls_failed,
            s.probes,
            if s.pass { "PASS" } else { "FAIL" }
        );
        out
    }
}

fn mode_label(m: CheckMode) -> &'static str {
    match m {
        CheckMode::Asserting => "assert",
        CheckMode::NegativeControl => "negative-control",
        CheckMode::ProbeOnly => "probe",
    }
}

fn verdict(m: CheckMode, pass: bool) -> &'static str {
    match (m, pass) {
        (CheckMode::ProbeOnly, _) => "reported",
        (_, true) => "pass",
        (_, false) => "FAIL",
    }
}

/// Comma-separated table with quoted cells only where needed.
pub fn table_csv(header: &[String], rows: &[Vec<String>]) -> String {
    let cell = |c: &str| {
        if c.contains([',', '"', '\n']) {
            format!("\"{}\"", c.replace('"', "\"\""))
        } else {
            c.to_string()
        }
    };
    let mut out = String::new();
    for row in std::iter::once(header).chain(rows.iter().map(|r| r.as_slice())) {
        let cells: Vec<String> = row.iter().map(|c| cell(c)).collect();
        out.push_str(&cells.join(","));
        out.push('\n');
    }
    out
}

/// Timings and environment, kept out of report.json so it stays reproducible.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Metadata {
    pub started_unix_seconds: u64,
    pub threads: usize,
    pub suite_seconds: Vec<(String, f64)>,
    pub total_seconds: f64,
}

fn write(path: PathBuf, text: &str) -> Result<PathBuf, CliError> {
    fs::write(&path, text).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    Ok(path)
}

/// Writes the requested formats into `dir` and returns the paths written.
pub fn emit_report(
    report: &RunReport,
    metadata: &Metadata,
    formats: &[Format],
    dir: &Path,
) -> Result<Vec<PathBuf>, CliError> {
    fs::create_dir_all(dir).map_err(|e| CliError::Io(format!("{}: {e}", dir.display())))?;
    let mut written = Vec::new();
    if formats.contains(&Format::Json) {
        written.push(write(dir.join("report.json"), &report.to_json())?);
    }
    if formats.contains(&Format::Txt) {
        written.push(write(dir.join("report.txt"), &report.to_text())?);
    }
    if formats.contains(&Format::Csv) {
        let tables: Vec<&Table> = report.suites.iter().flat_map(|s| &s.tables).collect();
        for t in tables {
            written.push(write(dir.join(&t.file), &table_csv(&t.header, &t.rows))?);
        }
    }
    let meta = serde_json::to_string_pretty(metadata).expect("metadata serializes");
    written.push(write(dir.join("metadata.json"), &(meta + "\n"))?);
    Ok(written)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_quotes_only_when_needed() {
        let h = vec!["a".to_string(), "b,c".to_string()];
        let rows = vec![vec!["1".to_string(), "x\"y".to_string()]];
        assert_eq!(table_csv(&h, &rows), "a,\"b,c\"\n1,\"x\"\"y\"\n");
    }
}
