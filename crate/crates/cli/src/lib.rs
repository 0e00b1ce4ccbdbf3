//! Batch front end: read a run configuration, execute the listed suites in
//! order and write deterministic reports.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod report;
pub mod suites;

use std::path::Path;
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use thiserror::Error;

pub use config::{parse_config, parse_config_file, Format, RunConfig};
pub use report::{emit_report, Metadata, RunReport};
pub use suites::{run_suite, CATALOG};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error("io error: {0}")]
    Io(String),
}

impl From<fockforge_core::Error> for CliError {
    fn from(e: fockforge_core::Error) -> Self {
        CliError::Config(e.to_string())
    }
}

/// Process exit status contract.
pub const EXIT_PASS: i32 = 0;
pub const EXIT_CHECK_FAILED: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;

impl CliError {
    pub fn exit_code(&self) -> i32 {
        EXIT_CONFIG
    }
}

/// Runs every suite of `config` sequentially.
pub fn execute(config: &RunConfig) -> Result<(RunReport, Metadata), CliError> {
    let started = SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0);
    let t0 = Instant::now();
    let mut outcomes = Vec::with_capacity(config.suites.len());
    let mut timings = Vec::with_capacity(config.suites.len());
    for (i, suite) in config.suites.iter().enumerate() {
        let t = Instant::now();
        outcomes.push(run_suite(i, suite, &config.quadrature)?);
        timings.push((format!("{i}:{}", suite.name), t.elapsed().as_secs_f64()));
    }
    let report = RunReport::new(config.clone(), outcomes);
    let metadata = Metadata {
        started_unix_seconds: started,
        threads: rayon::current_num_threads(),
        suite_seconds: timings,
        total_seconds: t0.elapsed().as_secs_f64(),
    };
    Ok((report, metadata))
}

/// Parses, runs and writes reports; returns the exit status.
pub fn run_file(
    path: &Path,
    out: Option<&Path>,
    formats: Option<Vec<Format>>,
    override_guard: bool,
) -> Result<(RunReport, i32), CliError> {
    let config = parse_config_file(path, override_guard)?;
    let (report, metadata) = execute(&config)?;
    let dir = out
        .map(Path::to_path_buf)
        .or_else(|| config.output.directory.clone())
        .unwrap_or_else(|| "fockforge-out".into());
    let formats = formats.unwrap_or_else(|| config.output.formats.clone());
    emit_report(&report, &metadata, &formats, &dir)?;
    let code = if report.summary.pass {
        EXIT_PASS
    } else {
        EXIT_CHECK_FAILED
    };
    Ok((report, code))
}
