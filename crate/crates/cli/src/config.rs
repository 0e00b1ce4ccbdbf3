//! Run configuration: parsing, defaults and validation.

use std::path::{Path, PathBuf};

use fockforge_core::fock::basis_size;
use fockforge_core::verify::QuadratureGrid;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::suites::{validate_params, CATALOG};
use crate::CliError;

pub const DEFAULT_MODES: usize = 1;
pub const DEFAULT_CUTOFF: u32 = 20;
pub const DEFAULT_TOLERANCE: f64 = 1e-12;
/// Largest basis a run builds without `--override-memory-guard`.
pub const MEMORY_GUARD: usize = 1_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Txt,
    Csv,
}

impl std::str::FromStr for Format {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s.trim() {
            "json" => Ok(Format::Json),
            "txt" => Ok(Format::Txt),
            "csv" => Ok(Format::Csv),
            other => Err(format!("unknown format {other:?}; expected json, txt or csv")),
        }
    }
}

fn default_formats() -> Vec<Format> {
    vec![Format::Json, Format::Txt, Format::Csv]
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    #[serde(default)]
    pub directory: Option<PathBuf>,
    #[serde(default = "default_formats")]
    pub formats: Vec<Format>,
}

impl Default for OutputConfig {
    fn default() -> Self {
        OutputConfig {
            directory: None,
            formats: default_formats(),
        }
    }
}

/// One entry of the suite list as written in the file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SuiteEntry {
    pub name: String,
    #[serde(default = "empty_object")]
    pub params: Value,
    /// Per-suite basis and tolerance overrides.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub modes: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cutoff: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tolerance: Option<f64>,
}

fn empty_object() -> Value {
    Value::Object(Default::default())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    suites: Vec<SuiteEntry>,
    #[serde(default)]
    modes: Option<usize>,
    #[serde(default)]
    cutoff: Option<u32>,
    #[serde(default)]
    tolerance: Option<f64>,
    #[serde(default)]
    quadrature: Option<QuadratureGrid>,
    #[serde(default)]
    output: Option<OutputConfig>,
}

/// A suite with every setting resolved.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuiteConfig {
    pub name: String,
    pub params: Value,
    pub modes: usize,
    pub cutoff: u32,
    pub tolerance: f64,
}

/// Validated configuration with defaults filled in; echoed into the report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub suites: Vec<SuiteConfig>,
    pub modes: usize,
    pub cutoff: u32,
    pub tolerance: f64,
    pub quadrature: QuadratureGrid,
    #[serde(skip)]
    pub output: OutputConfig,
}

fn field_error(path: &str, msg: impl std::fmt::Display) -> CliError {
    CliError::Config(format!("{path}: {msg}"))
}

pub fn parse_config_file(path: &Path, override_guard: bool) -> Result<RunConfig, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
    parse_config(&text, override_guard)
}

/// Parses and validates a configuration document.
pub fn parse_config(text: &str, override_guard: bool) -> Result<RunConfig, CliError> {
    let raw: RawConfig = serde_json::from_str(text).map_err(|e| {
        CliError::Config(format!("line {} column {}: {e}", e.line(), e.column()))
    })?;
    let modes = raw.modes.unwrap_or(DEFAULT_MODES);
    let cutoff = raw.cutoff.unwrap_or(DEFAULT_CUTOFF);
    let tolerance = raw.tolerance.unwrap_or(DEFAULT_TOLERANCE);
    check_tolerance("tolerance", tolerance)?;
    let quadrature = raw.quadrature.unwrap_or_default();
    if quadrature.laguerre_order == 0 || quadrature.laguerre_order > 180 {
        return Err(field_error("quadrature.laguerre_order", "must lie in 1..=180"));
    }
    if quadrature.angular_order == 0 {
        return Err(field_error("quadrature.angular_order", "must be positive"));
    }
    if quadrature.exp_sinh_level > 10 {
        return Err(field_error("quadrature.exp_sinh_level", "must be at most 10"));
    }
    if raw.suites.is_empty() {
        return Err(field_error("suites", "at least one suite is required"));
    }
    let mut suites = Vec::with_capacity(raw.suites.len());
    for (i, s) in raw.suites.into_iter().enumerate() {
        let path = format!("suites[{i}]");
        if !CATALOG.iter().any(|c| c.name == s.name) {
            let names: Vec<&str> = CATALOG.iter().map(|c| c.name).collect();
            return Err(field_error(
                &format!("{path}.name"),
                format!("unknown suite {:?}; available: {}", s.name, names.join(", ")),
            ));
        }
        if !s.params.is_object() {
            return Err(field_error(&format!("{path}.params"), "must be an object"));
        }
        let suite = SuiteConfig {
            modes: s.modes.unwrap_or(modes),
            cutoff: s.cutoff.unwrap_or(cutoff),
            tolerance: s.tolerance.unwrap_or(tolerance),
            name: s.name,
            params: s.params,
        };
        if suite.modes == 0 {
            return Err(field_error(&format!("{path}.modes"), "must be at least 1"));
        }
        check_tolerance(&format!("{path}.tolerance"), suite.tolerance)?;
        let size = basis_size(suite.modes, suite.cutoff);
        if !override_guard && (size > MEMORY_GUARD as u128 || suite.modes > MEMORY_GUARD) {
            return Err(CliError::Config(format!(
                "{path}: basis with {} modes and cutoff {} has {size} states, above the memory guard of {MEMORY_GUARD}; rerun with --override-memory-guard",
                suite.modes, suite.cutoff
            )));
        }
        validate_params(&suite).map_err(|e| field_error(&format!("{path}.params"), e))?;
        suites.push(suite);
    }
    Ok(RunConfig {
        suites,
        modes,
        cutoff,
        tolerance,
        quadrature,
        output: raw.output.unwrap_or_default(),
    })
}

fn check_tolerance(path: &str, t: f64) -> Result<(), CliError> {
    if !(t >= 0.0) || !t.is_finite() {
        return Err(field_error(path, format!("must be finite and non-negative, got {t}")));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_config_fills_defaults() {
        let c = parse_config(r#"{"suites":[{"name":"casimir"}]}"#, false).unwrap();
        assert_eq!(c.modes, 1);
        assert_eq!(c.cutoff, 20);
        assert_eq!(c.tolerance, 1e-12);
        assert_eq!(c.suites[0].cutoff, 20);
        assert_eq!(c.quadrature, QuadratureGrid::default());
        assert_eq!(c.output.formats, default_formats());
    }

    #[test]
    fn unknown_suite_lists_catalog() {
        let e = parse_config(r#"{"suites":[{"name":"nope"}]}"#, false).unwrap_err();
        let msg = e.to_string();
        assert!(msg.contains("suites[0].name"), "{msg}");
        for c in CATALOG {
            assert!(msg.contains(c.name), "{msg}");
        }
    }

    #[test]
    fn memory_guard_needs_override() {
        let text = r#"{"modes":6,"cutoff":40,"suites":[{"name":"relations","params":{"algebra":"sp"}}]}"#;
        let e = parse_config(text, false).unwrap_err();
        assert!(e.to_string().contains("--override-memory-guard"));
        assert!(parse_config(text, true).is_ok());
    }

    #[test]
    fn unknown_fields_are_rejected() {
        assert!(parse_config(r#"{"suites":[{"name":"casimir"}],"cutof":3}"#, false).is_err());
        let e = parse_config(
            r#"{"suites":[{"name":"casimir","params":{"margn":2}}]}"#,
            false,
        )
        .unwrap_err();
        assert!(e.to_string().contains("suites[0].params"), "{e}");
    }
}
