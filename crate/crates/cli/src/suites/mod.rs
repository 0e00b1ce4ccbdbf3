//! Suite catalog, parameter validation and dispatch.

mod exec;
pub mod params;

use fockforge_core::verify::{QuadratureGrid, ResolutionReport, VerificationReport};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::config::SuiteConfig;
use crate::CliError;
use params::*;

/// A named suite with a one-line description and an example parameter record.
pub struct CatalogEntry {
    pub name: &'static str,
    pub summary: &'static str,
    pub schema: &'static str,
}

pub const CATALOG: &[CatalogEntry] = &[
    CatalogEntry {
        name: "relations",
        summary: "commutation table of sp(N,C), u(p,q) or su(1,1) on interior Fock states",
        schema: r#"{"algebra": "sp"} | {"algebra": "u_pq", "p": 2, "q": 1} | {"algebra": "su11"}"#,
    },
    CatalogEntry {
        name: "casimir",
        summary: "one-mode su(1,1) Casimir K3^2 - K1^2 - K2^2 = -3/16 on interior states",
        schema: r#"{"margin": 4}"#,
    },
    CatalogEntry {
        name: "eigenstates",
        summary: "E(i,j) eigen-residuals of cat states, E(i,j)^2 of squared cats, K- of BG states",
        schema: r#"{"states": [{"family": "phi_cat", "alpha": [[1.0, 0.0]], "phi": 0.3, "sign": "+"}], "budget_factor": 10, "max_tail": null}"#,
    },
    CatalogEntry {
        name: "resolve-identity",
        summary: "Gram matrix of a state family under a measure against 1, 1_+-, or 1_l",
        schema: r#"{"states": {"family": "glauber"}, "measure": {"kind": "gaussian_glauber", "modes": 1}, "probe": {"kind": "max_total", "max_total": 14}, "target": {"target": "natural"}, "negative_control": null}"#,
    },
    CatalogEntry {
        name: "sectors",
        summary: "u(p,q) sector states: off-diagonal overlaps, support, L eigenvalue, diagonal norms",
        schema: r#"{"p": 1, "q": 1, "alpha": [[0.8, 0.1], [0.3, -0.4]], "l": [-2, -1, 0, 1, 2]}"#,
    },
    CatalogEntry {
        name: "reconstruction",
        summary: "Glauber state as the weighted sum of its u(p,q) sector states",
        schema: r#"{"p": 1, "q": 1, "alpha": [[0.8, 0.1], [0.3, -0.4]], "l": null, "omit": null}"#,
    },
    CatalogEntry {
        name: "measure-uniqueness",
        summary: "radial moments of two densities and the spread of their ratio",
        schema: r#"{"density_a": {"kind": "upq_z", "l": -2, "p": 1, "q": 1}, "density_b": {"kind": "fujii_k", "l": -3, "p": 1}, "degrees": [[0], [2], [4]], "level": 5, "max_ratio_spread": 1e-6}"#,
    },
    CatalogEntry {
        name: "bessel-check",
        summary: "K_nu(2z) integral representation table, classical Mellin form, optional identities",
        schema: r#"{"nu": [0, 1, 2, 3], "z": [0.5, 1, 2], "classical_tolerance": 1e-9, "identities": false}"#,
    },
    CatalogEntry {
        name: "variance",
        summary: "Var X_ij - Var Y_ij against the eigen-residual budget",
        schema: r#"{"states": [{"family": "even", "alpha": [[0.7, 0.2], [-0.4, 0.5]]}], "pairs": [[1, 2]]}"#,
    },
];

/// A plot-ready table written as CSV.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Table {
    pub file: String,
    pub header: Vec<String>,
    #[serde(skip)]
    pub rows: Vec<Vec<String>>,
}

/// Everything one suite produced.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SuiteOutcome {
    pub index: usize,
    pub name: String,
    pub modes: usize,
    pub cutoff: u32,
    pub tolerance: f64,
    pub params: Value,
    pub reports: Vec<VerificationReport>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub resolutions: Vec<ResolutionReport>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub tables: Vec<Table>,
    pub pass: bool,
}

impl SuiteOutcome {
    fn new(index: usize, suite: &SuiteConfig) -> Self {
        SuiteOutcome {
            index,
            name: suite.name.clone(),
            modes: suite.modes,
            cutoff: suite.cutoff,
            tolerance: suite.tolerance,
            params: suite.params.clone(),
            reports: Vec::new(),
            resolutions: Vec::new(),
            tables: Vec::new(),
            pass: true,
        }
    }

    fn finish(mut self) -> Self {
        self.pass = self.reports.iter().all(|r| r.counts_as_pass());
        self
    }
}

fn typed<T: DeserializeOwned>(v: &Value) -> Result<T, String> {
    serde_json::from_value(v.clone()).map_err(|e| e.to_string())
}

fn is_empty_object(v: &Value) -> bool {
    v.as_object().is_some_and(|m| m.is_empty())
}

pub(crate) fn relation_params(v: &Value) -> Result<fockforge_core::algebra::RelationParams, String> {
    if is_empty_object(v) {
        return Ok(fockforge_core::algebra::RelationParams::Sp);
    }
    typed(v)
}

fn check_alpha(alpha: &[fockforge_core::C64], modes: usize) -> Result<(), String> {
    if alpha.len() != modes {
        return Err(format!("alpha has {} components but the basis has {modes} modes", alpha.len()));
    }
    if alpha.iter().any(|a| !a.re.is_finite() || !a.im.is_finite()) {
        return Err("alpha must be finite".into());
    }
    Ok(())
}

fn check_states(states: &[StateParam], modes: usize) -> Result<(), String> {
    if states.is_empty() {
        return Err("states must not be empty".into());
    }
    for (i, s) in states.iter().enumerate() {
        if let Some(a) = s.alpha() {
            check_alpha(a, modes).map_err(|e| format!("states[{i}]: {e}"))?;
        } else if modes != 1 {
            return Err(format!("states[{i}]: bg_su11 needs a one-mode basis"));
        }
    }
    Ok(())
}

fn check_split(p: usize, q: usize, modes: usize) -> Result<(), String> {
    if p == 0 || q == 0 || p + q != modes {
        return Err(format!("p={p}, q={q} must be positive and sum to {modes} modes"));
    }
    Ok(())
}

/// Checks the parameter record of `suite` against its schema.
pub fn validate_params(suite: &SuiteConfig) -> Result<(), String> {
    let v = &suite.params;
    let m = suite.modes;
    match suite.name.as_str() {
        "relations" => {
            relation_params(v)?;
        }
        "casimir" => {
            let p: CasimirParams = typed(v)?;
            if m != 1 {
                return Err("casimir needs a one-mode basis".into());
            }
            if p.margin > suite.cutoff {
                return Err(format!("margin {} exceeds cutoff {}", p.margin, suite.cutoff));
            }
        }
        "eigenstates" => {
            let p: EigenParams = typed(v)?;
            check_states(&p.states, m)?;
            if !(p.budget_factor >= 0.0) {
                return Err("budget_factor must be non-negative".into());
            }
        }
        "resolve-identity" => {
            let _: ResolveParams = typed(v)?;
        }
        "sectors" => {
            let p: SectorParams = typed(v)?;
            check_split(p.p, p.q, m)?;
            check_alpha(&p.alpha, m)?;
        }
        "reconstruction" => {
            let p: ReconstructionParams = typed(v)?;
            check_split(p.p, p.q, m)?;
            check_alpha(&p.alpha, m)?;
        }
        "measure-uniqueness" => {
            let p: UniquenessParams = typed(v)?;
            if p.degrees.is_empty() {
                return Err("degrees must not be empty".into());
            }
            if p.level > 10 {
                return Err("level must be at most 10".into());
            }
        }
        "bessel-check" => {
            let p: BesselParams = typed(v)?;
            if p.z.iter().any(|z| !(*z > 0.0) || !z.is_finite()) {
                return Err("z values must be positive and finite".into());
            }
        }
        "variance" => {
            let p: VarianceParams = typed(v)?;
            check_states(&p.states, m)?;
            if let Some(pairs) = &p.pairs {
                for &(i, j) in pairs {
                    if i == 0 || j == 0 || i > m || j > m {
                        return Err(format!("pair ({i},{j}) outside modes 1..={m}"));
                    }
                }
            }
        }
        other => return Err(format!("unknown suite {other:?}")),
    }
    Ok(())
}

/// Runs one suite of a validated configuration.
pub fn run_suite(index: usize, suite: &SuiteConfig, grid: &QuadratureGrid) -> Result<SuiteOutcome, CliError> {
    let mut out = SuiteOutcome::new(index, suite);
    let bad = |e: String| CliError::Config(format!("suites[{index}].params: {e}"));
    match suite.name.as_str() {
        "relations" => exec::relations(&mut out, suite, relation_params(&suite.params).map_err(bad)?)?,
        "casimir" => exec::casimir(&mut out, suite, typed(&suite.params).map_err(bad)?)?,
        "eigenstates" => exec::eigenstates(&mut out, suite, typed(&suite.params).map_err(bad)?)?,
        "resolve-identity" => {
            exec::resolve(&mut out, suite, grid, typed(&suite.params).map_err(bad)?)?
        }
        "sectors" => exec::sectors(&mut out, suite, typed(&suite.params).map_err(bad)?)?,
        "reconstruction" => {
            exec::reconstruction(&mut out, suite, typed(&suite.params).map_err(bad)?)?
        }
        "measure-uniqueness" => {
            exec::uniqueness(&mut out, suite, typed(&suite.params).map_err(bad)?)?
        }
        "bessel-check" => exec::bessel(&mut out, suite, typed(&suite.params).map_err(bad)?)?,
        "variance" => exec::variance(&mut out, suite, typed(&suite.params).map_err(bad)?)?,
        other => return Err(CliError::Config(format!("unknown suite {other:?}"))),
    }
    Ok(out.finish())
}

pub use exec::{knu_rows, knu_table, KNU_HEADER};
