//! Typed parameter records for each suite.

use fockforge_core::algebra::RELATION_MARGIN;
use fockforge_core::specfun::MeasureSpec;
use fockforge_core::states::{PhiSign, SquaredUnderlying};
use fockforge_core::verify::{ResolutionFamily, Target};
use fockforge_core::C64;
use serde::{Deserialize, Serialize};

/// A state of one of the constructed families.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case", deny_unknown_fields)]
pub enum StateParam {
    Glauber {
        alpha: Vec<C64>,
    },
    Cat {
        alpha: Vec<C64>,
        c_plus: C64,
        c_minus: C64,
    },
    Even {
        alpha: Vec<C64>,
    },
    Odd {
        alpha: Vec<C64>,
    },
    PhiCat {
        alpha: Vec<C64>,
        phi: f64,
        sign: PhiSign,
    },
    SquaredCat {
        alpha: Vec<C64>,
        #[serde(default = "default_underlying")]
        underlying: SquaredUnderlying,
        /// Both default to the balanced value that normalizes the state.
        #[serde(default)]
        d_plus: Option<C64>,
        #[serde(default)]
        d_minus: Option<C64>,
    },
    BgSu11 {
        two_k: u32,
        z: C64,
        #[serde(default)]
        overlap_with: Vec<C64>,
    },
}

fn default_underlying() -> SquaredUnderlying {
    SquaredUnderlying::Glauber
}

impl StateParam {
    pub fn alpha(&self) -> Option<&[C64]> {
        match self {
            StateParam::Glauber { alpha }
            | StateParam::Cat { alpha, .. }
            | StateParam::Even { alpha }
            | StateParam::Odd { alpha }
            | StateParam::PhiCat { alpha, .. }
            | StateParam::SquaredCat { alpha, .. } => Some(alpha),
            StateParam::BgSu11 { .. } => None,
        }
    }

    pub fn family(&self) -> &'static str {
        match self {
            StateParam::Glauber { .. } => "glauber",
            StateParam::Cat { .. } => "cat",
            StateParam::Even { .. } => "even",
            StateParam::Odd { .. } => "odd",
            StateParam::PhiCat { .. } => "phi_cat",
            StateParam::SquaredCat { .. } => "squared_cat",
            StateParam::BgSu11 { .. } => "bg_su11",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CasimirParams {
    #[serde(default = "default_margin")]
    pub margin: u32,
}

fn default_margin() -> u32 {
    RELATION_MARGIN
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EigenParams {
    pub states: Vec<StateParam>,
    /// Multiple of the analytic tail bound a residual may reach.
    #[serde(default = "default_budget_factor")]
    pub budget_factor: f64,
    /// Refuse states whose coherent tail exceeds this; unset lets the budget absorb it.
    #[serde(default)]
    pub max_tail: Option<f64>,
}

fn default_budget_factor() -> f64 {
    10.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ProbeSpec {
    /// Every basis state with `n_tot <= max_total`.
    MaxTotal { max_total: u32 },
    Ordinals { ordinals: Vec<usize> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NegativeControl {
    pub min_deviation: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ResolveParams {
    pub states: ResolutionFamily,
    pub measure: MeasureSpec,
    pub probe: ProbeSpec,
    #[serde(default = "default_target")]
    pub target: Target,
    #[serde(default)]
    pub negative_control: Option<NegativeControl>,
}

fn default_target() -> Target {
    Target::Natural
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SectorParams {
    pub p: usize,
    pub q: usize,
    pub alpha: Vec<C64>,
    #[serde(default = "default_ls")]
    pub l: Vec<i64>,
}

fn default_ls() -> Vec<i64> {
    (-2..=2).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReconstructionParams {
    pub p: usize,
    pub q: usize,
    pub alpha: Vec<C64>,
    /// Sectors to sum; every sector reachable under the cutoff when unset.
    #[serde(default)]
    pub l: Option<Vec<i64>>,
    #[serde(default)]
    pub omit: Option<i64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct UniquenessParams {
    pub density_a: MeasureSpec,
    pub density_b: MeasureSpec,
    pub degrees: Vec<Vec<u32>>,
    #[serde(default = "default_level")]
    pub level: u32,
    /// Assert the moment ratio is constant to this relative spread.
    #[serde(default)]
    pub max_ratio_spread: Option<f64>,
}

fn default_level() -> u32 {
    5
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BesselParams {
    #[serde(default = "default_nu")]
    pub nu: Vec<u32>,
    #[serde(default = "default_z")]
    pub z: Vec<f64>,
    #[serde(default = "default_classical_tolerance")]
    pub classical_tolerance: f64,
    /// Also assert the Wronskian, `K_{1/2}` and BG moment identities.
    #[serde(default)]
    pub identities: bool,
}

pub fn default_nu() -> Vec<u32> {
    (0..=3).collect()
}

pub fn default_z() -> Vec<f64> {
    vec![0.5, 1.0, 2.0]
}

fn default_classical_tolerance() -> f64 {
    1e-9
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VarianceParams {
    pub states: Vec<StateParam>,
    /// `(i, j)` pairs; all `i <= j` when unset.
    #[serde(default)]
    pub pairs: Option<Vec<(usize, usize)>>,
}

impl Default for BesselParams {
    fn default() -> Self {
        BesselParams {
            nu: default_nu(),
            z: default_z(),
            classical_tolerance: default_classical_tolerance(),
            identities: false,
        }
    }
}
