use thiserror::Error;

/// Errors raised by the core library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("a Fock basis needs at least one mode")]
    ZeroModes,
    #[error("basis with {modes} modes and cutoff {cutoff} has {size} states, above the memory guard of {guard}; raise the guard explicitly to proceed")]
    MemoryGuard {
        modes: usize,
        cutoff: u32,
        size: u128,
        guard: usize,
    },
    #[error("states live on different bases ({left} vs {right})")]
    BasisMismatch { left: String, right: String },
    #[error("occupation vector {0:?} is not part of the basis")]
    NotInBasis(Vec<u32>),
    #[error("mode index {index} out of range 1..={modes}")]
    InvalidMode { index: usize, modes: usize },
    #[error("mode split p={p}, q={q} does not match {modes} modes")]
    InvalidSplit { p: usize, q: usize, modes: usize },
    #[error("operator {0} is only defined on a one-mode basis")]
    OneModeOnly(String),
    #[error("interior margin {margin} exceeds cutoff {cutoff}")]
    MarginTooLarge { margin: u32, cutoff: u32 },
    #[error("alpha has {got} components but the basis has {expected} modes")]
    AlphaLength { got: usize, expected: usize },
    #[error("coherent tail {tail:e} at cutoff {cutoff} exceeds tolerance {tolerance:e}; cutoff {required} is required")]
    TailTooLarge {
        tail: f64,
        cutoff: u32,
        tolerance: f64,
        required: u32,
    },
    #[error("Bargmann index must be a positive half-integer, got 2k = {0}")]
    InvalidBargmannIndex(u32),
    #[error("normalization condition violated: residual {residual:e}")]
    Normalization { residual: f64 },
    #[error("sector l={l} has no basis states for p={p}, q={q} under cutoff {cutoff}")]
    InfeasibleSector { l: i64, p: usize, q: usize, cutoff: u32 },
    #[error("reduced parameterization requires a nonzero reference amplitude")]
    ZeroReference,
    #[error("{0} requires a positive argument, got {1}")]
    Domain(&'static str, f64),
    #[error("{function}({nu}, {x}) overflows double precision")]
    Overflow {
        function: &'static str,
        nu: f64,
        x: f64,
    },
    #[error("quadrature did not converge: {0}")]
    Quadrature(String),
    #[error("integral diverges: {0}")]
    Divergent(String),
    #[error("matrix is not symmetric at ({0},{1})")]
    Asymmetric(usize, usize),
    #[error("{0}")]
    Mismatch(String),
    #[error("parse error at byte {pos}: {msg}")]
    Parse { pos: usize, msg: String },
    #[error("json: {0}")]
    Json(String),
}

pub type Result<T> = std::result::Result<T, Error>;
