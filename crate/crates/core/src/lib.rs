//! Boson-quadratic algebras, their ladder-operator eigenstates and cat
//! superpositions, on truncated multimode Fock spaces.
//!
//! Modules, bottom-up:
//! - [`fock`]: truncated bases and sparse states.
//! - [`specfun`]: Gamma, modified Bessel functions, measure densities, quadrature.
//! - [`algebra`]: generators, their action, commutation and Casimir checks.
//! - [`states`]: the coherent-state families.
//! - [`verify`]: eigenvalue residuals, resolutions of unity and probes.

// `!(x > 0.0)` also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod algebra;
pub mod error;
pub mod fock;
pub mod specfun;
pub mod states;
pub mod verify;

pub use error::{Error, Result};
pub use num_complex::Complex64 as C64;
