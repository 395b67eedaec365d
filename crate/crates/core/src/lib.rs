//! Sharp L∞ bounds for the Dirichlet Poisson problem on grid domains.
//!
//! The crate computes the modulus `σ_D` in `‖u‖∞ ≤ ‖f‖∞ σ_D(‖f‖₁/‖f‖∞)` by
//! alternating bathtub maximization over discrete Green columns, evaluates
//! closed-form ball bounds, and checks rearrangement and eigenfunction
//! estimates against direct solves.

pub mod bathtub;
pub mod bounds;
pub mod commands;
pub mod error;
pub mod families;
pub mod grid;
pub mod io;
pub mod rearrange;
pub mod solver;
pub mod spectral;

pub use error::{Error, Result};
