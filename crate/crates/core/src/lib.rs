//! Nonlocal (Lévy-operator) semilinear parabolic problems with a
//! global-in-time memory term, on uniform 1-D grids.
//!
//! The stack is layered bottom-up: [`kernel`] describes the jump density,
//! [`nonlocal_op`] assembles the discrete operator `K`, [`elliptic`] and
//! [`parabolic`] solve the two building-block problems, and [`memory`]
//! couples them through the fixed-point map `π`. [`harness`] holds the
//! configuration, studies and acceptance checks behind the CLI.

// `!(x > 0.0)` is used on purpose so that NaN is rejected too
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod elliptic;
pub mod error;
pub mod grid;
pub mod harness;
pub mod kernel;
pub mod memory;
pub mod nonlocal_op;
pub mod parabolic;
pub mod potential;
pub mod quad;

pub use error::{Error, Result};
pub use grid::{Grid, GridFunction, TimeGrid};
pub use kernel::{JumpKernel, LevyKernel, RescaledKernel};
pub use nonlocal_op::{OperatorMatrix, QuadratureSpec};
pub use potential::Potential;
