//! Augmented polyconvex thermoviscoelasticity on periodic grids: constitutive
//! checks, the symmetric hyperbolic augmented system, a finite-difference
//! solver, relative-entropy diagnostics and parameter sweeps.
// `!(x > 0.0)` is used on purpose so NaN fails; index loops mirror the
// tensor notation.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod augmented;
pub mod cli;
pub mod constitutive;
pub mod error;
pub mod fields;
pub mod grid;
pub mod harness;
pub mod kinematics;
pub mod relentropy;
pub mod solver;
pub mod tensor;
pub mod verify;

pub use error::{Error, Result};
