//! Verification toolkit for the extracellular-membrane-intracellular (EMI)
//! model of cardiac tissue: exact solution families, reference solvers on
//! radially reduced and structured Cartesian grids, and a convergence
//! harness.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analytic;
pub mod cartesian;
pub mod error;
pub mod model;
pub mod radial;
pub mod split;
pub mod verify;

pub use error::{EmiError, Result};
