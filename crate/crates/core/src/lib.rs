//! Mean-field dynamics, steady states and stability of a microwave cavity with
//! a Kerr nonlinearity coupled to a mechanical resonator.
//!
//! Angular frequencies (rad/s) are used throughout the library; parameter files
//! and CSV outputs are in Hz.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod auxmodels;
pub mod bessel;
pub mod cli;
pub mod dynamics;
pub mod error;
pub mod model;
pub mod ode;
pub mod output;
pub mod response;
pub mod stability;
pub mod steadystate;

pub use error::{Error, Result};
pub use model::{DerivedQuantities, DriveConfig, SystemParams};
pub use stability::Region;
