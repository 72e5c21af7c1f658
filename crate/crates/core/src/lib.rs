//! Geometric surface-based quadrotor control on SE(3), with region-of-attraction
//! analysis and a deterministic fixed-step flight simulator.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod attitude_errors;
pub mod cli;
pub mod control;
pub mod error;
pub mod metrics;
pub mod plant;
pub mod reference;
pub mod sim;
pub mod so3;
pub mod stability;

pub use error::{Error, GainViolation, Result};
