//! Dynamic input-output model of supply and demand shock propagation
//! through a production network, with grid-search calibration and Monte
//! Carlo sensitivity analysis.

// `!(v > 0.0)` style checks are used on purpose so that NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod calibration;
pub mod dynamics;
pub mod economy;
pub mod error;
pub mod export;
pub mod fixtures;
pub mod integrator;
pub mod shocks;

pub use error::{Error, Result};
