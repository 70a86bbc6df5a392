//! Experiment harness for `winfree-core`: configuration files, seeded
//! scenarios, theorem-reproduction recipes, parameter sweeps and CSV output.

pub mod config;
pub mod csv;
mod error;
pub mod reproduce;
pub mod sample;
pub mod scenario;
pub mod sweep;

pub use error::{LabError, Result};
