//! Configuration, file formats and experiment drivers on top of `homlab-core`.

pub mod config;
pub mod error;
pub mod experiment;
pub mod format;
pub mod report;

pub use config::ExperimentConfig;
pub use error::{AppError, Result};
pub use experiment::{cmd_cell, cmd_micro, cmd_sweep, cmd_verify, RunOptions};
