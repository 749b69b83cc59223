//! Command-line front end: decomposition, denoising, calibration and
//! benchmark sweeps with plot-ready CSV output.

pub mod bench;
pub mod commands;
pub mod config;
pub mod error;

pub use config::{RunConfig, Settings, Source, Subcommand, Sweep};
pub use error::{CliError, Result};
