//! Experiment driver: reads a TOML configuration and writes CSV tables for
//! the ratio statistics, ratio densities, equalized efficiency curves,
//! scheme comparisons and capacitor charging traces.

pub mod commands;
pub mod config;
pub mod output;

pub use commands::{run, CliError, Command};
pub use config::{ConfigError, ExperimentConfig};
