//! Experiment runner behind the `qanalog` binary.
//!
//! Every run is described by an [`config::ExperimentConfig`], either read
//! from a `key = value` file (`qanalog run exp.cfg`) or assembled from
//! subcommand flags. Both paths go through the same validation.

pub mod commands;
pub mod config;
pub mod error;
pub mod output;

pub use error::CliError;

/// Tool name and version written into every output header.
pub const TOOL: &str = concat!("qanalog ", env!("CARGO_PKG_VERSION"));
