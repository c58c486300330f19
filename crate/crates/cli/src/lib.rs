//! Configuration-driven experiment runner for `znav-core`.

pub mod commands;
pub mod config;
pub mod error;
pub mod experiment;
pub mod manifest;

pub use config::ExperimentConfig;
pub use error::{CliError, Result};
