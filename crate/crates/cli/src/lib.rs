//! Configuration, execution and reporting for Morley eigenvalue experiments.

pub mod config;
pub mod error;
pub mod report;
pub mod runner;

pub use config::{ExperimentConfig, Method, ReferenceSource};
pub use error::CliError;
pub use runner::{run_experiment, Summary};
