//! Configuration, initial data, run orchestration and reports for the `chflow` binary.

pub mod app;
pub mod commands;
pub mod config;
pub mod error;
pub mod initial;

pub use app::run_cli;
pub use config::{load_config, parse_config, SimConfig};
pub use error::CliError;
pub use initial::{initial_on, make_initial};
