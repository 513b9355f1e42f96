//! Configuration, execution and file output for the `hexstab` command.

pub mod commands;
pub mod config;
mod error;
pub mod output;

pub use commands::{check_command, freqresp_command, run_command, sweep_command, Outcome};
pub use config::{load_config, parse_config, Config, Overrides};
pub use error::{CliError, CliResult};
