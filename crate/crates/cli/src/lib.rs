//! Command-line front-end for adverse-event probability estimation: data
//! ingestion, configuration, and delimited report emission for the
//! `estimate`, `compare` and `simulate` subcommands.

pub mod commands;
pub mod error;
pub mod input;
pub mod report;

pub use commands::{Cli, Command};
pub use error::CliError;
