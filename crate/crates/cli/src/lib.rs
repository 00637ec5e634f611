//! Command-line front end for the `oseen2d` solver: configuration, forcing
//! generators, subcommands and file output.

pub mod commands;
pub mod config;
pub mod error;
pub mod forcing;
pub mod output;

pub use config::{Command, RunConfig};
pub use error::CliError;
