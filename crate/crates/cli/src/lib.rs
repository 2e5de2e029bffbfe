//! Command-line front end for the cooperative bandit simulator: run
//! configuration, seed sweeps, result tables and the property suites.

pub mod commands;
pub mod config;
pub mod suites;
pub mod table;

pub use commands::{execute, Cli, CliError, Outcome, ERROR_EXIT};
