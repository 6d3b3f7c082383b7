//! Configuration, measured-run fixtures and the subcommands of the `cvqkd`
//! tool: simulate, analyze, keyrate, pipeline and report.

pub mod commands;
pub mod config;
pub mod error;
pub mod fixtures;

pub use error::{Error, Result};
