//! File formats and command implementations for the `dropmor` tool.

pub mod commands;
pub mod config;
pub mod error;
pub mod manifest;
pub mod mtx;

pub use config::RunConfig;
pub use error::{CliError, Result};
