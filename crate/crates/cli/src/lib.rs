//! Command-line plumbing for `siegel`: JSON inputs, run manifests and the
//! reproduction suite.

pub mod commands;
pub mod error;
pub mod io;
pub mod manifest;
pub mod reproduce;

pub use error::{CliError, CliResult};
