//! File formats, SVG reports and the `p300` command-line pipeline on top of
//! `p300-core`.
//!
//! Every subcommand stages its outputs and renames them into place only when
//! all of them were produced, so a failed run leaves no partial files.

pub mod atomic;
pub mod commands;
pub mod dataset;
mod error;
pub mod formats;
pub mod svg;

pub use commands::run;
pub use error::{CliError, CliResult};
