//! Batch driver for the `nccz` experiment catalog.
//!
//! A run is `config text → Config → ExperimentResult → JSON | CSV | summary`.
//! Flags are applied as extra assignments after the file, so they win.

pub mod catalog;
pub mod config;
pub mod error;
pub mod report;

use std::path::Path;

pub use catalog::run_experiment;
pub use config::{
    build_config, parse_assignments, parse_config, Assignment, Config, Experiment, Format,
};
pub use error::CliError;
pub use report::{emit_report, render, ExperimentResult};

/// Config from optional file text plus `key = value` overrides.
pub fn assemble_config(
    text: Option<&str>,
    overrides: &[(String, String)],
) -> Result<Config, CliError> {
    let mut a = match text {
        Some(t) => parse_assignments(t)?,
        None => Vec::new(),
    };
    a.extend(overrides.iter().map(|(k, v)| Assignment {
        line: 0,
        key: k.clone(),
        value: v.clone(),
    }));
    build_config(&a)
}

pub fn read_config_file(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|source| CliError::Read {
        path: path.to_path_buf(),
        source,
    })
}

#[cfg(doctest)]
#[doc = include_str!("../../../book/src/cli.md")]
mod book_cli {}
