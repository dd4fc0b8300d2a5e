// SPDX-License-Identifier: Apache-2.0

//! Batch driver: presets, source-radius and node-count sweeps, mode
//! comparison and mesh transport, written out as CSV, text snapshots and SVG.

pub mod commands;
pub mod config;
pub mod output;
pub mod svg;

use thiserror::Error;

pub use commands::{cmd_mesh, cmd_run, cmd_sweep, Outcome};
pub use config::ExperimentConfig;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error("io error: {0}")]
    Io(String),
}

impl CliError {
    pub fn io(path: &std::path::Path, e: std::io::Error) -> Self {
        CliError::Io(format!("{}: {e}", path.display()))
    }
}

/// Process exit codes.
pub mod exit {
    pub const SUCCESS: i32 = 0;
    pub const CONFIG_ERROR: i32 = 1;
    pub const EARLY_TERMINATION: i32 = 2;
}
