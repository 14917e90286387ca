//! Command-line driver and file formats for `nsfrac-core`.
//!
//! - [`cli`]: argument parsing and the `run`, `study-spatial`, `study-temporal`
//!   and `resume` subcommands.
//! - [`checkpoint`]: bit-exact plain-text restart files.
//! - [`vtk`]: legacy ASCII VTK output of the final fields.
//! - [`table`]: convergence tables as CSV.
//! - [`study`]: Taylor-Green studies with rows run in parallel.

use std::path::{Path, PathBuf};

pub mod checkpoint;
pub mod cli;
pub mod study;
pub mod table;
pub mod vtk;

pub use nsfrac_core as core;

#[derive(Debug, thiserror::Error)]
pub enum IoError {
    #[error("{path}: {source}")]
    File { path: PathBuf, source: std::io::Error },
    #[error("malformed checkpoint: {0}")]
    Format(String),
    #[error("checkpoint does not fit the problem: {0}")]
    Shape(String),
}

impl IoError {
    pub(crate) fn file(path: &Path, source: std::io::Error) -> Self {
        IoError::File { path: path.to_path_buf(), source }
    }
}
