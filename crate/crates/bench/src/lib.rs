//! Sample grids, parameter sweeps and CSV reports for two-plane positioning.

pub mod experiment;
pub mod grid;
pub mod report;

use std::path::PathBuf;

use seqplic::off::OffError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("loading shape {}: {source}", path.display())]
    Shape { path: PathBuf, source: OffError },
    #[error("the baseline only supports the cube, not {0}")]
    BaselineNeedsCube(String),
    #[error("thread pool: {0}")]
    Threads(String),
    #[error("writing {}: {message}", path.display())]
    Output { path: PathBuf, message: String },
}
