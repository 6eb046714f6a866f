//! Experiment harness for `planlab`: maze corpora, simulator calibration,
//! method sweeps and reports.

pub mod calibrate;
pub mod config;
pub mod corpus;
mod error;
pub mod report;
pub mod sweep;

pub use config::{CorpusSpec, ExperimentConfig, Method, PoolSpec};
pub use error::{BenchError, Result};

/// Environment variable naming the output root.
pub const OUT_ENV: &str = "PLANLAB_OUT";
pub const DEFAULT_OUT: &str = "planlab-out";
