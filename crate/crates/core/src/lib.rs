//! Inference-time search machinery for grid-maze solving with a stochastic
//! denoising generator.
//!
//! The crate is organised bottom-up:
//!
//! - [`maze`]: maze instances, generators and the BFS ground-truth oracle.
//! - [`simgen`]: the denoising simulator standing in for a video model
//!   (per-seed plans, intermediate clean-sample estimates, refinement).
//! - [`render`]: synthetic frame stacks and the pixel extraction pipeline.
//! - [`verify`]: the probe verifier, success judgement and failure taxonomy.
//! - [`search`]: best-of-N and early planning beam search under an NFE budget.
//! - [`chain`]: multi-round chaining with pivot selection and stitching.
//! - [`metrics`]: convergence, diversity, IoU, correlation and binned curves.
//! - [`calibration`]: Monte-Carlo estimators for the simulator's target statistics.

pub mod calibration;
pub mod chain;
mod error;
pub mod maze;
pub mod metrics;
pub mod render;
pub mod search;
pub mod seed;
pub mod simgen;
pub mod verify;

pub use error::{Error, Result};
pub use maze::{Cell, GridMaze, Path, Variant};
