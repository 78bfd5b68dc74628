//! Contrastive node-vs-subgraph anomaly detection for attributed networks.
//!
//! The crate is organized around the stages of the pipeline:
//!
//! * [`graph`] — CSR attributed-network storage, induced subgraphs, and the
//!   self-loop degree normalization consumed by the GCN layer.
//! * [`inject`] — synthetic structural (clique) and contextual (attribute
//!   swap) anomaly injection with ground-truth labels.
//! * [`sample`] — random-walk-with-restart sampling of contrastive
//!   "target node vs. local subgraph" instance pairs.
//! * [`model`] — the GCN + readout + bilinear discriminator scorer, with
//!   analytic gradients and an Adam optimizer.
//! * [`detector`] — the training loop and multi-round anomaly-score
//!   estimation.
//! * [`eval`] — tie-aware ROC/AUC, run aggregation, and parameter sweeps.
//!
//! The crate is `no_std` (with `alloc`); file formats and the CLI live in
//! the companion `cola-cli` crate. All floating-point transcendentals go
//! through `libm` so results are bit-identical across targets.

#![no_std]

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod dense;
pub mod detector;
pub mod error;
pub mod eval;
pub mod gradcheck;
pub mod graph;
pub mod inject;
pub mod model;
pub mod rng;
pub mod sample;

pub(crate) mod math;

pub use dense::Matrix;
pub use detector::{AnomalyScores, EstimationMode, ScoreSource, TrainConfig, TrainReport};
pub use error::{Error, Result};
pub use graph::{AttributedGraph, GraphStats};
pub use inject::InjectionConfig;
pub use model::{AdamState, ForwardTrace, Gradients, ModelParams, ReadoutMode};
pub use sample::InstancePair;
