//! Adaptive dynamic mode decomposition for spatiotemporal snapshot data.
//!
//! The entry point is [`adaptive::admd_fit`]: it classifies the numeric
//! rank of a [`SnapshotMatrix`], routes rank-deficient data through delay
//! embedding and optional random sketching, routes full-rank data through
//! a spatial DFT mask or robust low-rank recovery, fits an exact DMD
//! model, and reports spectra and per-snapshot errors. Each stage is also
//! usable on its own:
//!
//! - [`dmd`] — snapshot splitting, truncated SVD, reduced operator,
//!   model fitting and time-continuous reconstruction;
//! - [`delay`] — Hankel augmentation and delay-coordinate fits;
//! - [`sketch`] — Gaussian, sparse-sign and row-sampling operators with
//!   full-space mode recovery;
//! - [`filters`] — shrinkage, singular-value thresholding, robust
//!   low-rank + sparse splitting, per-column DFT masking;
//! - [`datasets`] — deterministic generators for the bundled experiments;
//! - [`evaluation`] — relative error series and spectrum tables.
//!
//! The `admd` binary drives the same pipeline from the command line; see
//! the crate README for the file formats it reads and writes.

pub mod adaptive;
pub mod config;
pub mod datasets;
pub mod delay;
pub mod dmd;
pub mod error;
pub mod evaluation;
pub mod filters;
pub mod io;
pub mod runner;
pub mod sketch;

/// Seed used whenever the caller does not provide one.
pub const DEFAULT_SEED: u64 = 1729;

pub use adaptive::{admd_fit, classify, AdmdConfig, AdmdReport, BranchTaken};
pub use dmd::{fit_dmd, numeric_rank, split_snapshots, DmdModel, RankRule, SnapshotMatrix};
pub use delay::{fit_delay_dmd, hankel_pair};
pub use error::{AdmdError, Result};
pub use filters::{dft_filter, rpca_ialm, DftFilterPolicy, RpcaParams, RpcaResult};
pub use sketch::{lift_modes, ProjectionOperator, SketchKind};
