//! Node localization for wireless sensor networks.
//!
//! The crate is organised bottom-up:
//!
//! * [`network`]: deployments, the one-hop communication graph, BFS hop
//!   tables and range measurements.
//! * [`swarm`]: a dimension-generic optimizer kernel with PSO and SCA steps
//!   and an exponential module selector that hands over from SCA to PSO.
//! * [`localization`]: hop-aware swarm initialization, the weighted
//!   neighbor-ranging fitness and the per-node solve order (AdapSCA-PSO).
//! * [`baselines`]: DV-Hop, plus PSO and unoptimized SCAPSO driven by a
//!   DV-Hop fitness.
//! * [`experiments`]: scenario presets, the Monte-Carlo harness, the average
//!   error metric and report aggregation.
//! * [`config`]: the resolved run configuration used by the `wsnloc` binary.

// Validation uses negated comparisons so that NaN is rejected too; the
// optimizer kernels index several fixed-size arrays in lockstep.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod baselines;
pub mod config;
pub mod error;
pub mod experiments;
pub mod geometry;
pub mod localization;
pub mod network;
pub mod report;
pub mod seed;
pub mod swarm;

pub use error::{Error, Result};
pub use geometry::Point;
