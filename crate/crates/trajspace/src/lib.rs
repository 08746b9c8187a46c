//! Low-rank trajectory descriptors for pedestrian motion.
//!
//! A corpus of fixed-length tracklets is stacked into a matrix whose top
//! left singular vectors form a compact, data-driven basis for walking
//! paths. Trajectories move between Euclidean space and the coefficient
//! space by a single matrix product in each direction, and since the basis
//! is orthonormal the transform is an isometry: distances between
//! trajectories equal distances between their coefficient vectors.
//!
//! On top of the descriptor the crate provides:
//!
//! - dataset ingestion and sliding-window tracklet extraction
//!   ([`dataset`]),
//! - the basis fit, projection and reconstruction ([`basis`]), backed by a
//!   cyclic Jacobi eigensolver ([`linalg`]),
//! - parametric-curve reference descriptors (endpoint interpolation,
//!   Bézier, B-spline) for accuracy comparisons ([`curves`]),
//! - clustered trajectory anchors and multi-modal anchor-based prediction
//!   ([`anchors`], [`cluster`]),
//! - best-of-s evaluation metrics, training losses and ablation protocols
//!   ([`metrics`], [`report`]),
//! - versioned artifact files, SVG rendering and a CLI ([`persist`],
//!   [`plot`], [`cli`]).
//!
//! The `examples/` directory demonstrates each capability end to end on
//! synthetic corpora; the `trajspace` binary exposes the same pipeline over
//! annotation files on disk.

pub mod anchors;
pub mod basis;
pub mod cli;
pub mod cluster;
pub mod config;
pub mod curves;
pub mod dataset;
pub mod error;
pub mod geometry;
pub mod linalg;
pub mod metrics;
pub mod persist;
pub mod plot;
pub mod report;
pub mod synthetic;

pub use error::{Error, Result};
