//! Deterministic simulation of distributed algorithms for programmable
//! matter on the face-centred cubic grid.
//!
//! The crate provides:
//!
//! * exact integer geometry of the grid ([`grid`]);
//! * the sixteen admissible particle orientations ([`orientation`]);
//! * particle configurations, connectivity and shape generators
//!   ([`config`]);
//! * the structural test deciding which configurations admit
//!   deterministic leader election ([`electability`]);
//! * periodic distance colorings used for local identifiers
//!   ([`coloring`]);
//! * a deterministic round-based scheduler with JSONL tracing
//!   ([`runtime`]);
//! * the two leader election protocols, for common ([`homog`]) and
//!   per-particle ([`hetero`]) orientations;
//! * spanning tree construction, port relabelling and identifier
//!   assignment ([`identifiers`]).

use thiserror::Error;

pub mod coloring;
pub mod config;
pub mod electability;
pub mod grid;
pub mod hetero;
pub mod homog;
pub mod identifiers;
pub mod orientation;
pub mod runtime;

/// Errors shared across the crate.
#[derive(Debug, Error, PartialEq, Eq)]
pub enum Error {
    #[error("port {0} out of range (vertices have ports 0..12)")]
    InvalidPort(u8),
    #[error("({x2}/2, {y2}/2, {z}) is not a grid vertex: in-layer parity must match the layer")]
    OffLattice { x2: i64, y2: i64, z: i64 },
    #[error("vertices lie in different layers ({a} and {b})")]
    DifferentLayers { a: i64, b: i64 },
    #[error("configuration is empty")]
    EmptyConfiguration,
    #[error("duplicate vertex {0} in configuration")]
    DuplicateVertex(String),
    #[error("configuration is not connected")]
    Disconnected,
    #[error("vertex {0} is not in the configuration")]
    NotInConfiguration(String),
    #[error("orientation index {0} out of range 0..16")]
    InvalidOrientation(u8),
    #[error("expected {expected} orientations, got {got}")]
    OrientationCountMismatch { expected: usize, got: usize },
    #[error("invalid shape parameters: {0}")]
    InvalidShape(String),
    #[error("coloring distance bound must be at least 1, got {0}")]
    InvalidColoringBound(u64),
    #[error("no admissible configuration found within {0} attempts")]
    RetryBudgetExhausted(u64),
    #[error("pipeline requires a common-orientation configuration for this mode")]
    MixedOrientations,
    #[error("{stage} stage did not converge: {reason}")]
    StageFailed { stage: &'static str, reason: String },
}
