//! Flow-based analysis of directed networks.
//!
//! The crate is organised around the path a directed edge list takes through
//! an analysis run:
//!
//! - [`graph`]: weighted directed graphs, ingestion, components, degrees.
//! - [`markov`]: teleportation-augmented random walks, PageRank, transition
//!   matrices in discrete and continuous time.
//! - [`stability`]: Markov Stability scores, Louvain optimisation, seeded
//!   ensembles, variation of information, time sweeps and robust windows.
//! - [`roles`]: role-based similarity profiles, the relaxed minimum spanning
//!   tree projection, and flow-role extraction.
//! - [`analysis`]: between-community bridgeness, partition cross-tabulation,
//!   external-friend proportions and audience overlap.
//! - [`synth`]: seeded benchmark generators with planted ground truth.
//!
//! All randomised procedures take explicit seeds and are deterministic for a
//! fixed seed, independent of worker scheduling.

pub mod analysis;
pub mod dense;
pub mod graph;
pub mod markov;
pub mod rng;
pub mod roles;
pub mod stability;
pub mod synth;
#[cfg(test)]
pub(crate) mod testkit;

use thiserror::Error;

/// Errors produced by any module in this crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("empty graph: {0}")]
    EmptyGraph(String),
    #[error("invalid parameter: {0}")]
    Parameter(String),
    #[error("no convergence after {iterations} iterations (residual {residual:.3e})")]
    Convergence { iterations: usize, residual: f64 },
    #[error("dimension mismatch: expected {expected}, found {found}")]
    Dimension { expected: usize, found: usize },
    #[error("invalid partition: {0}")]
    Partition(String),
    #[error("unknown label: {0}")]
    Lookup(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
