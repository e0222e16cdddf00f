//! Library surface of the flowscope CLI: run configuration and the staged
//! pipeline, kept separate from argument parsing so tests can drive them
//! directly.

pub mod config;
pub mod pipeline;
