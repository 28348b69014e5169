pub mod cli;
pub mod config;
pub mod error;
pub mod explain;
pub mod featurize;
pub mod geometry;
pub mod ingest;
pub mod metrics;
pub mod network;
pub mod pipeline;
mod stats;
pub mod synth;
pub mod vocab;

pub use error::{Error, Result};
