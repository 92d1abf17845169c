//! Measures how cleanly harmful and harmless prompt embeddings separate in a
//! model's hidden-representation space, and how that separation changes
//! between a reference checkpoint and its aligned counterpart.

pub mod analysis;
pub mod cli;
pub mod dataset;
pub mod error;
pub mod metrics;
pub mod pca;
pub mod render;

pub use error::{Error, Result};
