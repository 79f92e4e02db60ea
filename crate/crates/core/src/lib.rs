//! Popularity-thresholded centrality analysis.
//!
//! Load or generate a graph with per-node popularity, sweep a popularity
//! threshold over it, and track how group centralities and the leading
//! adjacency eigenvalues change as low-popularity nodes are removed.

pub mod analysis;
pub mod centrality;
pub mod error;
pub mod graph;
mod linalg;
pub mod sgc;
pub mod spectral;
pub mod sweep;

pub use error::{Error, Result};
