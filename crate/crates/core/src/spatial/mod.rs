//! Exact nearest-neighbor search and the bird's-eye-view confidence grid.

mod confidence;
mod kdtree;

pub use confidence::{
    build_confidence_grid, sample_confidence, ConfidenceGrid, DEFAULT_CELL, DEFAULT_SIGMA,
};
pub use kdtree::{build_index, knn, KdIndex, KdTree, Neighbor};
