//! Semantic voxel ground truth, single-agent visibility and multi-agent
//! fusion for collaborative 3D semantic occupancy benchmarks.

pub mod error;
pub mod geometry;
pub mod grid_ops;
pub mod io;
pub mod scene;
pub mod synth;

pub use error::{Error, Result};
pub mod annotate;
pub mod fusion;
