//! Semantic voxel annotation: a seeded, object-local pipeline and the
//! exhaustive scan it is checked against.
//!
//! The pipeline runs in three stages. A top-down trace descends every
//! footprint column of each object and records the first voxel that passes
//! the fine overlap test. A breadth-first search then grows each object's
//! seeds over 6-connected neighbours, fine-testing candidates as it goes.
//! Finally the per-object voxel sets are stamped into a label grid.
//!
//! A connected component of an object that lies entirely underneath
//! another component of the same object, in every column it occupies, never
//! receives a seed and is therefore missed. [`brute_force_annotate`] has no
//! such blind spot; comparing the two exposes the difference.

mod brute;
mod pipeline;
mod voxel_grid;

pub use brute::{brute_force_annotate, BruteForceOptions, DEFAULT_VOXEL_BUDGET};
pub use pipeline::{
    annotate, assign_labels, occupancy_completion, top_down_trace, AnnotationStats, ObjectOccupancy, ObjectSeeds,
    ObjectStats, SeedMap,
};
pub use voxel_grid::{Mask, VoxelGrid};
