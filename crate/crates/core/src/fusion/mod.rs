//! Collaborator selection, pose noise, mask-guided fusion, IoU metrics and
//! the sweep driver tying them together.

mod bench;
mod fuse;
mod metrics;
mod noise;

pub use bench::{
    derive_range_gt, fuse_cell, prepare_views, ranges_from_extents, run_benchmark, run_cells, AgentViews, BenchConfig,
    BenchReport, BenchRun, CellFailure, CellRecord, CellTiming, GtSource, PrepTiming, RangeInfo, RangeView,
};
pub use fuse::{fuse, fuse_with, select_collaborators, Fused, FusionMode, Neighbor, MAX_COLLABORATORS};
pub use metrics::{evaluate, ClassCounts, EvalReport};
pub use noise::{derive_stream, perturb_transform, NoiseModel};
