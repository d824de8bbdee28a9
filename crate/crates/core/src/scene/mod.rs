//! Labeled objects, agents and the voxel grid geometry attached to an agent.

mod grid_spec;
mod label;
mod model;

pub use grid_spec::{
    brute_force_op_count, brute_force_pair_count, grid_shape, GridSpec, VoxelIndex, BENCHMARK_HEIGHT, BENCHMARK_Z_MIN,
};
pub use label::{evaluated_classes, SemanticLabel, NUM_LABELS};
pub use model::{takes_precedence, Agent, Geometry, MeshCollider, Scene, SceneObject};
