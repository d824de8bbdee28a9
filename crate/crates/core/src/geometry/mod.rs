//! Exact overlap primitives and a bounding volume hierarchy.
//!
//! All overlap tests treat shapes as closed sets: touching counts as
//! overlapping. Separating-axis tests accept configurations that are within
//! [`SAT_SLACK`] metres of tangency.

mod aabb;
mod bvh;
mod mesh;
mod obb;
pub mod transform;
mod tri;

pub use aabb::{aabb_overlap, Aabb};
pub use bvh::{Bvh, LEAF_SIZE};
pub use mesh::{TriMesh, MIN_TRIANGLE_AREA};
pub use obb::{obb_aabb_overlap, Obb};
pub use transform::RigidTransform;
pub use tri::{tri_aabb_overlap, Triangle};

pub type Vec3 = nalgebra::Vector3<f64>;
pub type Mat3 = nalgebra::Matrix3<f64>;

/// Separation margin below which two shapes are still reported as overlapping.
pub const SAT_SLACK: f64 = 1e-9;
