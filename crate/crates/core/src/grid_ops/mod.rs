//! Grid-to-grid operations: rigid alignment, resolution change, cropping,
//! and sensor visibility.

mod resample;
mod visibility;
mod warp;

pub use resample::{crop_to_range, downsample};
pub use visibility::{compute_visibility, observed_grid, ObservedMask, VisibilityMask};
pub use warp::{relative_transform, warp_grid, WarpMap, WarpMask};
