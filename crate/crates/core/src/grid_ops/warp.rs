use rayon::prelude::*;

use crate::annotate::{Mask, VoxelGrid};
use crate::error::Result;
use crate::geometry::RigidTransform;
use crate::scene::{GridSpec, SemanticLabel};

/// Marks destination voxels whose sample point fell inside the source grid.
pub type WarpMask = Mask;

const INVALID: u32 = u32::MAX;

/// Transform taking points in `other`'s frame to points in `ego`'s frame,
/// both poses being expressed in a common world frame.
pub fn relative_transform(ego: &RigidTransform, other: &RigidTransform) -> RigidTransform {
    ego.inverse().compose(other)
}

/// Nearest-voxel sampling table from a source lattice to a destination
/// lattice. `t` maps source-frame points into the destination frame; each
/// destination voxel centre `p` reads the source voxel containing `t⁻¹(p)`.
#[derive(Debug, Clone)]
pub struct WarpMap {
    src: GridSpec,
    dst: GridSpec,
    source: Vec<u32>,
}

impl WarpMap {
    pub fn new(src: &GridSpec, t: &RigidTransform, dst: &GridSpec) -> Self {
        let inv = t.inverse();
        let [nx, ny, _] = dst.shape();
        let mut source = vec![INVALID; dst.voxel_count()];
        source.par_chunks_mut(nx * ny).enumerate().for_each(|(k, slab)| {
            for j in 0..ny {
                for i in 0..nx {
                    let q = inv.apply(&dst.voxel_center([i, j, k]));
                    if let Some(s) = src.point_to_voxel(&q) {
                        slab[i + nx * j] = src.linear(s) as u32;
                    }
                }
            }
        });
        Self {
            src: *src,
            dst: *dst,
            source,
        }
    }

    pub fn dst(&self) -> &GridSpec {
        &self.dst
    }

    /// Source linear index sampled by destination voxel `lin`, if any.
    #[inline]
    pub fn source_of(&self, lin: usize) -> Option<usize> {
        match self.source[lin] {
            INVALID => None,
            s => Some(s as usize),
        }
    }

    pub fn valid_mask(&self) -> WarpMask {
        Mask::from_bits(&self.dst, self.source.iter().map(|&s| s != INVALID).collect()).expect("table sized to dst")
    }

    pub fn warp_labels(&self, grid: &VoxelGrid) -> Result<VoxelGrid> {
        self.check_source(grid.spec())?;
        let src = grid.labels();
        let labels = self
            .source
            .par_iter()
            .map(|&s| {
                if s == INVALID {
                    SemanticLabel::EMPTY
                } else {
                    src[s as usize]
                }
            })
            .collect();
        VoxelGrid::from_labels(self.dst, labels)
    }

    /// Warps a mask; voxels without a source sample are false.
    pub fn warp_mask(&self, mask: &Mask) -> Result<Mask> {
        mask.check_matches(&self.src)?;
        let bits = mask.bits();
        let out = self
            .source
            .par_iter()
            .map(|&s| s != INVALID && bits[s as usize])
            .collect();
        Mask::from_bits(&self.dst, out)
    }

    fn check_source(&self, spec: &GridSpec) -> Result<()> {
        if spec.approx_eq(&self.src) {
            Ok(())
        } else {
            Err(crate::Error::ShapeMismatch(format!(
                "warp table built for shape {:?}, got {:?}",
                self.src.shape(),
                spec.shape()
            )))
        }
    }
}

/// Inverse nearest-voxel warp of `src` into `dst_spec`. Voxels whose sample
/// point leaves the source grid are `empty` and false in the mask.
pub fn warp_grid(src: &VoxelGrid, t: &RigidTransform, dst_spec: &GridSpec) -> (VoxelGrid, WarpMask) {
    let map = WarpMap::new(src.spec(), t, dst_spec);
    let grid = map.warp_labels(src).expect("map built from src spec");
    (grid, map.valid_mask())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Vec3;

    fn spec() -> GridSpec {
        GridSpec::new(Vec3::zeros(), Vec3::repeat(4.0), 1.0).unwrap()
    }

    fn ramp(spec: GridSpec) -> VoxelGrid {
        let labels = (0..spec.voxel_count())
            .map(|l| SemanticLabel::new((l % 23 + 1) as u8).unwrap())
            .collect();
        VoxelGrid::from_labels(spec, labels).unwrap()
    }

    #[test]
    fn identity_is_identity() {
        let g = ramp(spec());
        let (w, m) = warp_grid(&g, &RigidTransform::identity(), g.spec());
        assert_eq!(w, g);
        assert_eq!(m.count(), g.len());
    }

    #[test]
    fn same_pose_relative_is_identity() {
        let p = RigidTransform::from_yaw(0.3, Vec3::new(1.0, 2.0, 3.0));
        assert!(relative_transform(&p, &p).approx_eq(&RigidTransform::identity(), 1e-12));
    }

    #[test]
    fn other_ahead_on_x() {
        let ego = RigidTransform::identity();
        let other = RigidTransform::from_translation(Vec3::new(10.0, 0.0, 0.0));
        let t = relative_transform(&ego, &other);
        // The other agent's origin sits 10 m ahead of the ego.
        assert!((t.translation - Vec3::new(10.0, 0.0, 0.0)).norm() < 1e-12);
        assert!((t.inverse().translation - Vec3::new(-10.0, 0.0, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn one_voxel_shift() {
        let g = ramp(spec());
        let (w, m) = warp_grid(
            &g,
            &RigidTransform::from_translation(Vec3::new(1.0, 0.0, 0.0)),
            g.spec(),
        );
        for l in 0..g.len() {
            let [i, j, k] = g.spec().unravel(l);
            if i == 0 {
                assert!(!m.get(l));
                assert_eq!(w.labels()[l], SemanticLabel::EMPTY);
            } else {
                assert!(m.get(l));
                assert_eq!(w.labels()[l], g.get([i - 1, j, k]));
            }
        }
    }
}
