use crate::error::{Error, Result};
use crate::geometry::{Aabb, Vec3};

/// Voxel index `(i, j, k)` along x, y, z.
pub type VoxelIndex = [usize; 3];

/// Height of every benchmark range grid (m).
pub const BENCHMARK_HEIGHT: f64 = 4.8;
/// Lower z bound of the benchmark range grids in the agent frame (m).
pub const BENCHMARK_Z_MIN: f64 = -2.0;

/// Placement, extent and resolution of a regular voxel grid, expressed in
/// the frame of the agent the grid is attached to.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    min: Vec3,
    extent: Vec3,
    resolution: f64,
    shape: VoxelIndex,
}

impl GridSpec {
    /// Grid spanning `[min, min + extent]`. Every extent must be a positive
    /// integer multiple of `resolution`.
    pub fn new(min: Vec3, extent: Vec3, resolution: f64) -> Result<Self> {
        if !(resolution.is_finite() && resolution > 0.0) {
            return Err(Error::Config(format!("resolution must be positive, got {resolution}")));
        }
        if !min.iter().all(|v| v.is_finite()) {
            return Err(Error::Config("grid origin is not finite".into()));
        }
        let mut shape = [0usize; 3];
        for a in 0..3 {
            let e = extent[a];
            if !(e.is_finite() && e > 0.0) {
                return Err(Error::Config(format!("extent[{a}] must be positive, got {e}")));
            }
            let n = (e / resolution).round();
            if n < 1.0 || (n * resolution - e).abs() > 1e-9 * e.max(1.0) {
                return Err(Error::Config(format!(
                    "extent[{a}] = {e} m is not an integer multiple of the {resolution} m resolution"
                )));
            }
            if n > u32::MAX as f64 {
                return Err(Error::Config(format!("axis {a} has too many voxels ({n})")));
            }
            shape[a] = n as usize;
        }
        // Store the extent the lattice actually spans so that equal
        // lattices compare equal however their extent was written.
        let extent = Vec3::new(
            shape[0] as f64 * resolution,
            shape[1] as f64 * resolution,
            shape[2] as f64 * resolution,
        );
        Ok(Self {
            min,
            extent,
            resolution,
            shape,
        })
    }

    pub fn from_bounds(min: Vec3, max: Vec3, resolution: f64) -> Result<Self> {
        Self::new(min, max - min, resolution)
    }

    /// Grid centred on the agent in x and y with the given extents.
    pub fn centered(extent: Vec3, z_min: f64, resolution: f64) -> Result<Self> {
        Self::new(Vec3::new(-extent.x / 2.0, -extent.y / 2.0, z_min), extent, resolution)
    }

    /// The 100 × 100 × 7 m master annotation grid at 0.1 m:
    /// x ∈ [−50, 50], y ∈ [−50, 50], z ∈ [−2, 5].
    pub fn master() -> Self {
        Self::from_bounds(Vec3::new(-50.0, -50.0, -2.0), Vec3::new(50.0, 50.0, 5.0), 0.1).expect("master spec is valid")
    }

    /// Square benchmark range of side `range` m, 4.8 m tall, z ∈ [−2, 2.8].
    pub fn benchmark(range: f64, resolution: f64) -> Result<Self> {
        Self::centered(Vec3::new(range, range, BENCHMARK_HEIGHT), BENCHMARK_Z_MIN, resolution)
    }

    /// The three benchmark settings: 25.6 m @ 0.1, 51.2 m @ 0.2, 76.8 m @ 0.3.
    pub fn benchmark_ranges() -> [Self; 3] {
        [(25.6, 0.1), (51.2, 0.2), (76.8, 0.3)]
            .map(|(r, res)| Self::benchmark(r, res).expect("benchmark spec is valid"))
    }

    /// Benchmark voxel size for a range in metres: the three settings all use 256 columns.
    pub fn benchmark_resolution(range: f64) -> f64 {
        range / 256.0
    }

    pub fn min(&self) -> Vec3 {
        self.min
    }

    pub fn max(&self) -> Vec3 {
        self.min + self.extent
    }

    pub fn extent(&self) -> Vec3 {
        self.extent
    }

    pub fn resolution(&self) -> f64 {
        self.resolution
    }

    pub fn shape(&self) -> VoxelIndex {
        self.shape
    }

    pub fn voxel_count(&self) -> usize {
        self.shape[0] * self.shape[1] * self.shape[2]
    }

    pub fn bounds(&self) -> Aabb {
        Aabb::new(self.min, self.max())
    }

    pub fn contains_index(&self, idx: VoxelIndex) -> bool {
        (0..3).all(|a| idx[a] < self.shape[a])
    }

    /// Linear offset with x fastest, then y, then z.
    #[inline]
    pub fn linear(&self, idx: VoxelIndex) -> usize {
        idx[0] + self.shape[0] * (idx[1] + self.shape[1] * idx[2])
    }

    #[inline]
    pub fn unravel(&self, lin: usize) -> VoxelIndex {
        let nx = self.shape[0];
        let ny = self.shape[1];
        [lin % nx, (lin / nx) % ny, lin / (nx * ny)]
    }

    /// Closed cell `[min + i·res, min + (i+1)·res]` per axis.
    pub fn voxel_aabb(&self, idx: VoxelIndex) -> Result<Aabb> {
        if !self.contains_index(idx) {
            return Err(Error::IndexOutOfBounds {
                index: idx,
                shape: self.shape,
            });
        }
        Ok(self.cell(idx))
    }

    /// [`voxel_aabb`](Self::voxel_aabb) without the bounds check.
    #[inline]
    pub fn cell(&self, idx: VoxelIndex) -> Aabb {
        let r = self.resolution;
        let lo = Vec3::new(
            self.min.x + idx[0] as f64 * r,
            self.min.y + idx[1] as f64 * r,
            self.min.z + idx[2] as f64 * r,
        );
        let hi = Vec3::new(
            self.min.x + (idx[0] + 1) as f64 * r,
            self.min.y + (idx[1] + 1) as f64 * r,
            self.min.z + (idx[2] + 1) as f64 * r,
        );
        Aabb { min: lo, max: hi }
    }

    #[inline]
    pub fn voxel_center(&self, idx: VoxelIndex) -> Vec3 {
        let r = self.resolution;
        Vec3::new(
            self.min.x + (idx[0] as f64 + 0.5) * r,
            self.min.y + (idx[1] as f64 + 0.5) * r,
            self.min.z + (idx[2] as f64 + 0.5) * r,
        )
    }

    /// Floor-convention inverse of [`voxel_aabb`](Self::voxel_aabb). Points
    /// on the upper grid boundary, outside the grid, or non-finite map to `None`.
    #[inline]
    pub fn point_to_voxel(&self, p: &Vec3) -> Option<VoxelIndex> {
        let mut idx = [0usize; 3];
        for a in 0..3 {
            let f = ((p[a] - self.min[a]) / self.resolution).floor();
            if !(f >= 0.0 && f < self.shape[a] as f64) {
                return None;
            }
            idx[a] = f as usize;
        }
        Some(idx)
    }

    /// Inclusive index range of the cells whose closed box overlaps `b`,
    /// clipped to the grid. `None` if no cell does.
    pub fn index_range(&self, b: &Aabb) -> Option<(VoxelIndex, VoxelIndex)> {
        let mut lo = [0usize; 3];
        let mut hi = [0usize; 3];
        let r = self.resolution;
        for a in 0..3 {
            let n = self.shape[a] as i64;
            let o = self.min[a];
            let lf = ((b.min[a] - o) / r).floor();
            let hf = ((b.max[a] - o) / r).floor();
            if lf.is_nan() || hf.is_nan() {
                return None;
            }
            // Estimates may be off by one through rounding; settle them
            // against the same cell arithmetic `cell` uses.
            let mut l = (lf.clamp(-2.0, n as f64 + 1.0) as i64).clamp(0, n - 1);
            while l > 0 && o + l as f64 * r >= b.min[a] {
                l -= 1;
            }
            while l < n && o + (l + 1) as f64 * r < b.min[a] {
                l += 1;
            }
            let mut h = (hf.clamp(-2.0, n as f64 + 1.0) as i64).clamp(0, n - 1);
            while h < n - 1 && o + (h + 1) as f64 * r <= b.max[a] {
                h += 1;
            }
            while h >= 0 && o + h as f64 * r > b.max[a] {
                h -= 1;
            }
            if l > h || l >= n || h < 0 {
                return None;
            }
            lo[a] = l as usize;
            hi[a] = h as usize;
        }
        Some((lo, hi))
    }

    /// True when both specs describe the same lattice (origin, extent, resolution).
    pub fn approx_eq(&self, other: &GridSpec) -> bool {
        const TOL: f64 = 1e-9;
        self.shape == other.shape
            && (self.resolution - other.resolution).abs() <= TOL
            && (self.min - other.min).amax() <= TOL
    }
}

/// Voxel count `(nx, ny, nz)` of a spec.
pub fn grid_shape(spec: &GridSpec) -> VoxelIndex {
    spec.shape()
}

/// Number of per-voxel detection operations an exhaustive scan of `spec`
/// needs for one frame. Multiply by the object count for pairwise tests,
/// see [`brute_force_pair_count`].
pub fn brute_force_op_count(spec: &GridSpec, _num_objects: usize) -> u64 {
    let [nx, ny, nz] = spec.shape();
    nx as u64 * ny as u64 * nz as u64
}

/// Voxel–object fine tests an exhaustive scan performs.
pub fn brute_force_pair_count(spec: &GridSpec, num_objects: usize) -> u64 {
    brute_force_op_count(spec, num_objects) * num_objects as u64
}
