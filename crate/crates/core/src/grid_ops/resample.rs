use rayon::prelude::*;

use crate::annotate::VoxelGrid;
use crate::error::{Error, Result};
use crate::scene::{GridSpec, SemanticLabel, NUM_LABELS};

/// Coarsens a grid by an integer `factor` on every axis.
///
/// A coarse voxel is non-empty iff at least one of its fine voxels is; its
/// label is the most frequent non-empty fine label, ties going to the lower
/// code. Occupied beats empty so that thin structures survive.
pub fn downsample(grid: &VoxelGrid, factor: usize) -> Result<VoxelGrid> {
    let shape = grid.shape();
    if factor == 0 {
        return Err(Error::Config("downsample factor must be positive".into()));
    }
    if let Some(a) = (0..3).find(|&a| !shape[a].is_multiple_of(factor)) {
        return Err(Error::Config(format!(
            "grid shape {shape:?} is not divisible by factor {factor} on axis {a}"
        )));
    }
    let src = grid.spec();
    let spec = GridSpec::new(src.min(), src.extent(), src.resolution() * factor as f64)?;
    let [cx, cy, _] = spec.shape();
    let fine = grid.labels();
    let mut out = VoxelGrid::empty(spec);
    out.labels_mut()
        .par_chunks_mut(cx * cy)
        .enumerate()
        .for_each(|(ck, slab)| {
            let mut counts = [0u32; NUM_LABELS];
            for cj in 0..cy {
                for ci in 0..cx {
                    counts.fill(0);
                    for dk in 0..factor {
                        for dj in 0..factor {
                            let base = src.linear([ci * factor, cj * factor + dj, ck * factor + dk]);
                            for &l in &fine[base..base + factor] {
                                counts[l.code() as usize] += 1;
                            }
                        }
                    }
                    let mut best = 0usize;
                    for code in 1..NUM_LABELS {
                        if counts[code] > counts[best] || (best == 0 && counts[code] > 0) {
                            best = code;
                        }
                    }
                    slab[ci + cx * cj] = SemanticLabel::new(best as u8).expect("code in range");
                }
            }
        });
    Ok(out)
}

/// Copies the sub-grid covering `dst` out of `grid`. Both must share the
/// resolution and `dst` must lie on `grid`'s lattice, inside its bounds.
pub fn crop_to_range(grid: &VoxelGrid, dst: &GridSpec) -> Result<VoxelGrid> {
    let src = grid.spec();
    if (src.resolution() - dst.resolution()).abs() > 1e-9 {
        return Err(Error::Config(format!(
            "crop resolution {} m differs from grid resolution {} m",
            dst.resolution(),
            src.resolution()
        )));
    }
    let mut off = [0usize; 3];
    for (a, o) in off.iter_mut().enumerate() {
        let f = (dst.min()[a] - src.min()[a]) / src.resolution();
        let r = f.round();
        if (f - r).abs() > 1e-6 {
            return Err(Error::Config(format!(
                "crop origin is off the grid lattice on axis {a}"
            )));
        }
        if r < 0.0 || r as usize + dst.shape()[a] > src.shape()[a] {
            return Err(Error::Config(format!("crop region leaves the grid on axis {a}")));
        }
        *o = r as usize;
    }
    let [nx, ny, _] = dst.shape();
    let labels = grid.labels();
    let mut out = VoxelGrid::empty(*dst);
    out.labels_mut()
        .par_chunks_mut(nx * ny)
        .enumerate()
        .for_each(|(k, slab)| {
            for j in 0..ny {
                let s = src.linear([off[0], off[1] + j, off[2] + k]);
                slab[nx * j..nx * (j + 1)].copy_from_slice(&labels[s..s + nx]);
            }
        });
    Ok(out)
}
