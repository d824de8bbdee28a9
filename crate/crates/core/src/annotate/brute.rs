use std::time::Instant;

use rayon::prelude::*;

use super::{AnnotationStats, ObjectStats, VoxelGrid};
use crate::error::{Error, Result};
use crate::geometry::{Aabb, Bvh};
use crate::scene::{takes_precedence, GridSpec, Scene, SemanticLabel};

/// Largest grid the exhaustive annotator accepts without `force` (256³).
pub const DEFAULT_VOXEL_BUDGET: u64 = 1 << 24;

#[derive(Debug, Clone, Copy)]
pub struct BruteForceOptions {
    pub voxel_budget: u64,
    pub force: bool,
}

impl Default for BruteForceOptions {
    fn default() -> Self {
        Self {
            voxel_budget: DEFAULT_VOXEL_BUDGET,
            force: false,
        }
    }
}

/// Exhaustive reference annotator: every voxel is visited and fine-tested
/// against every object whose bounds reach it.
///
/// `fine_checks_performed` reports the exhaustive voxel × object count;
/// pairs the BVH rejects count as resolved checks. `voxel_visits` is the
/// number of grid cells.
pub fn brute_force_annotate(
    scene: &Scene,
    spec: &GridSpec,
    opts: BruteForceOptions,
) -> Result<(VoxelGrid, AnnotationStats)> {
    let voxels = spec.voxel_count() as u64;
    if voxels > opts.voxel_budget && !opts.force {
        return Err(Error::BudgetExceeded {
            voxels,
            budget: opts.voxel_budget,
        });
    }
    let start = Instant::now();
    let objects = scene.objects();
    let bounds: Vec<Aabb> = objects.iter().map(|o| *o.bounds()).collect();
    let bvh = Bvh::build(&bounds);
    let keys: Vec<(f64, u32)> = objects.iter().map(|o| o.priority_key()).collect();

    let [nx, ny, _] = spec.shape();
    let slab = nx * ny;
    let mut grid = VoxelGrid::empty(*spec);
    let per_object: Vec<u64> = grid
        .labels_mut()
        .par_chunks_mut(slab)
        .enumerate()
        .map(|(k, layer)| {
            let mut counts = vec![0u64; objects.len()];
            let mut hits: Vec<usize> = Vec::new();
            for j in 0..ny {
                for i in 0..nx {
                    let cell = spec.cell([i, j, k]);
                    hits.clear();
                    bvh.query_with(&cell, |o| {
                        if objects[o].overlaps(&cell) {
                            hits.push(o);
                        }
                    });
                    let mut winner: Option<usize> = None;
                    for &o in &hits {
                        counts[o] += 1;
                        winner = match winner {
                            Some(w) if !takes_precedence(keys[o], keys[w]) => Some(w),
                            _ => Some(o),
                        };
                    }
                    if let Some(w) = winner {
                        layer[i + nx * j] = objects[w].label;
                    }
                }
            }
            counts
        })
        .reduce(
            || vec![0u64; objects.len()],
            |mut a, b| {
                a.iter_mut().zip(b).for_each(|(x, y)| *x += y);
                a
            },
        );

    let stats = AnnotationStats {
        fine_checks_performed: voxels * objects.len() as u64,
        voxel_visits: voxels,
        voxels_occupied: grid.labels().iter().filter(|l| **l != SemanticLabel::EMPTY).count() as u64,
        objects: objects
            .iter()
            .zip(per_object)
            .map(|(o, occupied)| ObjectStats {
                object_id: o.id,
                seeds: 0,
                fine_checks: voxels,
                occupied,
            })
            .collect(),
        wall_time: start.elapsed(),
    };
    Ok((grid, stats))
}
