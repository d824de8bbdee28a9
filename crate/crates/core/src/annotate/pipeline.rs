use std::collections::VecDeque;
use std::time::{Duration, Instant};

use rayon::prelude::*;

use super::VoxelGrid;
use crate::scene::{GridSpec, Scene, SceneObject, VoxelIndex};

/// Seed voxels found by the top-down trace, one entry per scene object in
/// scene order.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct SeedMap {
    pub objects: Vec<ObjectSeeds>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ObjectSeeds {
    pub object_id: u32,
    pub seeds: Vec<VoxelIndex>,
}

impl SeedMap {
    pub fn total(&self) -> usize {
        self.objects.iter().map(|o| o.seeds.len()).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.total() == 0
    }

    pub fn seeds_for(&self, object_id: u32) -> Option<&[VoxelIndex]> {
        self.objects
            .iter()
            .find(|o| o.object_id == object_id)
            .map(|o| o.seeds.as_slice())
    }
}

/// Voxels (linear indices) found occupied by one object.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ObjectOccupancy {
    pub object_id: u32,
    pub voxels: Vec<u32>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct ObjectStats {
    pub object_id: u32,
    pub seeds: u64,
    pub fine_checks: u64,
    pub occupied: u64,
}

/// Work counters of one annotation run.
///
/// Equality ignores `wall_time`.
#[derive(Debug, Clone, Default)]
pub struct AnnotationStats {
    /// Voxel–object fine overlap tests.
    pub fine_checks_performed: u64,
    /// Grid cells visited individually (exhaustive scans only).
    pub voxel_visits: u64,
    /// Non-empty voxels of the output grid.
    pub voxels_occupied: u64,
    pub objects: Vec<ObjectStats>,
    pub wall_time: Duration,
}

impl PartialEq for AnnotationStats {
    fn eq(&self, other: &Self) -> bool {
        self.fine_checks_performed == other.fine_checks_performed
            && self.voxel_visits == other.voxel_visits
            && self.voxels_occupied == other.voxels_occupied
            && self.objects == other.objects
    }
}

const UNKNOWN: u8 = 0;
const OCCUPIED: u8 = 1;
const FREE: u8 = 2;
/// Occupied and already queued by the BFS.
const QUEUED: u8 = 3;

/// Per-object memo of fine-test outcomes over the object's (padded,
/// clipped) index box. Shared by the trace and the BFS so that no voxel is
/// tested twice for the same object.
struct ObjectWorkspace<'a> {
    object: &'a SceneObject,
    spec: &'a GridSpec,
    lo: VoxelIndex,
    dims: VoxelIndex,
    state: Vec<u8>,
    checks: u64,
}

impl<'a> ObjectWorkspace<'a> {
    fn new(object: &'a SceneObject, spec: &'a GridSpec) -> Option<Self> {
        let (lo, hi) = spec.index_range(object.bounds())?;
        let dims = [hi[0] - lo[0] + 1, hi[1] - lo[1] + 1, hi[2] - lo[2] + 1];
        Some(Self {
            object,
            spec,
            lo,
            dims,
            state: vec![UNKNOWN; dims[0] * dims[1] * dims[2]],
            checks: 0,
        })
    }

    #[inline]
    fn local(&self, idx: VoxelIndex) -> Option<usize> {
        let mut l = [0usize; 3];
        for a in 0..3 {
            l[a] = idx[a].checked_sub(self.lo[a])?;
            if l[a] >= self.dims[a] {
                return None;
            }
        }
        Some(l[0] + self.dims[0] * (l[1] + self.dims[1] * l[2]))
    }

    /// Fine test with memoisation. `None` outside the object's index box.
    #[inline]
    fn occupied(&mut self, idx: VoxelIndex) -> Option<bool> {
        let slot = self.local(idx)?;
        match self.state[slot] {
            OCCUPIED | QUEUED => Some(true),
            FREE => Some(false),
            _ => {
                self.checks += 1;
                let hit = self.object.overlaps(&self.spec.cell(idx));
                self.state[slot] = if hit { OCCUPIED } else { FREE };
                Some(hit)
            }
        }
    }

    /// Descends every footprint column from the top and records the first hit.
    fn trace(&mut self) -> Vec<VoxelIndex> {
        let mut seeds = Vec::new();
        let top = self.lo[2] + self.dims[2] - 1;
        for j in self.lo[1]..self.lo[1] + self.dims[1] {
            for i in self.lo[0]..self.lo[0] + self.dims[0] {
                for k in (self.lo[2]..=top).rev() {
                    if self.occupied([i, j, k]) == Some(true) {
                        seeds.push([i, j, k]);
                        break;
                    }
                }
            }
        }
        seeds
    }

    #[inline]
    fn visit(&mut self, idx: VoxelIndex, queue: &mut VecDeque<VoxelIndex>) {
        let Some(slot) = self.local(idx) else { return };
        if self.state[slot] != QUEUED && self.occupied(idx) == Some(true) {
            self.state[slot] = QUEUED;
            queue.push_back(idx);
        }
    }

    /// Breadth-first expansion over 6-neighbours from `seeds`.
    fn complete(&mut self, seeds: &[VoxelIndex]) -> Vec<u32> {
        let mut queue: VecDeque<VoxelIndex> = VecDeque::with_capacity(seeds.len());
        let mut out = Vec::with_capacity(seeds.len());
        for &s in seeds {
            self.visit(s, &mut queue);
        }
        while let Some(v) = queue.pop_front() {
            out.push(self.spec.linear(v) as u32);
            for n in neighbours(v, self.spec.shape()) {
                self.visit(n, &mut queue);
            }
        }
        out
    }
}

fn neighbours(v: VoxelIndex, shape: VoxelIndex) -> impl Iterator<Item = VoxelIndex> {
    const STEPS: [(usize, isize); 6] = [(2, 1), (2, -1), (0, -1), (0, 1), (1, 1), (1, -1)];
    STEPS.into_iter().filter_map(move |(axis, d)| {
        let c = v[axis] as isize + d;
        if c < 0 || c as usize >= shape[axis] {
            return None;
        }
        let mut n = v;
        n[axis] = c as usize;
        Some(n)
    })
}

/// Top-down trace: for every column of each object's footprint, the topmost
/// voxel that passes the fine overlap test becomes a seed.
pub fn top_down_trace(scene: &Scene, spec: &GridSpec) -> SeedMap {
    let objects = scene
        .objects()
        .par_iter()
        .map(|o| ObjectSeeds {
            object_id: o.id,
            seeds: ObjectWorkspace::new(o, spec).map(|mut w| w.trace()).unwrap_or_default(),
        })
        .collect();
    SeedMap { objects }
}

/// Expands each object's seeds breadth-first over 6-connected neighbours,
/// fine-testing every candidate at most once per object. Objects are
/// processed in parallel; the result follows scene order.
pub fn occupancy_completion(
    scene: &Scene,
    seeds: &SeedMap,
    spec: &GridSpec,
) -> (Vec<ObjectOccupancy>, AnnotationStats) {
    let start = Instant::now();
    let results: Vec<(ObjectOccupancy, ObjectStats)> = scene
        .objects()
        .par_iter()
        .map(|o| {
            let s = seeds.seeds_for(o.id).unwrap_or(&[]);
            let (voxels, checks) = match ObjectWorkspace::new(o, spec) {
                Some(mut w) => {
                    let v = w.complete(s);
                    (v, w.checks)
                }
                None => (Vec::new(), 0),
            };
            let stats = ObjectStats {
                object_id: o.id,
                seeds: s.len() as u64,
                fine_checks: checks,
                occupied: voxels.len() as u64,
            };
            (
                ObjectOccupancy {
                    object_id: o.id,
                    voxels,
                },
                stats,
            )
        })
        .collect();
    collect_stats(results, start)
}

fn collect_stats(
    results: Vec<(ObjectOccupancy, ObjectStats)>,
    start: Instant,
) -> (Vec<ObjectOccupancy>, AnnotationStats) {
    let mut stats = AnnotationStats::default();
    let mut occ = Vec::with_capacity(results.len());
    for (o, s) in results {
        stats.fine_checks_performed += s.fine_checks;
        stats.objects.push(s);
        occ.push(o);
    }
    stats.wall_time = start.elapsed();
    (occ, stats)
}

/// Stamps object labels into an empty grid. A voxel claimed by several
/// objects takes the label of the smallest `volume_hint`, ties going to the
/// lower object id, independent of scene order.
pub fn assign_labels(occupied: &[ObjectOccupancy], scene: &Scene, spec: &GridSpec) -> VoxelGrid {
    let mut grid = VoxelGrid::empty(*spec);
    let by_id = |id: u32| scene.objects().iter().find(|o| o.id == id);
    let mut order: Vec<(&ObjectOccupancy, &SceneObject)> = occupied
        .iter()
        .filter_map(|occ| by_id(occ.object_id).map(|o| (occ, o)))
        .collect();
    // Lowest priority first so the winner writes last.
    order.sort_by(|a, b| {
        let (va, ia) = a.1.priority_key();
        let (vb, ib) = b.1.priority_key();
        vb.total_cmp(&va).then(ib.cmp(&ia))
    });
    let labels = grid.labels_mut();
    for (occ, obj) in order {
        for &v in &occ.voxels {
            labels[v as usize] = obj.label;
        }
    }
    grid
}

/// The full pipeline: trace, per-object BFS completion, label assignment.
pub fn annotate(scene: &Scene, spec: &GridSpec) -> (VoxelGrid, AnnotationStats) {
    let start = Instant::now();
    let results: Vec<(ObjectOccupancy, ObjectStats)> = scene
        .objects()
        .par_iter()
        .map(|o| {
            let (voxels, seeds, checks) = match ObjectWorkspace::new(o, spec) {
                Some(mut w) => {
                    let seeds = w.trace();
                    let v = w.complete(&seeds);
                    (v, seeds.len(), w.checks)
                }
                None => (Vec::new(), 0, 0),
            };
            let stats = ObjectStats {
                object_id: o.id,
                seeds: seeds as u64,
                fine_checks: checks,
                occupied: voxels.len() as u64,
            };
            (
                ObjectOccupancy {
                    object_id: o.id,
                    voxels,
                },
                stats,
            )
        })
        .collect();
    let (occ, mut stats) = collect_stats(results, start);
    let grid = assign_labels(&occ, scene, spec);
    stats.voxels_occupied = grid.count_non_empty() as u64;
    stats.wall_time = start.elapsed();
    (grid, stats)
}
