use rayon::prelude::*;

use crate::annotate::{Mask, VoxelGrid};
use crate::error::Result;
use crate::geometry::Vec3;
use crate::scene::{Agent, GridSpec, SemanticLabel, VoxelIndex};

pub type VisibilityMask = Mask;
pub type ObservedMask = Mask;

/// Horizontal field-of-view and range test of a point against a sensor.
#[derive(Debug, Clone, Copy)]
struct Frustum {
    origin: Vec3,
    forward_xy: (f64, f64),
    cos_half_fov: f64,
    full_circle: bool,
    range: f64,
}

impl Frustum {
    fn new(agent: &Agent) -> Self {
        let f = agent.forward();
        let n = (f.x * f.x + f.y * f.y).sqrt();
        let forward_xy = if n > 1e-12 { (f.x / n, f.y / n) } else { (1.0, 0.0) };
        Self {
            origin: agent.sensor_position(),
            forward_xy,
            cos_half_fov: (agent.fov_horizontal_deg.to_radians() / 2.0).cos(),
            full_circle: agent.fov_horizontal_deg >= 360.0,
            range: agent.max_range,
        }
    }

    #[inline]
    fn contains(&self, p: &Vec3) -> bool {
        let d = p - self.origin;
        if d.norm_squared() > self.range * self.range {
            return false;
        }
        if self.full_circle {
            return true;
        }
        let h = (d.x * d.x + d.y * d.y).sqrt();
        if h < 1e-12 {
            return true;
        }
        (d.x * self.forward_xy.0 + d.y * self.forward_xy.1) / h >= self.cos_half_fov - 1e-12
    }
}

/// Chessboard distance from every voxel to the nearest occupied voxel,
/// saturating at 255; occupied voxels hold 0. Exact under the two-pass
/// chamfer sweep with all 26 neighbours at unit weight.
fn clearance_map(grid: &VoxelGrid) -> Vec<u8> {
    let [nx, ny, nz] = grid.spec().shape().map(|n| n as i64);
    let mut d: Vec<u8> = grid
        .labels()
        .iter()
        .map(|l| if l.is_empty() { u8::MAX } else { 0 })
        .collect();
    let at = |i: i64, j: i64, k: i64| (i + nx * (j + ny * k)) as usize;
    // Neighbour offsets that precede a voxel in x-fastest raster order.
    let mut before = Vec::with_capacity(13);
    for dk in -1..=1i64 {
        for dj in -1..=1i64 {
            for di in -1..=1i64 {
                if dk < 0 || (dk == 0 && (dj < 0 || (dj == 0 && di < 0))) {
                    before.push((di, dj, dk));
                }
            }
        }
    }
    let sweep = |d: &mut Vec<u8>, sign: i64, order: &mut dyn Iterator<Item = (i64, i64, i64)>| {
        for (i, j, k) in order {
            let here = at(i, j, k);
            let mut best = d[here];
            if best == 0 {
                continue;
            }
            for &(di, dj, dk) in &before {
                let (a, b, c) = (i + sign * di, j + sign * dj, k + sign * dk);
                if a >= 0 && a < nx && b >= 0 && b < ny && c >= 0 && c < nz {
                    best = best.min(d[at(a, b, c)].saturating_add(1));
                }
            }
            d[here] = best;
        }
    };
    let cells = move |rev: bool| {
        let n = nx * ny * nz;
        (0..n).map(move |l| {
            let l = if rev { n - 1 - l } else { l };
            (l % nx, (l / nx) % ny, l / (nx * ny))
        })
    };
    sweep(&mut d, 1, &mut cells(false));
    sweep(&mut d, -1, &mut cells(true));
    d
}

/// Ray tracer over a clearance map: wherever a voxel lies `r` cells from
/// the nearest occupied voxel, the ray crosses the empty cube of radius
/// `r − 1` around it in one jump. Skipping never changes the outcome, since
/// the cube holds no occluder whichever of its cells the ray would visit.
struct Tracer {
    spec: GridSpec,
    clearance: Vec<u8>,
}

/// `v.floor() as i64` without a libm call on targets lacking a rounding
/// instruction.
#[inline]
fn floor_i64(v: f64) -> i64 {
    let t = v as i64;
    if (t as f64) > v {
        t - 1
    } else {
        t
    }
}

/// Per-ray constants: the ray crosses the boundary ahead of cell `c` on
/// axis `a` at parameter `c · slope[a] + offset[a]`.
struct Ray {
    step: [i64; 3],
    slope: [f64; 3],
    inv_slope: [f64; 3],
    offset: [f64; 3],
}

impl Ray {
    fn new(spec: &GridSpec, from: &Vec3, d: &Vec3) -> Self {
        let (lo, res) = (spec.min(), spec.resolution());
        let mut ray = Ray {
            step: [0; 3],
            slope: [0.0; 3],
            inv_slope: [0.0; 3],
            offset: [f64::INFINITY; 3],
        };
        for a in 0..3 {
            let inv = 1.0 / d[a];
            if d[a] > 0.0 {
                ray.step[a] = 1;
                ray.slope[a] = res * inv;
                ray.inv_slope[a] = d[a] / res;
                ray.offset[a] = (lo[a] + res - from[a]) * inv;
            } else if d[a] < 0.0 {
                ray.step[a] = -1;
                ray.slope[a] = res * inv;
                ray.inv_slope[a] = d[a] / res;
                ray.offset[a] = (lo[a] - from[a]) * inv;
            }
        }
        ray
    }

    /// Estimate of the first cell, walking along the ray, whose leading
    /// crossing on axis `a` is at or after `t`.
    #[inline]
    fn cell_leaving_after(&self, a: usize, t: f64) -> i64 {
        let x = (t - self.offset[a]) * self.inv_slope[a];
        if self.step[a] > 0 {
            -floor_i64(-x)
        } else {
            floor_i64(x)
        }
    }

    #[inline]
    fn crossing(&self, a: usize, c: i64) -> f64 {
        if self.step[a] == 0 {
            f64::INFINITY
        } else {
            c as f64 * self.slope[a] + self.offset[a]
        }
    }
}

impl Tracer {
    fn new(grid: &VoxelGrid) -> Self {
        Self {
            spec: *grid.spec(),
            clearance: clearance_map(grid),
        }
    }

    /// Walks the voxels pierced by the segment from `from` to the centre of
    /// `target` (3D DDA) and reports whether any occupied voxel other than
    /// the target, and other than `skip`, lies on the way.
    fn ray_clear(&self, from: &Vec3, target: VoxelIndex, skip: Option<VoxelIndex>) -> bool {
        let spec = &self.spec;
        let to = spec.voxel_center(target);
        let d = to - from;
        let lo = spec.min();
        let hi = spec.max();
        let res = spec.resolution();
        let shape = spec.shape().map(|n| n as i64);

        // Clip the segment to the grid box.
        let mut t_enter = 0.0f64;
        for a in 0..3 {
            if d[a] != 0.0 {
                let t0 = (lo[a] - from[a]) / d[a];
                let t1 = (hi[a] - from[a]) / d[a];
                t_enter = t_enter.max(t0.min(t1));
            }
        }
        if t_enter >= 1.0 {
            return true;
        }
        let start = from + d * t_enter;
        let ray = Ray::new(spec, from, &d);
        let mut cell = [0i64; 3];
        for a in 0..3 {
            cell[a] = floor_i64((start[a] - lo[a]) / res).clamp(0, shape[a] - 1);
        }
        let mut t_max = [0.0; 3];
        for a in 0..3 {
            t_max[a] = ray.crossing(a, cell[a]);
        }
        let target = target.map(|v| v as i64);
        let skip = skip.map(|s| s.map(|v| v as i64)).unwrap_or([-1; 3]);
        let (nx, ny) = (shape[0], shape[1]);
        loop {
            if cell == target {
                return true;
            }
            let lin = (cell[0] + nx * (cell[1] + ny * cell[2])) as usize;
            let r = self.clearance[lin] as i64;
            if r == 0 {
                if cell != skip {
                    return false;
                }
            } else if r >= 2 {
                let h = r - 1;
                if (0..3).all(|a| (target[a] - cell[a]).abs() <= h) {
                    // The rest of the way lies inside this empty cube.
                    return true;
                }
                // Jump to the first boundary leaving the cube, then take
                // every crossing that happens strictly before it.
                let mut t_exit = f64::INFINITY;
                let mut cube = [(0i64, 0i64); 3];
                for a in 0..3 {
                    let (first, last) = ((cell[a] - h).max(0), (cell[a] + h).min(shape[a] - 1));
                    cube[a] = (first, last);
                    match ray.step[a] {
                        1 => t_exit = t_exit.min(ray.crossing(a, last)),
                        -1 => t_exit = t_exit.min(ray.crossing(a, first)),
                        _ => {}
                    }
                }
                if t_exit > 1.0 {
                    return true;
                }
                for a in 0..3 {
                    if t_max[a] >= t_exit {
                        continue;
                    }
                    // Land on the cell whose leading crossing is the first at
                    // or after t_exit, correcting the estimate for rounding.
                    let step = ray.step[a];
                    let (first, last) = cube[a];
                    let start = cell[a];
                    let mut c = ray.cell_leaving_after(a, t_exit).clamp(first, last);
                    if (c - start) * step < 0 {
                        c = start;
                    }
                    while ray.crossing(a, c) < t_exit {
                        c += step;
                    }
                    while c != start && ray.crossing(a, c - step) >= t_exit {
                        c -= step;
                    }
                    cell[a] = c;
                    t_max[a] = ray.crossing(a, c);
                }
                if cell == target {
                    return true;
                }
            }
            let a = if t_max[0] <= t_max[1] && t_max[0] <= t_max[2] {
                0
            } else if t_max[1] <= t_max[2] {
                1
            } else {
                2
            };
            if t_max[a] > 1.0 {
                // Past the target centre without entering its cell: rounding
                // on a cell boundary. Nothing blocked the way.
                return true;
            }
            cell[a] += ray.step[a];
            if cell[a] < 0 || cell[a] >= shape[a] {
                return true;
            }
            t_max[a] = ray.crossing(a, cell[a]);
        }
    }
}

/// Voxels of `gt` the agent's sensor sees: centre within range and
/// horizontal field of view, and a clear straight line from the sensor to
/// the centre. Occupied voxels are visible themselves but hide what lies
/// behind them. The voxel holding the sensor never occludes.
///
/// The agent pose must be expressed in the grid's frame.
pub fn compute_visibility(gt: &VoxelGrid, agent: &Agent) -> VisibilityMask {
    let spec = *gt.spec();
    let frustum = Frustum::new(agent);
    let origin = frustum.origin;
    let skip = spec.point_to_voxel(&origin);
    let tracer = Tracer::new(gt);
    let [nx, ny, _] = spec.shape();
    let mut bits = vec![false; spec.voxel_count()];
    bits.par_chunks_mut(nx * ny).enumerate().for_each(|(k, slab)| {
        for j in 0..ny {
            for i in 0..nx {
                let idx = [i, j, k];
                let c = spec.voxel_center(idx);
                slab[i + nx * j] = frustum.contains(&c) && tracer.ray_clear(&origin, idx, skip);
            }
        }
    });
    Mask::from_bits(&spec, bits).expect("sized to spec")
}

/// Single-agent observation: visible voxels keep their label, the rest
/// become `empty`. The returned mask is the visibility mask itself.
pub fn observed_grid(gt: &VoxelGrid, vis: &VisibilityMask) -> Result<(VoxelGrid, ObservedMask)> {
    vis.check_matches(gt.spec())?;
    let labels = gt
        .labels()
        .iter()
        .zip(vis.bits())
        .map(|(&l, &v)| if v { l } else { SemanticLabel::EMPTY })
        .collect();
    Ok((VoxelGrid::from_labels(*gt.spec(), labels)?, vis.clone()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::RigidTransform;

    fn agent(fov: f64, range: f64) -> Agent {
        Agent::new(0, RigidTransform::identity(), Vec3::new(0.05, 0.05, 0.05), fov, range).unwrap()
    }

    fn spec() -> GridSpec {
        GridSpec::centered(Vec3::repeat(1.6), -0.8, 0.1).unwrap()
    }

    #[test]
    fn empty_world_all_visible() {
        let g = VoxelGrid::empty(spec());
        let vis = compute_visibility(&g, &agent(360.0, 10.0));
        assert_eq!(vis.count(), g.len());
    }

    #[test]
    fn beyond_range_invisible() {
        let g = VoxelGrid::empty(spec());
        let vis = compute_visibility(&g, &agent(360.0, 0.5));
        for l in 0..g.len() {
            let c = g.spec().voxel_center(g.spec().unravel(l));
            let inside = (c - Vec3::repeat(0.05)).norm_squared() <= 0.25;
            assert_eq!(vis.get(l), inside);
        }
    }

    #[test]
    fn forward_half_plane() {
        let g = VoxelGrid::empty(spec());
        let vis = compute_visibility(&g, &agent(180.0, 10.0));
        for l in 0..g.len() {
            let c = g.spec().voxel_center(g.spec().unravel(l));
            let dx = c.x - 0.05;
            assert_eq!(vis.get(l), dx >= -1e-9, "{c:?}");
        }
    }

    #[test]
    fn sensor_inside_occupied_voxel_sees_out() {
        let mut g = VoxelGrid::empty(spec());
        let s = g.spec().point_to_voxel(&Vec3::repeat(0.05)).unwrap();
        g.set(s, SemanticLabel::VEHICLES);
        let vis = compute_visibility(&g, &agent(360.0, 10.0));
        assert_eq!(vis.count(), g.len());
    }

    #[test]
    fn observed_is_select() {
        let mut g = VoxelGrid::empty(spec());
        g.set([0, 0, 0], SemanticLabel::ROADS);
        g.set([1, 0, 0], SemanticLabel::ROADS);
        let mut bits = vec![false; g.len()];
        bits[0] = true;
        let vis = Mask::from_bits(g.spec(), bits).unwrap();
        let (o, m) = observed_grid(&g, &vis).unwrap();
        assert_eq!(o.count_non_empty(), 1);
        assert_eq!(o.labels()[0], SemanticLabel::ROADS);
        assert_eq!(m, vis);
        let all = Mask::filled(g.spec(), true);
        assert_eq!(observed_grid(&g, &all).unwrap().0, g);
        let none = Mask::filled(g.spec(), false);
        assert_eq!(observed_grid(&g, &none).unwrap().0.count_non_empty(), 0);
    }

    /// Cell-by-cell walk with the same crossing arithmetic and no block skipping.
    fn walk_clear(g: &VoxelGrid, from: &Vec3, target: VoxelIndex, skip: Option<VoxelIndex>) -> bool {
        let spec = g.spec();
        let (lo, res) = (spec.min(), spec.resolution());
        let shape = spec.shape().map(|n| n as i64);
        let d = spec.voxel_center(target) - from;
        let mut t0 = 0.0f64;
        for a in 0..3 {
            if d[a] != 0.0 {
                let (u, v) = ((lo[a] - from[a]) / d[a], (spec.max()[a] - from[a]) / d[a]);
                t0 = t0.max(u.min(v));
            }
        }
        if t0 >= 1.0 {
            return true;
        }
        let p = from + d * t0;
        let mut cell = [0i64; 3];
        for a in 0..3 {
            cell[a] = (((p[a] - lo[a]) / res).floor() as i64).clamp(0, shape[a] - 1);
        }
        let ray = Ray::new(spec, from, &d);
        let target = target.map(|v| v as i64);
        let skip = skip.map(|s| s.map(|v| v as i64));
        loop {
            if cell == target {
                return true;
            }
            let idx = cell.map(|c| c as usize);
            if Some(cell) != skip && !g.get(idx).is_empty() {
                return false;
            }
            let t = [
                ray.crossing(0, cell[0]),
                ray.crossing(1, cell[1]),
                ray.crossing(2, cell[2]),
            ];
            let a = if t[0] <= t[1] && t[0] <= t[2] {
                0
            } else if t[1] <= t[2] {
                1
            } else {
                2
            };
            if t[a] > 1.0 {
                return true;
            }
            cell[a] += ray.step[a];
            if cell[a] < 0 || cell[a] >= shape[a] {
                return true;
            }
        }
    }

    #[test]
    fn cube_skipping_matches_cell_walk() {
        use rand::Rng;
        let mut rng = crate::synth::rng(11);
        let spec = GridSpec::new(Vec3::new(-1.3, -0.7, -0.5), Vec3::new(2.2, 1.7, 1.1), 0.1).unwrap();
        for _ in 0..20 {
            let mut g = VoxelGrid::empty(spec);
            let fill = rng.gen_range(0.0..0.05);
            for l in 0..g.len() {
                if rng.gen_bool(fill) {
                    g.labels_mut()[l] = SemanticLabel::WALLS;
                }
            }
            let b = spec.bounds();
            let from = Vec3::from_fn(|a, _| rng.gen_range(b.min[a] - 0.3..b.max[a] + 0.3));
            let skip = spec.point_to_voxel(&from);
            let tracer = Tracer::new(&g);
            for l in 0..g.len() {
                let t = spec.unravel(l);
                assert_eq!(
                    tracer.ray_clear(&from, t, skip),
                    walk_clear(&g, &from, t, skip),
                    "{from:?} {t:?}"
                );
            }
        }
    }

    #[test]
    fn clearance_is_chessboard_distance() {
        use rand::Rng;
        let mut rng = crate::synth::rng(12);
        let spec = GridSpec::new(Vec3::zeros(), Vec3::new(1.1, 0.9, 0.7), 0.1).unwrap();
        for fill in [0.0, 0.002, 0.02, 0.2] {
            let mut g = VoxelGrid::empty(spec);
            for l in 0..g.len() {
                if rng.gen_bool(fill) {
                    g.labels_mut()[l] = SemanticLabel::POLES;
                }
            }
            let occupied: Vec<VoxelIndex> = (0..g.len())
                .filter(|&l| !g.labels()[l].is_empty())
                .map(|l| spec.unravel(l))
                .collect();
            let d = clearance_map(&g);
            for (l, &dl) in d.iter().enumerate() {
                let v = spec.unravel(l);
                let expected = occupied
                    .iter()
                    .map(|o| (0..3).map(|a| o[a].abs_diff(v[a])).max().unwrap())
                    .min()
                    .map_or(255, |m| m.min(255));
                assert_eq!(dl as usize, expected);
            }
        }
    }
}
