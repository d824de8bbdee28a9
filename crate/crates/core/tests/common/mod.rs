//! Oracles shared by the integration test targets.
#![allow(dead_code)]

use rand::Rng;
use semvox_core::annotate::VoxelGrid;
use semvox_core::geometry::{Mat3, RigidTransform, Vec3};
use semvox_core::scene::{Agent, GridSpec, SemanticLabel};
use semvox_core::synth;

pub fn random_grid(spec: GridSpec, seed: u64, fill: f64) -> VoxelGrid {
    let mut rng = synth::rng(seed);
    let labels = (0..spec.voxel_count())
        .map(|_| {
            if rng.gen_bool(fill) {
                SemanticLabel::new(rng.gen_range(1..24)).unwrap()
            } else {
                SemanticLabel::EMPTY
            }
        })
        .collect();
    VoxelGrid::from_labels(spec, labels).unwrap()
}

/// Rotation by a multiple of 90° about z with exact integer entries.
pub fn quarter_turn(q: i32) -> Mat3 {
    let (s, c) = match q.rem_euclid(4) {
        0 => (0.0, 1.0),
        1 => (1.0, 0.0),
        2 => (0.0, -1.0),
        _ => (-1.0, 0.0),
    };
    Mat3::new(c, -s, 0.0, s, c, 0.0, 0.0, 0.0, 1.0)
}

/// Index-remap reference for voxel-aligned transforms on a spec centred on
/// the origin: dst (i,j,k) reads src at the inverse-mapped integer offset.
pub fn remap_oracle(src: &VoxelGrid, q: i32, shift: [i64; 3]) -> (Vec<SemanticLabel>, Vec<bool>) {
    let spec = src.spec();
    let [nx, ny, nz] = spec.shape();
    let inv = quarter_turn(-q);
    let mut labels = vec![SemanticLabel::EMPTY; spec.voxel_count()];
    let mut mask = vec![false; spec.voxel_count()];
    for l in 0..spec.voxel_count() {
        let [i, j, k] = spec.unravel(l);
        // Centre offsets in units of half voxels relative to the grid centre.
        let c = [
            2 * i as i64 + 1 - nx as i64,
            2 * j as i64 + 1 - ny as i64,
            2 * k as i64 + 1 - nz as i64,
        ];
        let d = [c[0] - 2 * shift[0], c[1] - 2 * shift[1], c[2] - 2 * shift[2]];
        let r = [
            inv[(0, 0)] as i64 * d[0] + inv[(0, 1)] as i64 * d[1],
            inv[(1, 0)] as i64 * d[0] + inv[(1, 1)] as i64 * d[1],
            d[2],
        ];
        let src_idx = [
            (r[0] + nx as i64 - 1) / 2,
            (r[1] + ny as i64 - 1) / 2,
            (r[2] + nz as i64 - 1) / 2,
        ];
        let ok = (0..3).all(|a| {
            let twice = r[a] + [nx, ny, nz][a] as i64 - 1;
            twice >= 0 && twice % 2 == 0 && src_idx[a] < [nx, ny, nz][a] as i64
        });
        if ok {
            mask[l] = true;
            labels[l] = src.get([src_idx[0] as usize, src_idx[1] as usize, src_idx[2] as usize]);
        }
    }
    (labels, mask)
}

pub fn grid_of(codes: &[u8]) -> VoxelGrid {
    let spec = GridSpec::new(Vec3::zeros(), Vec3::new(codes.len() as f64, 1.0, 1.0), 1.0).unwrap();
    VoxelGrid::from_codes(spec, codes).unwrap()
}

const C: u8 = 9;

/// (pred, gt, class, expected tp, fp, fn)
pub type IouCase = (&'static [u8], &'static [u8], u8, [u64; 3]);

/// Hand-enumerated IoU cases.
pub const IOU_CASES: &[IouCase] = &[
    (&[C, C, C, 0, 0], &[C, C, 0, C, C], C, [2, 1, 2]),
    (&[C, C, 0, 0], &[C, C, 0, 0], C, [2, 0, 0]),
    (&[C, 0, 0, 0], &[0, C, 0, 0], C, [0, 1, 1]),
    (&[C, C, C, C], &[C, 0, 0, 0], C, [1, 3, 0]),
    (&[0, 0, 0, C], &[C, C, C, C], C, [1, 0, 3]),
    (&[1, 2, 3, 4], &[1, 2, 3, 4], 3, [1, 0, 0]),
    (&[1, 1, 2, 2, 2], &[1, 2, 2, 2, 1], 2, [2, 1, 1]),
    (&[1, 1, 2, 2, 2], &[1, 2, 2, 2, 1], 1, [1, 1, 1]),
    (&[4, 4, 4, 6, 6, 6], &[6, 6, 6, 4, 4, 4], 4, [0, 3, 3]),
    (&[7, 7, 7, 7, 7, 7, 7], &[7, 7, 7, 7, 7, 0, 1], 7, [5, 2, 0]),
    (&[5, 0, 5, 0, 5, 0], &[5, 5, 5, 5, 5, 5], 5, [3, 0, 3]),
];

/// 32 m cube at 1 m: road floor, a wall at x = 10 and a vehicle behind it.
/// Sensors sit at (x, 16.5, 6.5) in the grid frame.
pub fn occlusion_world() -> (GridSpec, VoxelGrid, impl Fn(f64) -> Agent) {
    let spec = GridSpec::new(Vec3::zeros(), Vec3::repeat(32.0), 1.0).unwrap();
    let mut gt = VoxelGrid::empty(spec);
    for k in 0..32 {
        for j in 0..32 {
            gt.set([j, k, 0], SemanticLabel::ROADS);
        }
    }
    for k in 1..22 {
        for j in 6..27 {
            gt.set([10, j, k], SemanticLabel::WALLS);
        }
    }
    for k in 1..4 {
        for j in 13..19 {
            for i in 15..20 {
                gt.set([i, j, k], SemanticLabel::VEHICLES);
            }
        }
    }
    let sensor = |x: f64| Agent::new(0, RigidTransform::identity(), Vec3::new(x, 16.5, 6.5), 360.0, 100.0).unwrap();
    (spec, gt, sensor)
}
