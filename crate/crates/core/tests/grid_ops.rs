mod common;

use rand::Rng;
use semvox_core::annotate::{annotate, Mask, VoxelGrid};
use semvox_core::geometry::{transform::yaw_matrix, RigidTransform, Vec3};
use semvox_core::grid_ops::{compute_visibility, crop_to_range, observed_grid, relative_transform, warp_grid, WarpMap};
use semvox_core::scene::{Agent, GridSpec, SemanticLabel};
use semvox_core::synth;

#[test]
fn relative_transform_composes() {
    let mut rng = synth::rng(1);
    for _ in 0..200 {
        let mut pose = || RigidTransform {
            rotation: synth::random_rotation(&mut rng),
            translation: Vec3::new(
                rng.gen_range(-50.0..50.0),
                rng.gen_range(-50.0..50.0),
                rng.gen_range(-2.0..2.0),
            ),
        };
        let (a, b, c) = (pose(), pose(), pose());
        let direct = relative_transform(&a, &c);
        let chained = relative_transform(&a, &b) * relative_transform(&b, &c);
        assert!(direct.approx_eq(&chained, 1e-9));
        // T maps the other agent's local points into the ego frame.
        let p = Vec3::new(1.0, 2.0, 3.0);
        let world = c.apply(&p);
        assert!((direct.apply(&p) - a.inverse().apply(&world)).norm() < 1e-9);
    }
}

#[test]
fn voxel_aligned_warps_match_index_remap() {
    let spec = GridSpec::centered(Vec3::new(2.4, 2.4, 1.2), -0.6, 0.1).unwrap();
    let mut rng = synth::rng(2);
    for trial in 0..60 {
        let src = common::random_grid(spec, trial, 0.4);
        let q = rng.gen_range(0..4);
        let shift = [rng.gen_range(-6..=6), rng.gen_range(-6..=6), rng.gen_range(-3..=3)];
        let t = RigidTransform {
            rotation: common::quarter_turn(q),
            translation: Vec3::new(shift[0] as f64, shift[1] as f64, shift[2] as f64) * 0.1,
        };
        let (warped, mask) = warp_grid(&src, &t, &spec);
        let (labels, bits) = common::remap_oracle(&src, q, shift);
        assert_eq!(warped.labels(), labels.as_slice(), "trial {trial}");
        assert_eq!(mask.bits(), bits.as_slice(), "trial {trial}");

        // Round trip on voxels valid in both directions.
        let (back, back_mask) = warp_grid(&warped, &t.inverse(), &spec);
        let fwd_back = WarpMap::new(&spec, &t.inverse(), &spec).warp_mask(&mask).unwrap();
        for l in 0..spec.voxel_count() {
            if back_mask.get(l) && fwd_back.get(l) {
                assert_eq!(back.labels()[l], src.labels()[l]);
            }
        }
    }
}

#[test]
fn warp_mask_matches_direct_bound_check() {
    let src_spec = GridSpec::centered(Vec3::new(3.0, 3.0, 1.0), -0.5, 0.1).unwrap();
    let dst_spec = GridSpec::centered(Vec3::new(4.0, 4.0, 1.0), -0.5, 0.2).unwrap();
    let src = common::random_grid(src_spec, 3, 0.3);
    let mut rng = synth::rng(4);
    for _ in 0..50 {
        let t = RigidTransform::from_yaw(
            rng.gen_range(-3.2..3.2),
            Vec3::new(
                rng.gen_range(-2.0..2.0),
                rng.gen_range(-2.0..2.0),
                rng.gen_range(-0.3..0.3),
            ),
        );
        let (warped, mask) = warp_grid(&src, &t, &dst_spec);
        let inv = t.inverse();
        let b = src_spec.bounds();
        for l in 0..dst_spec.voxel_count() {
            let q = inv.apply(&dst_spec.voxel_center(dst_spec.unravel(l)));
            let inside = (0..3).all(|a| q[a] >= b.min[a] && q[a] < b.max[a]);
            assert_eq!(mask.get(l), inside);
            if inside {
                assert_eq!(warped.labels()[l], src.get(src_spec.point_to_voxel(&q).unwrap()));
            } else {
                assert_eq!(warped.labels()[l], SemanticLabel::EMPTY);
            }
        }
    }
}

#[test]
fn ninety_degree_turn_permutes_axes() {
    let spec = GridSpec::centered(Vec3::new(1.6, 1.6, 0.4), -0.2, 0.1).unwrap();
    let src = common::random_grid(spec, 5, 0.5);
    let t = RigidTransform {
        rotation: yaw_matrix(std::f64::consts::FRAC_PI_2),
        translation: Vec3::zeros(),
    };
    let (w, mask) = warp_grid(&src, &t, &spec);
    assert_eq!(mask.count(), spec.voxel_count());
    let n = spec.shape()[0];
    for l in 0..spec.voxel_count() {
        let [i, j, k] = spec.unravel(l);
        // p = R q with R = +90° about z: q = (y, -x).
        assert_eq!(w.get([i, j, k]), src.get([j, n - 1 - i, k]));
    }
}

#[test]
fn corner_crop_matches_slice() {
    let src_spec = GridSpec::new(Vec3::new(-1.0, -1.0, -0.5), Vec3::new(2.0, 2.0, 1.0), 0.1).unwrap();
    let src = common::random_grid(src_spec, 6, 0.5);
    let dst = GridSpec::new(Vec3::new(0.3, -1.0, 0.0), Vec3::new(0.7, 0.5, 0.5), 0.1).unwrap();
    let out = crop_to_range(&src, &dst).unwrap();
    for l in 0..dst.voxel_count() {
        let [i, j, k] = dst.unravel(l);
        assert_eq!(out.get([i, j, k]), src.get([i + 13, j, k + 5]));
    }
}

/// Sensor inside voxel (2,8,8) of a 16³ unit grid; a full wall fills layer x = 8.
/// A wall cell is visible exactly when the sight line enters the layer through it.
#[test]
fn wall_slab_hides_everything_behind_it() {
    let spec = GridSpec::new(Vec3::zeros(), Vec3::repeat(16.0), 1.0).unwrap();
    let mut g = VoxelGrid::empty(spec);
    for k in 0..16 {
        for j in 0..16 {
            g.set([8, j, k], SemanticLabel::WALLS);
        }
    }
    let s = Vec3::new(2.37, 8.29, 8.61);
    let agent = Agent::new(0, RigidTransform::identity(), s, 360.0, 100.0).unwrap();
    let vis = compute_visibility(&g, &agent);
    for l in 0..spec.voxel_count() {
        let [i, j, k] = spec.unravel(l);
        let expected = match i {
            0..=7 => true,
            8 => {
                let c = spec.voxel_center([i, j, k]);
                let t = (8.0 - s.x) / (c.x - s.x);
                let (y, z) = (s.y + t * (c.y - s.y), s.z + t * (c.z - s.z));
                assert!((y - y.round()).abs() > 1e-6 && (z - z.round()).abs() > 1e-6);
                y.floor() as usize == j && z.floor() as usize == k
            }
            _ => false,
        };
        assert_eq!(vis.get(l), expected, "{:?}", [i, j, k]);
    }
    assert!(vis.get(spec.linear([8, 8, 8])));

    // Punch a hole at (8, 8, 8): the nearly axial ray through it is clear.
    g.set([8, 8, 8], SemanticLabel::EMPTY);
    let vis = compute_visibility(&g, &agent);
    assert!(vis.get(spec.linear([12, 8, 8])));
    assert!(vis.get(spec.linear([9, 8, 8])));
    assert!(!vis.get(spec.linear([12, 12, 8])));
    assert!(!vis.get(spec.linear([9, 8, 11])));
}

#[test]
fn beyond_range_invisible_even_when_empty() {
    let spec = GridSpec::new(Vec3::zeros(), Vec3::repeat(16.0), 1.0).unwrap();
    let g = VoxelGrid::empty(spec);
    let agent = Agent::new(0, RigidTransform::identity(), Vec3::new(0.5, 0.5, 0.5), 360.0, 5.0).unwrap();
    let vis = compute_visibility(&g, &agent);
    assert!(!vis.get(spec.linear([10, 0, 0])));
    assert!(vis.get(spec.linear([5, 0, 0])));
}

#[test]
fn visibility_grows_with_range_and_fov() {
    let spec = GridSpec::benchmark(12.8, 0.2).unwrap();
    let params = synth::OccluderParams {
        half_size: 8.0,
        occluders: 15,
        ..Default::default()
    };
    for seed in 0..4 {
        let scene = synth::occluder_scene(seed, &params).in_agent_frame(0).unwrap();
        let (gt, _) = annotate(&scene, &spec);
        let base = scene.agents()[0].clone();
        let mut prev: Option<Mask> = None;
        for (fov, range) in [
            (60.0, 3.0),
            (90.0, 5.0),
            (90.0, 8.0),
            (200.0, 8.0),
            (360.0, 8.0),
            (360.0, 20.0),
        ] {
            let a = Agent {
                fov_horizontal_deg: fov,
                max_range: range,
                ..base.clone()
            };
            let vis = compute_visibility(&gt, &a);
            if let Some(p) = &prev {
                assert!(p.is_subset_of(&vis), "seed {seed} fov {fov} range {range}");
            }
            prev = Some(vis);
        }
    }
}

#[test]
fn observation_never_fabricates() {
    let spec = GridSpec::benchmark(12.8, 0.2).unwrap();
    let scene = synth::occluder_scene(
        7,
        &synth::OccluderParams {
            half_size: 8.0,
            ..Default::default()
        },
    )
    .in_agent_frame(0)
    .unwrap();
    let (gt, _) = annotate(&scene, &spec);
    let vis = compute_visibility(&gt, &scene.agents()[0]);
    let (obs, mask) = observed_grid(&gt, &vis).unwrap();
    assert_eq!(mask, vis);
    for l in 0..gt.len() {
        let o = obs.labels()[l];
        assert_eq!(
            o,
            if vis.get(l) {
                gt.labels()[l]
            } else {
                SemanticLabel::EMPTY
            }
        );
    }
    assert!(vis.count() < gt.len());
    assert!(obs.count_non_empty() < gt.count_non_empty());
}
