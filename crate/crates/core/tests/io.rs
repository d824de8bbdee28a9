use std::path::Path;

use proptest::prelude::*;
use rand::Rng;
use semvox_core::annotate::{annotate, VoxelGrid};
use semvox_core::geometry::{RigidTransform, Vec3};
use semvox_core::io::{
    decode_grid, encode_grid, load_scene, parse_config, parse_scene, read_grid, rle_runs, save_scene, write_grid,
    Encoding, HEADER_LEN,
};
use semvox_core::scene::{GridSpec, SemanticLabel, NUM_LABELS};
use semvox_core::synth;
use semvox_core::Error;

/// Grid with long runs broken up by random single voxels.
fn random_grid(seed: u64) -> VoxelGrid {
    let mut rng = synth::rng(seed);
    let shape = [rng.gen_range(1..24), rng.gen_range(1..24), rng.gen_range(1..12)];
    let res = [0.05, 0.1, 0.2, 0.3, 0.4][rng.gen_range(0..5)];
    // Origins on a 1/8 m lattice are exact in the file's f32 header.
    let min = Vec3::new(
        rng.gen_range(-320..0) as f64 / 8.0,
        rng.gen_range(-320..0) as f64 / 8.0,
        -2.0,
    );
    let extent = Vec3::new(shape[0] as f64, shape[1] as f64, shape[2] as f64) * res;
    let spec = GridSpec::new(min, extent, res).unwrap();
    let mut codes = Vec::with_capacity(spec.voxel_count());
    let mut current = 0u8;
    while codes.len() < spec.voxel_count() {
        if rng.gen_bool(0.3) {
            current = rng.gen_range(0..NUM_LABELS as u8);
        }
        let run = rng.gen_range(1..40).min(spec.voxel_count() - codes.len());
        codes.extend(std::iter::repeat_n(current, run));
    }
    VoxelGrid::from_codes(spec, &codes).unwrap()
}

#[test]
fn random_grids_round_trip_in_both_encodings() {
    let dir = tempfile::tempdir().unwrap();
    for seed in 0..120 {
        let grid = random_grid(seed);
        for enc in [Encoding::Dense, Encoding::Rle] {
            let path = dir.path().join(format!("g{seed}.bin"));
            write_grid(&grid, &path, enc).unwrap();
            let back = read_grid(&path).unwrap();
            assert_eq!(back.labels(), grid.labels(), "seed {seed} {enc:?}");
            assert_eq!(back.spec(), grid.spec(), "seed {seed} {enc:?}");
            assert_eq!(decode_grid(&encode_grid(&grid, enc)).unwrap(), back);
            let first = std::fs::read(&path).unwrap();
            assert_eq!(encode_grid(&back, enc), first, "rewrite differs, seed {seed} {enc:?}");
        }
    }
}

#[test]
fn rle_payload_is_canonical() {
    for seed in 0..50 {
        let grid = random_grid(1000 + seed);
        let bytes = encode_grid(&grid, Encoding::Rle);
        let payload = &bytes[HEADER_LEN..];
        assert_eq!(payload.len() % 5, 0);
        let runs: Vec<(u32, u8)> = payload
            .chunks(5)
            .map(|c| (u32::from_le_bytes(c[..4].try_into().unwrap()), c[4]))
            .collect();
        assert!(runs.iter().all(|r| r.0 > 0));
        assert!(runs.windows(2).all(|w| w[0].1 != w[1].1), "seed {seed}");
        assert_eq!(runs.iter().map(|r| r.0 as usize).sum::<usize>(), grid.len());
        assert_eq!(runs, rle_runs(grid.labels()));
    }
}

#[test]
fn off_lattice_origin_stays_within_f32_precision() {
    let spec = GridSpec::new(Vec3::new(-17.561320097, 3.3125129, -2.0), Vec3::new(2.0, 2.0, 1.0), 0.1).unwrap();
    let back = decode_grid(&encode_grid(&VoxelGrid::empty(spec), Encoding::Rle)).unwrap();
    assert!((back.spec().min() - spec.min()).amax() < 1e-5);
    assert_eq!(back.spec().shape(), spec.shape());
}

#[test]
fn dense_payload_is_label_bytes() {
    let grid = random_grid(7);
    let bytes = encode_grid(&grid, Encoding::Dense);
    assert_eq!(bytes.len(), HEADER_LEN + grid.len());
    assert!(bytes[HEADER_LEN..].iter().copied().eq(grid.codes()));
}

#[test]
fn corrupt_files_give_distinct_errors() {
    let good = encode_grid(&random_grid(3), Encoding::Rle);
    let with = |at: usize, b: u8| {
        let mut v = good.clone();
        v[at] = b;
        v
    };
    assert!(matches!(decode_grid(&with(0, b'X')), Err(Error::BadMagic { .. })));
    assert!(matches!(
        decode_grid(&with(4, 2)),
        Err(Error::VersionMismatch { found: 2, .. })
    ));
    assert!(matches!(decode_grid(&with(36, 2)), Err(Error::LabelWidth(2))));
    assert!(matches!(decode_grid(&with(37, 9)), Err(Error::UnknownEncoding(9))));
    assert!(matches!(decode_grid(&good[..good.len() - 5]), Err(Error::Truncated(_))));
    let mut long = good.clone();
    long.extend_from_slice(&[1, 0, 0, 0, 0]);
    assert!(matches!(decode_grid(&long), Err(Error::PayloadMismatch { .. })));
    let mut bad_label = good.clone();
    let n = bad_label.len();
    bad_label[n - 1] = 200;
    assert!(matches!(decode_grid(&bad_label), Err(Error::BadLabel(200))));
}

proptest! {
    #[test]
    fn any_label_sequence_round_trips(codes in prop::collection::vec(0u8..NUM_LABELS as u8, 1..300)) {
        let spec = GridSpec::new(Vec3::zeros(), Vec3::new(codes.len() as f64 * 0.2, 0.2, 0.2), 0.2).unwrap();
        let grid = VoxelGrid::from_codes(spec, &codes).unwrap();
        for enc in [Encoding::Dense, Encoding::Rle] {
            let back = decode_grid(&encode_grid(&grid, enc)).unwrap();
            prop_assert_eq!(back.labels(), grid.labels());
        }
    }
}

#[test]
fn scenes_round_trip_through_json() {
    let dir = tempfile::tempdir().unwrap();
    let spec = GridSpec::centered(Vec3::repeat(6.4), -3.2, 0.2).unwrap();
    for seed in 0..10 {
        let scene = synth::random_scene(seed, &spec, 6);
        let path = dir.path().join("scene.json");
        save_scene(&scene, &path).unwrap();
        let back = load_scene(&path).unwrap();
        assert_eq!(back.objects().len(), scene.objects().len());
        assert_eq!(back.agents(), scene.agents());
        assert_eq!(annotate(&back, &spec).0, annotate(&scene, &spec).0, "seed {seed}");
    }
}

const AGENT: &str = r#"{"id": 3, "pose": {"translation": [1, 2, 0]}, "sensor": {"fov_deg": 120, "max_range_m": 30}}"#;

fn scene_text(objects: &str, agents: &str) -> String {
    format!(r#"{{"objects": [{objects}], "agents": [{agents}]}}"#)
}

fn scene_error(text: &str) -> String {
    parse_scene(text, Path::new("s.json")).unwrap_err().to_string()
}

#[test]
fn minimal_scene_parses() {
    let obb =
        r#"{"id": 1, "label": "vehicles", "geometry": {"obb": {"center": [0, 0, 0], "half_extents": [1, 1, 1]}}}"#;
    let mesh = r#"{"id": 2, "label": 4, "geometry": {"mesh": {"vertices": [[0,0,0],[1,0,0],[0,1,0]], "triangles": [[0,1,2]]}}}"#;
    let scene = parse_scene(&scene_text(&format!("{obb}, {mesh}"), AGENT), Path::new("s.json")).unwrap();
    assert_eq!(scene.objects()[0].label, SemanticLabel::parse("vehicles").unwrap());
    assert_eq!(scene.objects()[1].label, SemanticLabel::new(4).unwrap());
    assert_eq!(
        scene.agents()[0].pose,
        RigidTransform::from_translation(Vec3::new(1.0, 2.0, 0.0))
    );
}

#[test]
fn scene_errors_name_the_field() {
    let e = scene_error(&scene_text(
        r#"{"id": 1, "label": "spaceship", "geometry": {"obb": {"center": [0,0,0], "half_extents": [1,1,1]}}}"#,
        AGENT,
    ));
    assert!(e.contains("objects[0].label") && e.contains("spaceship"), "{e}");

    let reflected =
        r#"{"id": 9, "pose": {"rotation": [1,0,0, 0,1,0, 0,0,-1]}, "sensor": {"fov_deg": 90, "max_range_m": 10}}"#;
    let e = scene_error(&scene_text("", &format!("{AGENT}, {reflected}")));
    assert!(
        e.contains("agents[1] (id 9).pose.rotation") && e.contains("determinant"),
        "{e}"
    );

    let skewed =
        r#"{"id": 4, "pose": {"rotation": [1,0.2,0, 0,1,0, 0,0,1]}, "sensor": {"fov_deg": 90, "max_range_m": 10}}"#;
    let e = scene_error(&scene_text("", skewed));
    assert!(e.contains("(id 4)") && e.contains("orthonormal"), "{e}");

    let e = scene_error(&scene_text("", &format!("{AGENT}, {AGENT}")));
    assert!(e.contains("duplicate agent id 3"), "{e}");

    let e = scene_error(&scene_text(
        r#"{"id": 1, "label": "roads", "geometry": {"obb": {"center": [0,0]}}}"#,
        AGENT,
    ));
    assert!(e.contains("objects[0].geometry"), "{e}");

    let e = scene_error("{ not json");
    assert!(e.starts_with("s.json"), "{e}");
}

#[test]
fn config_overrides_defaults() {
    let c = parse_config(
        r#"{"ranges_m": [25.6], "k": [0, 3], "noise": [{"mu": 0.2, "sigma": 0.02}], "seed": 5,
            "classes": ["roads", 10], "gt_source": "reannotate", "mode": "vote"}"#,
        Path::new("c.json"),
    )
    .unwrap();
    assert_eq!(c.ranges, vec![GridSpec::benchmark(25.6, 0.1).unwrap()]);
    assert_eq!(c.k_values, [0, 3]);
    assert_eq!(c.noise, [(0.2, 0.02)]);
    assert_eq!(c.seed, 5);
    assert_eq!(c.classes.len(), 2);

    let d = parse_config("{}", Path::new("c.json")).unwrap();
    assert_eq!(d.ranges.len(), 3);

    let e = parse_config(r#"{"noise": [{"mu": -1, "sigma": 0}]}"#, Path::new("c.json")).unwrap_err();
    assert!(e.to_string().contains("noise"), "{e}");
    let e = parse_config(r#"{"ranges_m": [10.0]}"#, Path::new("c.json")).unwrap_err();
    assert!(e.to_string().contains("ranges_m"), "{e}");
    let e = parse_config(r#"{"k": "all"}"#, Path::new("c.json")).unwrap_err();
    assert!(e.to_string().contains("k"), "{e}");
}
