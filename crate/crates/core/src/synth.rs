//! Seeded synthetic scenes for tests, oracle runs and benchmarks.

use std::f64::consts::PI;

use nalgebra::{Quaternion, UnitQuaternion};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::geometry::{Mat3, Obb, RigidTransform, TriMesh, Vec3};
use crate::scene::{Agent, GridSpec, Scene, SceneObject, SemanticLabel};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Uniformly distributed rotation.
pub fn random_rotation(rng: &mut impl Rng) -> Mat3 {
    let q = Quaternion::new(
        rng.sample::<f64, _>(StandardNormal),
        rng.sample::<f64, _>(StandardNormal),
        rng.sample::<f64, _>(StandardNormal),
        rng.sample::<f64, _>(StandardNormal),
    );
    UnitQuaternion::from_quaternion(q).to_rotation_matrix().into_inner()
}

fn random_label(rng: &mut impl Rng) -> SemanticLabel {
    SemanticLabel::new(rng.gen_range(1..=16)).expect("valid code")
}

/// Closed, outward-oriented surface of an axis-aligned box centred at the origin.
pub fn box_surface(half: Vec3) -> TriMesh {
    let v: Vec<Vec3> = (0..8)
        .map(|n| {
            Vec3::new(
                if n & 1 == 0 { -half.x } else { half.x },
                if n & 2 == 0 { -half.y } else { half.y },
                if n & 4 == 0 { -half.z } else { half.z },
            )
        })
        .collect();
    let t = vec![
        [0, 2, 1],
        [1, 2, 3], // -z
        [4, 5, 6],
        [5, 7, 6], // +z
        [0, 1, 4],
        [1, 5, 4], // -y
        [2, 6, 3],
        [3, 6, 7], // +y
        [0, 4, 2],
        [2, 4, 6], // -x
        [1, 3, 5],
        [3, 7, 5], // +x
    ];
    TriMesh::new(v, t).expect("box surface is valid")
}

/// Tetrahedron surface with the given corner offsets from the origin.
pub fn tetra_surface(size: f64) -> TriMesh {
    TriMesh::new(
        vec![
            Vec3::zeros(),
            Vec3::new(size, 0.0, 0.0),
            Vec3::new(0.0, size, 0.0),
            Vec3::new(0.0, 0.0, size),
        ],
        vec![[0, 2, 1], [0, 1, 3], [0, 3, 2], [1, 2, 3]],
    )
    .expect("tetrahedron is valid")
}

/// Open, edge-connected L-shaped strip of two quads.
pub fn l_strip(a: f64, b: f64, width: f64) -> TriMesh {
    TriMesh::new(
        vec![
            Vec3::new(0.0, 0.0, 0.0),
            Vec3::new(a, 0.0, 0.0),
            Vec3::new(a, width, 0.0),
            Vec3::new(0.0, width, 0.0),
            Vec3::new(0.0, 0.0, b),
            Vec3::new(0.0, width, b),
        ],
        vec![[0, 1, 2], [0, 2, 3], [0, 3, 5], [0, 5, 4]],
    )
    .expect("strip is valid")
}

/// An agent at `pose` with a 360° sensor at `height` metres.
pub fn agent(id: u32, pose: RigidTransform, height: f64, max_range: f64) -> Agent {
    Agent::new(id, pose, Vec3::new(0.0, 0.0, height), 360.0, max_range).expect("valid agent")
}

/// Random mix of oriented boxes and connected surface meshes inside `spec`.
///
/// Boxes may cross the grid boundary; meshes stay inside it. Every object's
/// occupied cell set is 6-connected, so no component can hide underneath
/// another component of the same object.
pub fn random_scene(seed: u64, spec: &GridSpec, max_objects: usize) -> Scene {
    let mut rng = rng(seed);
    let n = rng.gen_range(0..=max_objects);
    let lo = spec.min();
    let ext = spec.extent();
    let res = spec.resolution();
    let mut objects = Vec::with_capacity(n);
    for id in 0..n as u32 {
        let label = random_label(&mut rng);
        let pick = |rng: &mut ChaCha8Rng, margin: f64| {
            Vec3::new(
                lo.x + margin + rng.gen::<f64>() * (ext.x - 2.0 * margin).max(0.0),
                lo.y + margin + rng.gen::<f64>() * (ext.y - 2.0 * margin).max(0.0),
                lo.z + margin + rng.gen::<f64>() * (ext.z - 2.0 * margin).max(0.0),
            )
        };
        let object = if rng.gen_bool(0.6) {
            let half = Vec3::new(
                res * rng.gen_range(0.3..6.0),
                res * rng.gen_range(0.3..6.0),
                res * rng.gen_range(0.3..4.0),
            );
            let rotation = if rng.gen_bool(0.3) {
                Mat3::identity()
            } else {
                random_rotation(&mut rng)
            };
            let center = pick(&mut rng, 0.0);
            SceneObject::obb(
                id,
                label,
                Obb {
                    center,
                    half_extents: half,
                    rotation,
                },
            )
        } else {
            let size = res * rng.gen_range(1.0..6.0);
            let mesh = match rng.gen_range(0..3) {
                0 => box_surface(Vec3::repeat(size / 2.0)),
                1 => tetra_surface(size),
                _ => l_strip(size, size * 0.7, size * 0.5),
            };
            // Radius bound keeps every rotated vertex inside the grid.
            let reach = size * 1.8;
            if ext.iter().any(|&e| e <= 2.0 * reach) {
                continue;
            }
            let pose = RigidTransform {
                rotation: random_rotation(&mut rng),
                translation: pick(&mut rng, reach),
            };
            SceneObject::mesh(id, label, mesh, pose)
        };
        objects.push(object.expect("synthetic object is valid"));
    }
    let origin = spec.min() + spec.extent() / 2.0;
    let a = agent(0, RigidTransform::from_translation(origin), 0.0, 100.0);
    Scene::new(objects, vec![a]).expect("synthetic scene is valid")
}

/// Parameters of a street-like occluder scene.
#[derive(Debug, Clone, Copy)]
pub struct OccluderParams {
    pub agents: usize,
    /// Horizontal half-size of the populated area (m).
    pub half_size: f64,
    pub occluders: usize,
    pub sensor_range: f64,
    /// Collaborator distance band from agent 0 (m).
    pub neighbor_distance: (f64, f64),
}

impl Default for OccluderParams {
    fn default() -> Self {
        Self {
            agents: 2,
            half_size: 40.0,
            occluders: 40,
            sensor_range: 40.0,
            neighbor_distance: (8.0, 20.0),
        }
    }
}

/// Ground height in the world frame; agent frames sit 1.8 m above it.
pub const GROUND_Z: f64 = -1.8;

/// Street-like scene: a road slab, agent vehicles, and a random set of
/// buildings, walls, poles, vegetation and parked vehicles that occlude
/// each other. Agent 0 sits at the world origin.
pub fn occluder_scene(seed: u64, params: &OccluderParams) -> Scene {
    let mut rng = rng(seed);
    let mut objects = Vec::new();
    let mut next_id = 0u32;
    let mut push = |objects: &mut Vec<SceneObject>, label, obb: Obb| {
        objects.push(SceneObject::obb(next_id, label, obb).expect("valid obb"));
        next_id += 1;
    };
    let hs = params.half_size + 15.0;
    push(
        &mut objects,
        SemanticLabel::ROADS,
        Obb::axis_aligned(Vec3::new(0.0, 0.0, GROUND_Z - 0.1), Vec3::new(hs, hs, 0.1)),
    );

    let mut poses = vec![RigidTransform::from_yaw(rng.gen_range(-PI..PI), Vec3::zeros())];
    let mut tries = 0;
    while poses.len() < params.agents.max(1) {
        tries += 1;
        assert!(
            tries < 100_000,
            "cannot place {} agents 6 m apart in the neighbour band",
            params.agents
        );
        let (dmin, dmax) = params.neighbor_distance;
        let d = rng.gen_range(dmin..dmax);
        let phi = rng.gen_range(0.0..std::f64::consts::TAU);
        let t = Vec3::new(d * phi.cos(), d * phi.sin(), 0.0);
        if poses.iter().all(|p| (p.translation - t).norm() > 6.0) {
            poses.push(RigidTransform::from_yaw(rng.gen_range(-PI..PI), t));
        }
    }
    let vehicle_half = Vec3::new(2.2, 0.9, 0.75);
    for p in &poses {
        let c = p.apply(&Vec3::new(0.0, 0.0, GROUND_Z + vehicle_half.z));
        push(
            &mut objects,
            SemanticLabel::VEHICLES,
            Obb {
                center: c,
                half_extents: vehicle_half,
                rotation: p.rotation,
            },
        );
    }

    let clear = |c: &Vec3, r: f64| poses.iter().all(|p| (p.translation.xy() - c.xy()).norm() > r + 3.0);
    let mut placed = 0;
    let mut attempts = 0;
    while placed < params.occluders && attempts < params.occluders * 50 {
        attempts += 1;
        let c = Vec3::new(
            rng.gen_range(-params.half_size..params.half_size),
            rng.gen_range(-params.half_size..params.half_size),
            0.0,
        );
        let yaw = rng.gen_range(0.0..std::f64::consts::PI);
        let (label, half) = match rng.gen_range(0..10) {
            0 | 1 => (
                SemanticLabel::BUILDINGS,
                Vec3::new(rng.gen_range(2.0..6.0), rng.gen_range(2.0..6.0), 3.0),
            ),
            2 => (
                SemanticLabel::WALLS,
                Vec3::new(rng.gen_range(2.0..5.0), 0.15, rng.gen_range(0.8..1.6)),
            ),
            3 => (SemanticLabel::FENCES, Vec3::new(rng.gen_range(2.0..5.0), 0.05, 0.6)),
            4 => (SemanticLabel::POLES, Vec3::new(0.12, 0.12, rng.gen_range(1.5..2.5))),
            5 | 6 => (SemanticLabel::VEHICLES, vehicle_half),
            7 => (
                SemanticLabel::VEGETATION,
                Vec3::new(
                    rng.gen_range(0.5..1.5),
                    rng.gen_range(0.5..1.5),
                    rng.gen_range(0.8..2.0),
                ),
            ),
            8 => (SemanticLabel::SIDEWALKS, Vec3::new(rng.gen_range(2.0..6.0), 1.0, 0.08)),
            _ => (SemanticLabel::TRAFFICSIGNS, Vec3::new(0.05, 0.4, 0.4)),
        };
        if !clear(&c, half.x.max(half.y)) {
            continue;
        }
        let z = if label == SemanticLabel::TRAFFICSIGNS {
            GROUND_Z + 2.2
        } else {
            GROUND_Z + half.z
        };
        let center = Vec3::new(c.x, c.y, z);
        push(
            &mut objects,
            label,
            Obb {
                center,
                half_extents: half,
                rotation: crate::geometry::transform::yaw_matrix(yaw),
            },
        );
        placed += 1;
    }

    let agents = poses
        .into_iter()
        .enumerate()
        .map(|(i, p)| agent(i as u32, p, 0.2, params.sensor_range))
        .collect();
    Scene::new(objects, agents).expect("synthetic scene is valid")
}
