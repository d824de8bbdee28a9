//! JSON scene files.
//!
//! ```json
//! {
//!   "objects": [
//!     {"id": 1, "label": "vehicles",
//!      "geometry": {"obb": {"center": [0, 0, -1], "half_extents": [2.2, 0.9, 0.75],
//!                           "rotation": [1, 0, 0, 0, 1, 0, 0, 0, 1]}}},
//!     {"id": 2, "label": 4,
//!      "geometry": {"mesh": {"vertices": [[0, 0, 0], [1, 0, 0], [0, 1, 0]],
//!                            "triangles": [[0, 1, 2]],
//!                            "pose": {"rotation": [1, 0, 0, 0, 1, 0, 0, 0, 1], "translation": [5, 0, 0]}}}}
//!   ],
//!   "agents": [
//!     {"id": 0, "pose": {"rotation": [1, 0, 0, 0, 1, 0, 0, 0, 1], "translation": [0, 0, 0]},
//!      "sensor": {"origin": [0, 0, 0.2], "fov_deg": 360, "max_range_m": 40}}
//!   ]
//! }
//! ```
//!
//! Rotations are row-major 3×3 matrices and may be omitted for identity.
//! Labels are registry names or numeric codes.

use std::collections::HashSet;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{transform::check_rotation, transform::mat_from_row_major, Obb, RigidTransform, TriMesh, Vec3};
use crate::scene::{Agent, Geometry, Scene, SceneObject, SemanticLabel};

const IDENTITY: [f64; 9] = [1.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 1.0];

fn identity() -> [f64; 9] {
    IDENTITY
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PoseFile {
    #[serde(default = "identity")]
    pub rotation: [f64; 9],
    #[serde(default)]
    pub translation: [f64; 3],
}

impl Default for PoseFile {
    fn default() -> Self {
        Self {
            rotation: IDENTITY,
            translation: [0.0; 3],
        }
    }
}

impl PoseFile {
    fn of(t: &RigidTransform) -> Self {
        Self {
            rotation: t.rotation_row_major(),
            translation: [t.translation.x, t.translation.y, t.translation.z],
        }
    }

    fn build(&self, path: &str) -> Result<RigidTransform> {
        let rotation = mat_from_row_major(&self.rotation);
        check_rotation(&rotation).map_err(|m| Error::validation(format!("{path}.rotation"), m))?;
        RigidTransform::new(rotation, Vec3::from(self.translation)).map_err(|m| Error::validation(path, m))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ObbFile {
    pub center: [f64; 3],
    pub half_extents: [f64; 3],
    #[serde(default = "identity")]
    pub rotation: [f64; 9],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MeshFile {
    pub vertices: Vec<[f64; 3]>,
    pub triangles: Vec<[u32; 3]>,
    #[serde(default)]
    pub pose: PoseFile,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GeometryFile {
    Obb(ObbFile),
    Mesh(MeshFile),
}

/// A label as written: a registry name or a numeric code.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum LabelRef {
    Code(u64),
    Name(String),
}

impl LabelRef {
    pub(crate) fn resolve(&self, path: &str) -> Result<SemanticLabel> {
        let label = match self {
            LabelRef::Code(c) => u8::try_from(*c).ok().and_then(SemanticLabel::new),
            LabelRef::Name(n) => SemanticLabel::parse(n),
        };
        match label {
            Some(l) if !l.is_empty() => Ok(l),
            Some(_) => Err(Error::validation(path, "objects cannot carry the empty label")),
            None => Err(Error::validation(
                path,
                match self {
                    LabelRef::Code(c) => format!("unknown label code {c}"),
                    LabelRef::Name(n) => format!("unknown label name {n:?}"),
                },
            )),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ObjectFile {
    pub id: u32,
    pub label: LabelRef,
    pub geometry: GeometryFile,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SensorFile {
    #[serde(default)]
    pub origin: [f64; 3],
    pub fov_deg: f64,
    pub max_range_m: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AgentFile {
    pub id: u32,
    #[serde(default)]
    pub pose: PoseFile,
    pub sensor: SensorFile,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SceneFile {
    #[serde(default)]
    pub objects: Vec<ObjectFile>,
    pub agents: Vec<AgentFile>,
}

impl SceneFile {
    pub fn from_scene(scene: &Scene) -> Self {
        let objects = scene
            .objects()
            .iter()
            .map(|o| ObjectFile {
                id: o.id,
                label: LabelRef::Name(o.label.name().to_string()),
                geometry: match o.geometry() {
                    Geometry::Obb(b) => GeometryFile::Obb(ObbFile {
                        center: b.center.into(),
                        half_extents: b.half_extents.into(),
                        rotation: crate::geometry::transform::row_major(&b.rotation),
                    }),
                    Geometry::Mesh(m) => GeometryFile::Mesh(MeshFile {
                        vertices: m.local().vertices().iter().map(|v| (*v).into()).collect(),
                        triangles: m.local().triangle_indices().to_vec(),
                        pose: PoseFile::of(m.pose()),
                    }),
                },
            })
            .collect();
        let agents = scene
            .agents()
            .iter()
            .map(|a| AgentFile {
                id: a.id,
                pose: PoseFile::of(&a.pose),
                sensor: SensorFile {
                    origin: a.sensor_origin.into(),
                    fov_deg: a.fov_horizontal_deg,
                    max_range_m: a.max_range,
                },
            })
            .collect();
        Self { objects, agents }
    }

    /// Validates every entry, naming the offending field on failure.
    pub fn build(&self) -> Result<Scene> {
        let mut objects = Vec::with_capacity(self.objects.len());
        let mut ids = HashSet::new();
        for (n, o) in self.objects.iter().enumerate() {
            let path = format!("objects[{n}]");
            if !ids.insert(o.id) {
                return Err(Error::validation(
                    format!("{path}.id"),
                    format!("duplicate object id {}", o.id),
                ));
            }
            let label = o.label.resolve(&format!("{path}.label"))?;
            let object = match &o.geometry {
                GeometryFile::Obb(b) => {
                    let rotation = mat_from_row_major(&b.rotation);
                    check_rotation(&rotation)
                        .map_err(|m| Error::validation(format!("{path}.geometry.obb.rotation"), m))?;
                    let obb = Obb::new(b.center.into(), b.half_extents.into(), rotation)
                        .map_err(|m| Error::validation(format!("{path}.geometry.obb"), m))?;
                    SceneObject::obb(o.id, label, obb)
                }
                GeometryFile::Mesh(m) => {
                    let pose = m.pose.build(&format!("{path}.geometry.mesh.pose"))?;
                    let mesh = TriMesh::new(m.vertices.iter().map(|v| Vec3::from(*v)).collect(), m.triangles.clone())
                        .map_err(|e| Error::validation(format!("{path}.geometry.mesh"), e))?;
                    SceneObject::mesh(o.id, label, mesh, pose)
                }
            };
            objects.push(object.map_err(|e| match e {
                Error::Validation { message, .. } => Error::validation(path.clone(), message),
                other => other,
            })?);
        }
        let mut agents = Vec::with_capacity(self.agents.len());
        let mut ids = HashSet::new();
        for (n, a) in self.agents.iter().enumerate() {
            let path = format!("agents[{n}] (id {})", a.id);
            if !ids.insert(a.id) {
                return Err(Error::validation(
                    format!("agents[{n}].id"),
                    format!("duplicate agent id {}", a.id),
                ));
            }
            let pose = a.pose.build(&format!("{path}.pose"))?;
            let agent = Agent {
                id: a.id,
                pose,
                sensor_origin: a.sensor.origin.into(),
                fov_horizontal_deg: a.sensor.fov_deg,
                max_range: a.sensor.max_range_m,
            };
            agent
                .validate()
                .map_err(|m| Error::validation(format!("{path}.sensor"), m))?;
            agents.push(agent);
        }
        Scene::new(objects, agents)
    }
}

/// Deserializes JSON, reporting type errors with the JSON path at fault.
pub(crate) fn parse_json<T: serde::de::DeserializeOwned>(text: &str, origin: &Path) -> Result<T> {
    let de = &mut serde_json::Deserializer::from_str(text);
    serde_path_to_error::deserialize(de).map_err(|e| {
        let at = e.path().to_string();
        let inner = e.into_inner();
        if at.is_empty() || at == "." {
            Error::Parse {
                path: origin.to_path_buf(),
                source: inner,
            }
        } else {
            Error::validation(format!("{}: {at}", origin.display()), inner.to_string())
        }
    })
}

pub fn parse_scene(text: &str, origin: &Path) -> Result<Scene> {
    let file: SceneFile = parse_json(text, origin)?;
    file.build().map_err(|e| match e {
        Error::Validation { path, message } => Error::validation(format!("{}: {path}", origin.display()), message),
        other => other,
    })
}

pub fn load_scene(path: impl AsRef<Path>) -> Result<Scene> {
    let path = path.as_ref();
    parse_scene(&fs::read_to_string(path)?, path)
}

pub fn save_scene(scene: &Scene, path: impl AsRef<Path>) -> Result<()> {
    let text = serde_json::to_string_pretty(&SceneFile::from_scene(scene)).expect("scene serializes");
    fs::write(path, text + "\n")?;
    Ok(())
}
