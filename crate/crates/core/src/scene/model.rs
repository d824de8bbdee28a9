use std::collections::HashSet;

use super::SemanticLabel;
use crate::error::{Error, Result};
use crate::geometry::{obb_aabb_overlap, tri_aabb_overlap, Aabb, Bvh, Obb, RigidTransform, TriMesh, Vec3, SAT_SLACK};

/// A triangle mesh placed in the scene. Occupancy is surface intersection
/// only: cells strictly inside a closed mesh are not touched by it.
#[derive(Debug, Clone)]
pub struct MeshCollider {
    local: TriMesh,
    pose: RigidTransform,
    world: TriMesh,
    bvh: Bvh,
}

impl MeshCollider {
    pub fn new(local: TriMesh, pose: RigidTransform) -> Self {
        let world = local.transformed(&pose);
        let boxes: Vec<Aabb> = world.triangles().map(|t| t.bounds()).collect();
        Self {
            bvh: Bvh::build(&boxes),
            local,
            pose,
            world,
        }
    }

    pub fn local(&self) -> &TriMesh {
        &self.local
    }

    pub fn pose(&self) -> &RigidTransform {
        &self.pose
    }

    pub fn world(&self) -> &TriMesh {
        &self.world
    }

    pub fn overlaps(&self, cell: &Aabb) -> bool {
        self.bvh.any(cell, |t| tri_aabb_overlap(&self.world.triangle(t), cell))
    }
}

#[derive(Debug, Clone)]
pub enum Geometry {
    Obb(Obb),
    Mesh(MeshCollider),
}

impl Geometry {
    pub fn bounds(&self) -> Aabb {
        match self {
            Geometry::Obb(o) => o.bounds(),
            Geometry::Mesh(m) => m.world.bounds(),
        }
    }

    pub fn volume(&self) -> f64 {
        match self {
            Geometry::Obb(o) => o.volume(),
            Geometry::Mesh(m) => m.world.enclosed_volume(),
        }
    }

    /// Exact (closed-set) overlap of the geometry with a voxel cell.
    #[inline]
    pub fn overlaps(&self, cell: &Aabb) -> bool {
        match self {
            Geometry::Obb(o) => obb_aabb_overlap(o, cell),
            Geometry::Mesh(m) => m.overlaps(cell),
        }
    }

    /// Re-expresses the geometry after applying `t` to the whole world.
    pub fn transformed(&self, t: &RigidTransform) -> Geometry {
        match self {
            Geometry::Obb(o) => Geometry::Obb(Obb {
                center: t.apply(&o.center),
                half_extents: o.half_extents,
                rotation: t.rotation * o.rotation,
            }),
            Geometry::Mesh(m) => Geometry::Mesh(MeshCollider::new(m.local.clone(), t.compose(&m.pose))),
        }
    }
}

#[derive(Debug, Clone)]
pub struct SceneObject {
    pub id: u32,
    pub label: SemanticLabel,
    geometry: Geometry,
    volume_hint: f64,
    bounds: Aabb,
}

impl SceneObject {
    pub fn new(id: u32, label: SemanticLabel, geometry: Geometry) -> Result<Self> {
        if label.is_empty() {
            return Err(Error::validation(format!("object {id}"), "label must not be empty"));
        }
        Ok(Self {
            id,
            label,
            volume_hint: geometry.volume(),
            bounds: padded_bounds(&geometry),
            geometry,
        })
    }

    pub fn obb(id: u32, label: SemanticLabel, obb: Obb) -> Result<Self> {
        Self::new(id, label, Geometry::Obb(obb))
    }

    pub fn mesh(id: u32, label: SemanticLabel, mesh: TriMesh, pose: RigidTransform) -> Result<Self> {
        Self::new(id, label, Geometry::Mesh(MeshCollider::new(mesh, pose)))
    }

    pub fn geometry(&self) -> &Geometry {
        &self.geometry
    }

    /// Volume used to arbitrate label conflicts (m³).
    pub fn volume_hint(&self) -> f64 {
        self.volume_hint
    }

    /// Geometry bounds grown by the overlap-test slack: every cell the fine
    /// test can accept overlaps this box.
    pub fn bounds(&self) -> &Aabb {
        &self.bounds
    }

    #[inline]
    pub fn overlaps(&self, cell: &Aabb) -> bool {
        self.geometry.overlaps(cell)
    }

    /// Conflict priority: smaller volume first, then lower id.
    pub fn priority_key(&self) -> (f64, u32) {
        (self.volume_hint, self.id)
    }

    pub fn transformed(&self, t: &RigidTransform) -> SceneObject {
        let geometry = self.geometry.transformed(t);
        SceneObject {
            id: self.id,
            label: self.label,
            bounds: padded_bounds(&geometry),
            volume_hint: self.volume_hint,
            geometry,
        }
    }
}

fn padded_bounds(g: &Geometry) -> Aabb {
    let b = g.bounds();
    let pad = Vec3::repeat(2.0 * SAT_SLACK);
    Aabb::new(b.min - pad, b.max + pad)
}

/// True if `a` wins a voxel claimed by both objects.
#[inline]
pub fn takes_precedence(a: (f64, u32), b: (f64, u32)) -> bool {
    match a.0.total_cmp(&b.0) {
        std::cmp::Ordering::Less => true,
        std::cmp::Ordering::Greater => false,
        std::cmp::Ordering::Equal => a.1 < b.1,
    }
}

/// A vehicle carrying a single range-limited sensor facing its local +x axis.
#[derive(Debug, Clone, PartialEq)]
pub struct Agent {
    pub id: u32,
    pub pose: RigidTransform,
    pub sensor_origin: Vec3,
    pub fov_horizontal_deg: f64,
    pub max_range: f64,
}

impl Agent {
    pub fn new(
        id: u32,
        pose: RigidTransform,
        sensor_origin: Vec3,
        fov_horizontal_deg: f64,
        max_range: f64,
    ) -> Result<Self> {
        let agent = Self {
            id,
            pose,
            sensor_origin,
            fov_horizontal_deg,
            max_range,
        };
        agent
            .validate()
            .map_err(|m| Error::validation(format!("agent {id}"), m))?;
        Ok(agent)
    }

    pub fn validate(&self) -> std::result::Result<(), String> {
        crate::geometry::transform::check_rotation(&self.pose.rotation).map_err(|m| format!("pose: {m}"))?;
        if !self.pose.translation.iter().all(|v| v.is_finite()) {
            return Err("pose translation is not finite".into());
        }
        if !self.sensor_origin.iter().all(|v| v.is_finite()) {
            return Err("sensor origin is not finite".into());
        }
        if !(self.fov_horizontal_deg > 0.0 && self.fov_horizontal_deg <= 360.0) {
            return Err(format!("fov_deg must lie in (0, 360], got {}", self.fov_horizontal_deg));
        }
        if !(self.max_range.is_finite() && self.max_range > 0.0) {
            return Err(format!("max_range must be positive and finite, got {}", self.max_range));
        }
        Ok(())
    }

    /// Sensor position in the frame the pose is expressed in.
    pub fn sensor_position(&self) -> Vec3 {
        self.pose.apply(&self.sensor_origin)
    }

    pub fn forward(&self) -> Vec3 {
        self.pose.apply_vector(&Vec3::x())
    }

    pub fn transformed(&self, t: &RigidTransform) -> Agent {
        Agent {
            pose: t.compose(&self.pose),
            ..self.clone()
        }
    }
}

#[derive(Debug, Clone)]
pub struct Scene {
    objects: Vec<SceneObject>,
    agents: Vec<Agent>,
}

impl Scene {
    pub fn new(objects: Vec<SceneObject>, agents: Vec<Agent>) -> Result<Self> {
        let mut ids = HashSet::new();
        for (n, o) in objects.iter().enumerate() {
            if !ids.insert(o.id) {
                return Err(Error::validation(
                    format!("objects[{n}].id"),
                    format!("duplicate object id {}", o.id),
                ));
            }
        }
        if agents.is_empty() {
            return Err(Error::validation("agents", "scene needs at least one agent"));
        }
        ids.clear();
        for (n, a) in agents.iter().enumerate() {
            if !ids.insert(a.id) {
                return Err(Error::validation(
                    format!("agents[{n}].id"),
                    format!("duplicate agent id {}", a.id),
                ));
            }
            a.validate()
                .map_err(|m| Error::validation(format!("agents[{n}] (id {})", a.id), m))?;
        }
        Ok(Self { objects, agents })
    }

    pub fn objects(&self) -> &[SceneObject] {
        &self.objects
    }

    pub fn agents(&self) -> &[Agent] {
        &self.agents
    }

    pub fn agent(&self, id: u32) -> Result<&Agent> {
        self.agents
            .iter()
            .find(|a| a.id == id)
            .ok_or_else(|| Error::Config(format!("no agent with id {id}")))
    }

    /// The same scene expressed in agent `id`'s frame: that agent ends up at
    /// the identity pose and every grid attached to it is axis-aligned.
    pub fn in_agent_frame(&self, id: u32) -> Result<Scene> {
        let to_local = self.agent(id)?.pose.inverse();
        Ok(self.transformed(&to_local))
    }

    pub fn transformed(&self, t: &RigidTransform) -> Scene {
        Scene {
            objects: self.objects.iter().map(|o| o.transformed(t)).collect(),
            agents: self.agents.iter().map(|a| a.transformed(t)).collect(),
        }
    }

    /// Same agents, objects in a different order. Test support for order-independence checks.
    pub fn with_objects(&self, objects: Vec<SceneObject>) -> Result<Scene> {
        Scene::new(objects, self.agents.clone())
    }
}
