use super::{Aabb, RigidTransform, Triangle, Vec3};

/// Triangle areas at or below this are rejected as degenerate (m²).
pub const MIN_TRIANGLE_AREA: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct TriMesh {
    vertices: Vec<Vec3>,
    triangles: Vec<[u32; 3]>,
}

impl TriMesh {
    pub fn new(vertices: Vec<Vec3>, triangles: Vec<[u32; 3]>) -> Result<Self, String> {
        if triangles.is_empty() {
            return Err("mesh has no triangles".into());
        }
        if let Some(i) = vertices.iter().position(|v| !v.iter().all(|c| c.is_finite())) {
            return Err(format!("vertex {i} is not finite"));
        }
        for (t, tri) in triangles.iter().enumerate() {
            if let Some(&bad) = tri.iter().find(|&&i| i as usize >= vertices.len()) {
                return Err(format!(
                    "triangle {t} references vertex {bad} but the mesh has {} vertices",
                    vertices.len()
                ));
            }
        }
        let mesh = Self { vertices, triangles };
        for t in 0..mesh.triangles.len() {
            let area = mesh.triangle(t).area();
            if area <= MIN_TRIANGLE_AREA {
                return Err(format!("triangle {t} is degenerate (area {area:.3e} m²)"));
            }
        }
        Ok(mesh)
    }

    pub fn vertices(&self) -> &[Vec3] {
        &self.vertices
    }

    pub fn triangle_indices(&self) -> &[[u32; 3]] {
        &self.triangles
    }

    pub fn len(&self) -> usize {
        self.triangles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.triangles.is_empty()
    }

    pub fn triangle(&self, t: usize) -> Triangle {
        let [a, b, c] = self.triangles[t];
        Triangle::new(
            self.vertices[a as usize],
            self.vertices[b as usize],
            self.vertices[c as usize],
        )
    }

    pub fn triangles(&self) -> impl Iterator<Item = Triangle> + '_ {
        (0..self.triangles.len()).map(|t| self.triangle(t))
    }

    pub fn transformed(&self, pose: &RigidTransform) -> TriMesh {
        TriMesh {
            vertices: self.vertices.iter().map(|v| pose.apply(v)).collect(),
            triangles: self.triangles.clone(),
        }
    }

    pub fn bounds(&self) -> Aabb {
        // Non-empty by construction.
        Aabb::from_points(self.triangles.iter().flatten().map(|&i| &self.vertices[i as usize]))
            .expect("mesh has triangles")
    }

    /// Magnitude of the signed volume (divergence theorem). Equals the
    /// enclosed volume for closed, consistently oriented meshes.
    pub fn enclosed_volume(&self) -> f64 {
        self.triangles()
            .map(|t| t.v[0].dot(&t.v[1].cross(&t.v[2])) / 6.0)
            .sum::<f64>()
            .abs()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tetra() -> TriMesh {
        TriMesh::new(
            vec![
                Vec3::zeros(),
                Vec3::new(1.0, 0.0, 0.0),
                Vec3::new(0.0, 1.0, 0.0),
                Vec3::new(0.0, 0.0, 1.0),
            ],
            vec![[0, 2, 1], [0, 1, 3], [0, 3, 2], [1, 2, 3]],
        )
        .unwrap()
    }

    #[test]
    fn tetra_volume() {
        assert!((tetra().enclosed_volume() - 1.0 / 6.0).abs() < 1e-12);
        let moved = tetra().transformed(&RigidTransform::from_yaw(1.0, Vec3::new(5.0, 1.0, 2.0)));
        assert!((moved.enclosed_volume() - 1.0 / 6.0).abs() < 1e-12);
    }

    #[test]
    fn rejects_bad_index() {
        let err = TriMesh::new(vec![Vec3::zeros(); 3], vec![[0, 1, 3]]).unwrap_err();
        assert!(err.contains("vertex 3"), "{err}");
    }

    #[test]
    fn rejects_degenerate() {
        let v = vec![Vec3::zeros(), Vec3::new(1.0, 0.0, 0.0), Vec3::new(2.0, 0.0, 0.0)];
        assert!(TriMesh::new(v, vec![[0, 1, 2]]).unwrap_err().contains("degenerate"));
    }
}
