use super::{transform::check_rotation, Aabb, Mat3, Vec3, SAT_SLACK};

/// Oriented box. Column `j` of `rotation` is the world direction of local axis `j`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Obb {
    pub center: Vec3,
    pub half_extents: Vec3,
    pub rotation: Mat3,
}

impl Obb {
    pub fn new(center: Vec3, half_extents: Vec3, rotation: Mat3) -> Result<Self, String> {
        if !center.iter().all(|v| v.is_finite()) {
            return Err("obb center is not finite".into());
        }
        if !half_extents.iter().all(|h| h.is_finite() && *h > 0.0) {
            return Err(format!(
                "obb half extents must be positive, got {:?}",
                half_extents.as_slice()
            ));
        }
        check_rotation(&rotation)?;
        Ok(Self {
            center,
            half_extents,
            rotation,
        })
    }

    pub fn axis_aligned(center: Vec3, half_extents: Vec3) -> Self {
        Self {
            center,
            half_extents,
            rotation: Mat3::identity(),
        }
    }

    pub fn axis(&self, j: usize) -> Vec3 {
        self.rotation.column(j).into_owned()
    }

    pub fn volume(&self) -> f64 {
        8.0 * self.half_extents.x * self.half_extents.y * self.half_extents.z
    }

    pub fn corners(&self) -> [Vec3; 8] {
        let mut out = [Vec3::zeros(); 8];
        for (n, c) in out.iter_mut().enumerate() {
            let s = Vec3::new(
                if n & 1 == 0 { -1.0 } else { 1.0 },
                if n & 2 == 0 { -1.0 } else { 1.0 },
                if n & 4 == 0 { -1.0 } else { 1.0 },
            );
            *c = self.center + self.rotation * s.component_mul(&self.half_extents);
        }
        out
    }

    pub fn bounds(&self) -> Aabb {
        let r = self.rotation.abs() * self.half_extents;
        Aabb::new(self.center - r, self.center + r)
    }

    /// Closed containment test in the box's local frame.
    pub fn contains_point(&self, p: &Vec3) -> bool {
        let local = self.rotation.transpose() * (p - self.center);
        (0..3).all(|a| local[a].abs() <= self.half_extents[a])
    }
}

/// Separating-axis test between an oriented box and an axis-aligned box.
///
/// Candidate axes: the 3 world axes, the 3 box axes and their 9 cross
/// products. Cross products of (nearly) parallel edges are skipped; the face
/// axes already cover those configurations. Touching boxes overlap.
pub fn obb_aabb_overlap(o: &Obb, b: &Aabb) -> bool {
    let a = b.half_extents();
    let t = o.center - b.center();
    let u = [o.axis(0), o.axis(1), o.axis(2)];
    let h = o.half_extents;

    // |R_ij| = |e_i · u_j|
    let abs_r = o.rotation.abs();

    for i in 0..3 {
        let ra = a[i];
        let rb = h[0] * abs_r[(i, 0)] + h[1] * abs_r[(i, 1)] + h[2] * abs_r[(i, 2)];
        if t[i].abs() > ra + rb + SAT_SLACK {
            return false;
        }
    }
    for j in 0..3 {
        let ra = a[0] * abs_r[(0, j)] + a[1] * abs_r[(1, j)] + a[2] * abs_r[(2, j)];
        let rb = h[j];
        if t.dot(&u[j]).abs() > ra + rb + SAT_SLACK {
            return false;
        }
    }
    for i in 0..3 {
        for uj in &u {
            let mut e = Vec3::zeros();
            e[i] = 1.0;
            let l = e.cross(uj);
            let len2 = l.norm_squared();
            if len2 < 1e-18 {
                continue;
            }
            let ra = a[0] * l[0].abs() + a[1] * l[1].abs() + a[2] * l[2].abs();
            let rb = h[0] * l.dot(&u[0]).abs() + h[1] * l.dot(&u[1]).abs() + h[2] * l.dot(&u[2]).abs();
            if t.dot(&l).abs() > ra + rb + SAT_SLACK * len2.sqrt() {
                return false;
            }
        }
    }
    true
}
