use super::{Aabb, Vec3, SAT_SLACK};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Triangle {
    pub v: [Vec3; 3],
}

impl Triangle {
    pub fn new(a: Vec3, b: Vec3, c: Vec3) -> Self {
        Self { v: [a, b, c] }
    }

    pub fn normal(&self) -> Vec3 {
        (self.v[1] - self.v[0]).cross(&(self.v[2] - self.v[0]))
    }

    pub fn area(&self) -> f64 {
        0.5 * self.normal().norm()
    }

    pub fn bounds(&self) -> Aabb {
        Aabb::new(
            self.v[0].inf(&self.v[1]).inf(&self.v[2]),
            self.v[0].sup(&self.v[1]).sup(&self.v[2]),
        )
    }
}

/// Projects the (box-centred) triangle onto `axis` and compares with the box radius.
#[inline]
fn separated_on(axis: &Vec3, v: &[Vec3; 3], half: &Vec3) -> bool {
    let len2 = axis.norm_squared();
    if len2 < 1e-24 {
        return false;
    }
    let p0 = v[0].dot(axis);
    let p1 = v[1].dot(axis);
    let p2 = v[2].dot(axis);
    let r = half.x * axis.x.abs() + half.y * axis.y.abs() + half.z * axis.z.abs();
    let lo = p0.min(p1).min(p2);
    let hi = p0.max(p1).max(p2);
    let slack = SAT_SLACK * len2.sqrt();
    lo > r + slack || hi < -r - slack
}

/// Separating-axis triangle/box test over 13 axes: the 3 box normals, the
/// triangle normal and the 9 edge cross products. The box is closed.
pub fn tri_aabb_overlap(t: &Triangle, b: &Aabb) -> bool {
    let c = b.center();
    let half = b.half_extents();
    let v = [t.v[0] - c, t.v[1] - c, t.v[2] - c];

    for a in 0..3 {
        let lo = v[0][a].min(v[1][a]).min(v[2][a]);
        let hi = v[0][a].max(v[1][a]).max(v[2][a]);
        if lo > half[a] + SAT_SLACK || hi < -half[a] - SAT_SLACK {
            return false;
        }
    }

    let e = [v[1] - v[0], v[2] - v[1], v[0] - v[2]];
    let n = e[0].cross(&e[1]);
    if separated_on(&n, &v, &half) {
        return false;
    }

    for edge in &e {
        for a in 0..3 {
            let mut unit = Vec3::zeros();
            unit[a] = 1.0;
            if separated_on(&unit.cross(edge), &v, &half) {
                return false;
            }
        }
    }
    true
}
