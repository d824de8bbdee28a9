use super::Vec3;

/// Closed axis-aligned box `[min, max]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Aabb {
    pub min: Vec3,
    pub max: Vec3,
}

impl Aabb {
    pub fn new(min: Vec3, max: Vec3) -> Self {
        debug_assert!(
            min.x <= max.x && min.y <= max.y && min.z <= max.z,
            "inverted aabb {min:?} {max:?}"
        );
        Self { min, max }
    }

    /// Zero-volume box at `p`; overlap queries against it behave as point queries.
    pub fn point(p: Vec3) -> Self {
        Self { min: p, max: p }
    }

    pub fn from_points<'a>(points: impl IntoIterator<Item = &'a Vec3>) -> Option<Self> {
        let mut it = points.into_iter();
        let first = *it.next()?;
        let mut b = Self::point(first);
        for p in it {
            b.grow(p);
        }
        Some(b)
    }

    pub fn grow(&mut self, p: &Vec3) {
        self.min = self.min.inf(p);
        self.max = self.max.sup(p);
    }

    pub fn union(&self, other: &Aabb) -> Aabb {
        Aabb {
            min: self.min.inf(&other.min),
            max: self.max.sup(&other.max),
        }
    }

    pub fn center(&self) -> Vec3 {
        (self.min + self.max) * 0.5
    }

    pub fn half_extents(&self) -> Vec3 {
        (self.max - self.min) * 0.5
    }

    pub fn extent(&self) -> Vec3 {
        self.max - self.min
    }

    pub fn volume(&self) -> f64 {
        let e = self.extent();
        e.x * e.y * e.z
    }

    /// Index of the longest axis; ties resolve to the lowest axis.
    pub fn longest_axis(&self) -> usize {
        let e = self.extent();
        if e.x >= e.y && e.x >= e.z {
            0
        } else if e.y >= e.z {
            1
        } else {
            2
        }
    }

    pub fn contains_point(&self, p: &Vec3) -> bool {
        (0..3).all(|a| p[a] >= self.min[a] && p[a] <= self.max[a])
    }

    pub fn contains(&self, other: &Aabb) -> bool {
        (0..3).all(|a| other.min[a] >= self.min[a] && other.max[a] <= self.max[a])
    }
}

/// Closed-interval overlap on all three axes; shared faces, edges and corners overlap.
pub fn aabb_overlap(a: &Aabb, b: &Aabb) -> bool {
    (0..3).all(|i| a.min[i] <= b.max[i] && b.min[i] <= a.max[i])
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cube(lo: f64, hi: f64) -> Aabb {
        Aabb::new(Vec3::repeat(lo), Vec3::repeat(hi))
    }

    #[test]
    fn interval_cases() {
        assert!(aabb_overlap(&cube(0.0, 1.0), &cube(0.5, 1.5)));
        assert!(!aabb_overlap(&cube(0.0, 1.0), &cube(2.0, 3.0)));
        assert!(aabb_overlap(&cube(0.0, 1.0), &cube(1.0, 2.0)));
    }

    #[test]
    fn separated_on_one_axis_only() {
        let a = cube(0.0, 1.0);
        let b = Aabb::new(Vec3::new(0.2, 0.2, 1.01), Vec3::new(0.8, 0.8, 2.0));
        assert!(!aabb_overlap(&a, &b));
    }

    #[test]
    fn point_probe() {
        let a = cube(0.0, 1.0);
        assert!(aabb_overlap(&a, &Aabb::point(Vec3::new(1.0, 0.5, 0.0))));
        assert!(!aabb_overlap(&a, &Aabb::point(Vec3::new(1.0 + 1e-12, 0.5, 0.0))));
    }

    #[test]
    fn longest_axis_ties_low() {
        assert_eq!(cube(0.0, 1.0).longest_axis(), 0);
        let b = Aabb::new(Vec3::zeros(), Vec3::new(1.0, 2.0, 2.0));
        assert_eq!(b.longest_axis(), 1);
    }
}
