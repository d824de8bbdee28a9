use super::{aabb_overlap, Aabb};

/// Maximum number of primitives stored in one leaf.
pub const LEAF_SIZE: usize = 4;

#[derive(Debug, Clone, Copy)]
enum NodeKind {
    Leaf { start: u32, count: u32 },
    Inner { left: u32, right: u32 },
}

#[derive(Debug, Clone, Copy)]
struct Node {
    bounds: Aabb,
    kind: NodeKind,
}

/// Bounding volume hierarchy over primitive boxes, stored as a flat arena.
///
/// Built top-down by splitting at the median primitive centroid along the
/// longest axis of each node's bounds. The build is deterministic for a given
/// input order: centroid ties keep their input order.
#[derive(Debug, Clone, Default)]
pub struct Bvh {
    nodes: Vec<Node>,
    /// Primitive ids in leaf order; leaves index into this.
    order: Vec<u32>,
    prim_bounds: Vec<Aabb>,
}

impl Bvh {
    pub fn build(primitives: &[Aabb]) -> Self {
        let mut bvh = Bvh {
            nodes: Vec::with_capacity(2 * primitives.len() / LEAF_SIZE + 1),
            order: (0..primitives.len() as u32).collect(),
            prim_bounds: primitives.to_vec(),
        };
        if !primitives.is_empty() {
            bvh.build_node(0, primitives.len());
        }
        bvh
    }

    fn build_node(&mut self, start: usize, end: usize) -> u32 {
        let bounds = self.order[start..end]
            .iter()
            .map(|&i| self.prim_bounds[i as usize])
            .reduce(|a, b| a.union(&b))
            .expect("non-empty range");
        let id = self.nodes.len() as u32;
        let count = end - start;
        if count <= LEAF_SIZE {
            self.nodes.push(Node {
                bounds,
                kind: NodeKind::Leaf {
                    start: start as u32,
                    count: count as u32,
                },
            });
            return id;
        }
        self.nodes.push(Node {
            bounds,
            kind: NodeKind::Leaf { start: 0, count: 0 },
        });
        let axis = bounds.longest_axis();
        let prims = &self.prim_bounds;
        // Stable sort keeps input order among equal centroids.
        self.order[start..end].sort_by(|&a, &b| {
            let ca = prims[a as usize].min[axis] + prims[a as usize].max[axis];
            let cb = prims[b as usize].min[axis] + prims[b as usize].max[axis];
            ca.total_cmp(&cb)
        });
        let mid = start + count / 2;
        let left = self.build_node(start, mid);
        let right = self.build_node(mid, end);
        self.nodes[id as usize].kind = NodeKind::Inner { left, right };
        id
    }

    pub fn len(&self) -> usize {
        self.prim_bounds.len()
    }

    pub fn is_empty(&self) -> bool {
        self.prim_bounds.is_empty()
    }

    pub fn bounds(&self) -> Option<Aabb> {
        self.nodes.first().map(|n| n.bounds)
    }

    pub fn primitive_bounds(&self, id: usize) -> &Aabb {
        &self.prim_bounds[id]
    }

    /// Calls `visit` for every primitive whose box overlaps `probe`, in leaf order.
    pub fn query_with(&self, probe: &Aabb, mut visit: impl FnMut(usize)) {
        if self.nodes.is_empty() {
            return;
        }
        let mut stack: Vec<u32> = Vec::with_capacity(32);
        stack.push(0);
        while let Some(n) = stack.pop() {
            let node = &self.nodes[n as usize];
            if !aabb_overlap(&node.bounds, probe) {
                continue;
            }
            match node.kind {
                NodeKind::Leaf { start, count } => {
                    for &p in &self.order[start as usize..(start + count) as usize] {
                        if aabb_overlap(&self.prim_bounds[p as usize], probe) {
                            visit(p as usize);
                        }
                    }
                }
                NodeKind::Inner { left, right } => {
                    stack.push(right);
                    stack.push(left);
                }
            }
        }
    }

    /// True if `pred` holds for some primitive whose box overlaps `probe`.
    /// Stops at the first hit.
    pub fn any(&self, probe: &Aabb, mut pred: impl FnMut(usize) -> bool) -> bool {
        if self.nodes.is_empty() {
            return false;
        }
        let mut stack: Vec<u32> = Vec::with_capacity(32);
        stack.push(0);
        while let Some(n) = stack.pop() {
            let node = &self.nodes[n as usize];
            if !aabb_overlap(&node.bounds, probe) {
                continue;
            }
            match node.kind {
                NodeKind::Leaf { start, count } => {
                    for &p in &self.order[start as usize..(start + count) as usize] {
                        if aabb_overlap(&self.prim_bounds[p as usize], probe) && pred(p as usize) {
                            return true;
                        }
                    }
                }
                NodeKind::Inner { left, right } => {
                    stack.push(right);
                    stack.push(left);
                }
            }
        }
        false
    }

    /// Ids of all primitives whose box overlaps `probe`, ascending.
    pub fn query(&self, probe: &Aabb) -> Vec<usize> {
        let mut out = Vec::new();
        self.query_with(probe, |p| out.push(p));
        out.sort_unstable();
        out
    }

    /// Checks the containment and exactly-once invariants. Test support.
    pub fn check_invariants(&self) -> Result<(), String> {
        let mut seen = vec![0u32; self.prim_bounds.len()];
        for (i, node) in self.nodes.iter().enumerate() {
            match node.kind {
                NodeKind::Leaf { start, count } => {
                    if count as usize > LEAF_SIZE {
                        return Err(format!("leaf {i} holds {count} primitives"));
                    }
                    for &p in &self.order[start as usize..(start + count) as usize] {
                        seen[p as usize] += 1;
                        if !node.bounds.contains(&self.prim_bounds[p as usize]) {
                            return Err(format!("leaf {i} does not contain primitive {p}"));
                        }
                    }
                }
                NodeKind::Inner { left, right } => {
                    for c in [left, right] {
                        if !node.bounds.contains(&self.nodes[c as usize].bounds) {
                            return Err(format!("node {i} does not contain child {c}"));
                        }
                    }
                }
            }
        }
        match seen.iter().position(|&c| c != 1) {
            Some(p) => Err(format!("primitive {p} appears in {} leaves", seen[p])),
            None => Ok(()),
        }
    }
}
