//! Bounding volume hierarchy over triangles for counting every crossing of
//! a ray segment.

use crate::Vec3;

const LEAF_SIZE: usize = 4;

#[derive(Debug, Clone, Copy)]
struct Aabb {
    min: Vec3,
    max: Vec3,
}

impl Aabb {
    fn empty() -> Self {
        Aabb { min: Vec3::repeat(f64::INFINITY), max: Vec3::repeat(f64::NEG_INFINITY) }
    }

    fn grow(&mut self, p: &Vec3) {
        self.min = self.min.inf(p);
        self.max = self.max.sup(p);
    }

    /// Slab test restricted to `[t0, t1]`.
    fn hit(&self, origin: &Vec3, inv_dir: &Vec3, mut t0: f64, mut t1: f64) -> bool {
        for a in 0..3 {
            let mut near = (self.min[a] - origin[a]) * inv_dir[a];
            let mut far = (self.max[a] - origin[a]) * inv_dir[a];
            if near > far {
                std::mem::swap(&mut near, &mut far);
            }
            // NaN from 0 * inf: treat the axis as unconstrained
            if near.is_nan() || far.is_nan() {
                if origin[a] < self.min[a] || origin[a] > self.max[a] {
                    return false;
                }
                continue;
            }
            t0 = t0.max(near);
            t1 = t1.min(far * (1.0 + 4.0 * f64::EPSILON));
            if t0 > t1 {
                return false;
            }
        }
        true
    }
}

#[derive(Debug, Clone, Copy)]
struct Node {
    bounds: Aabb,
    /// Leaf: first triangle. Interior: index of the right child (left is next).
    offset: usize,
    /// Zero for interior nodes.
    count: usize,
}

#[derive(Debug, Clone)]
pub struct TriangleBvh {
    nodes: Vec<Node>,
    tris: Vec<[Vec3; 3]>,
}

impl TriangleBvh {
    /// Zero-area triangles are dropped.
    pub fn new(triangles: impl IntoIterator<Item = [Vec3; 3]>) -> Self {
        let mut tris: Vec<[Vec3; 3]> = triangles
            .into_iter()
            .filter(|[a, b, c]| (b - a).cross(&(c - a)).norm_squared() > 0.0)
            .collect();
        let mut nodes = Vec::new();
        if !tris.is_empty() {
            let n = tris.len();
            build(&mut nodes, &mut tris, 0, n);
        }
        TriangleBvh { nodes, tris }
    }

    pub fn len(&self) -> usize {
        self.tris.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tris.is_empty()
    }

    /// Number of triangles crossed by `origin + t * dir` for `t` strictly
    /// inside `(t_min, t_max)`.
    pub fn count_hits(&self, origin: &Vec3, dir: &Vec3, t_min: f64, t_max: f64) -> usize {
        if self.nodes.is_empty() {
            return 0;
        }
        let inv = dir.map(|d| 1.0 / d);
        let mut hits = 0;
        let mut stack = vec![0usize];
        while let Some(n) = stack.pop() {
            let node = &self.nodes[n];
            if !node.bounds.hit(origin, &inv, t_min, t_max) {
                continue;
            }
            if node.count > 0 {
                for tri in &self.tris[node.offset..node.offset + node.count] {
                    if let Some(t) = intersect(origin, dir, tri) {
                        if t > t_min && t < t_max {
                            hits += 1;
                        }
                    }
                }
            } else {
                stack.push(n + 1);
                stack.push(node.offset);
            }
        }
        hits
    }
}

fn build(nodes: &mut Vec<Node>, tris: &mut [[Vec3; 3]], start: usize, end: usize) -> usize {
    let mut bounds = Aabb::empty();
    let mut centroids = Aabb::empty();
    for t in &tris[start..end] {
        t.iter().for_each(|p| bounds.grow(p));
        centroids.grow(&((t[0] + t[1] + t[2]) / 3.0));
    }
    let index = nodes.len();
    nodes.push(Node { bounds, offset: start, count: end - start });
    if end - start <= LEAF_SIZE {
        return index;
    }
    let extent = centroids.max - centroids.min;
    let axis = extent.imax();
    if extent[axis] <= 0.0 {
        return index;
    }
    let mid = (start + end) / 2;
    let key = |t: &[Vec3; 3]| t[0][axis] + t[1][axis] + t[2][axis];
    tris[start..end].select_nth_unstable_by(mid - start, |a, b| key(a).total_cmp(&key(b)));
    build(nodes, tris, start, mid);
    let right = build(nodes, tris, mid, end);
    nodes[index].offset = right;
    nodes[index].count = 0;
    index
}

/// Möller–Trumbore; returns the ray parameter of the crossing.
pub fn intersect(origin: &Vec3, dir: &Vec3, [a, b, c]: &[Vec3; 3]) -> Option<f64> {
    let e1 = b - a;
    let e2 = c - a;
    let pvec = dir.cross(&e2);
    let det = e1.dot(&pvec);
    if det.abs() <= 1e-14 * e1.norm() * e2.norm() * dir.norm() {
        return None;
    }
    let inv = 1.0 / det;
    let tvec = origin - a;
    let u = tvec.dot(&pvec) * inv;
    if !(0.0..=1.0).contains(&u) {
        return None;
    }
    let qvec = tvec.cross(&e1);
    let v = dir.dot(&qvec) * inv;
    if v < 0.0 || u + v > 1.0 {
        return None;
    }
    Some(e2.dot(&qvec) * inv)
}
