//! Small k-d tree over 3D points for nearest-neighbor and k-NN queries.

use crate::math::Vec3;
use crate::scalar::Scalar;

#[derive(Clone, Debug)]
struct Node {
    point: u32,
    axis: u8,
    left: i32,
    right: i32,
}

/// Immutable k-d tree built once and shared read-only.
#[derive(Clone, Debug)]
pub struct KdTree<T> {
    points: Vec<Vec3<T>>,
    nodes: Vec<Node>,
    root: i32,
}

impl<T: Scalar> KdTree<T> {
    pub fn build(points: Vec<Vec3<T>>) -> Self {
        let mut idx: Vec<u32> = (0..points.len() as u32).collect();
        let mut nodes = Vec::with_capacity(points.len());
        let root = Self::build_rec(&points, &mut idx[..], 0, &mut nodes);
        Self { points, nodes, root }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn point(&self, i: usize) -> Vec3<T> {
        self.points[i]
    }

    fn build_rec(points: &[Vec3<T>], idx: &mut [u32], depth: usize, nodes: &mut Vec<Node>) -> i32 {
        if idx.is_empty() {
            return -1;
        }
        let axis = (depth % 3) as u8;
        let mid = idx.len() / 2;
        idx.select_nth_unstable_by(mid, |&a, &b| {
            let pa = points[a as usize][axis as usize];
            let pb = points[b as usize][axis as usize];
            pa.partial_cmp(&pb).unwrap_or(std::cmp::Ordering::Equal)
        });
        let point = idx[mid];
        let slot = nodes.len();
        nodes.push(Node { point, axis, left: -1, right: -1 });
        let (lo, hi) = idx.split_at_mut(mid);
        let left = Self::build_rec(points, lo, depth + 1, nodes);
        let right = Self::build_rec(points, &mut hi[1..], depth + 1, nodes);
        nodes[slot].left = left;
        nodes[slot].right = right;
        slot as i32
    }

    /// Index and squared distance of the nearest point.
    pub fn nearest(&self, query: Vec3<T>) -> Option<(usize, T)> {
        if self.is_empty() {
            return None;
        }
        let mut best = (usize::MAX, T::infinity());
        self.nearest_rec(self.root, query, &mut best);
        Some(best)
    }

    fn nearest_rec(&self, node: i32, query: Vec3<T>, best: &mut (usize, T)) {
        if node < 0 {
            return;
        }
        let n = &self.nodes[node as usize];
        let p = self.points[n.point as usize];
        let d2 = (p - query).norm_sq();
        if d2 < best.1 || (d2 == best.1 && (n.point as usize) < best.0) {
            *best = (n.point as usize, d2);
        }
        let axis = n.axis as usize;
        let delta = query[axis] - p[axis];
        let (near, far) = if delta < T::zero() { (n.left, n.right) } else { (n.right, n.left) };
        self.nearest_rec(near, query, best);
        if delta * delta < best.1 {
            self.nearest_rec(far, query, best);
        }
    }

    /// The `k` nearest points (optionally skipping one index), sorted by
    /// ascending squared distance.
    pub fn knn(&self, query: Vec3<T>, k: usize, skip: Option<usize>) -> Vec<(usize, T)> {
        if k == 0 || self.is_empty() {
            return Vec::new();
        }
        let mut heap: Vec<(usize, T)> = Vec::with_capacity(k + 1);
        self.knn_rec(self.root, query, k, skip, &mut heap);
        heap
    }

    fn knn_rec(
        &self,
        node: i32,
        query: Vec3<T>,
        k: usize,
        skip: Option<usize>,
        heap: &mut Vec<(usize, T)>,
    ) {
        if node < 0 {
            return;
        }
        let n = &self.nodes[node as usize];
        let pi = n.point as usize;
        if Some(pi) != skip {
            let d2 = (self.points[pi] - query).norm_sq();
            if heap.len() < k || d2 < heap.last().unwrap().1 {
                let pos = heap.partition_point(|&(_, h)| h <= d2);
                heap.insert(pos, (pi, d2));
                if heap.len() > k {
                    heap.pop();
                }
            }
        }
        let axis = n.axis as usize;
        let delta = query[axis] - self.points[pi][axis];
        let (near, far) = if delta < T::zero() { (n.left, n.right) } else { (n.right, n.left) };
        self.knn_rec(near, query, k, skip, heap);
        let worst = if heap.len() < k { T::infinity() } else { heap.last().unwrap().1 };
        if delta * delta < worst {
            self.knn_rec(far, query, k, skip, heap);
        }
    }
}
