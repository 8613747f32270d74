//! Small kd-tree for k-nearest-neighbor queries over 3D points.

use crate::geometry::Vec3;

struct Node {
    point_idx: usize,
    axis: usize,
    left: Option<usize>,
    right: Option<usize>,
}

pub struct KdTree<'a> {
    points: &'a [Vec3],
    nodes: Vec<Node>,
    root: Option<usize>,
}

fn coord(p: Vec3, axis: usize) -> f64 {
    match axis {
        0 => p.x,
        1 => p.y,
        _ => p.z,
    }
}

impl<'a> KdTree<'a> {
    pub fn build(points: &'a [Vec3]) -> Self {
        let mut indices: Vec<usize> = (0..points.len()).collect();
        let mut nodes = Vec::with_capacity(points.len());
        let root = Self::build_rec(points, &mut indices[..], 0, &mut nodes);
        KdTree { points, nodes, root }
    }

    fn build_rec(
        points: &[Vec3],
        indices: &mut [usize],
        depth: usize,
        nodes: &mut Vec<Node>,
    ) -> Option<usize> {
        if indices.is_empty() {
            return None;
        }
        let axis = depth % 3;
        let mid = indices.len() / 2;
        indices.select_nth_unstable_by(mid, |&a, &b| {
            coord(points[a], axis).total_cmp(&coord(points[b], axis))
        });
        let point_idx = indices[mid];
        let (left_slice, rest) = indices.split_at_mut(mid);
        let right_slice = &mut rest[1..];
        let left = Self::build_rec(points, left_slice, depth + 1, nodes);
        let right = Self::build_rec(points, right_slice, depth + 1, nodes);
        nodes.push(Node { point_idx, axis, left, right });
        Some(nodes.len() - 1)
    }

    /// Mean distance from `query` (at index `skip`) to its `k` nearest
    /// neighbors, excluding itself by index.
    pub fn mean_knn_distance(&self, query: Vec3, skip: usize, k: usize) -> f64 {
        let mut heap = BoundedMaxHeap::new(k);
        self.search(self.root, query, skip, &mut heap);
        heap.mean_sqrt()
    }

    fn search(&self, node: Option<usize>, query: Vec3, skip: usize, heap: &mut BoundedMaxHeap) {
        let Some(idx) = node else { return };
        let n = &self.nodes[idx];
        if n.point_idx != skip {
            let d2 = {
                let d = self.points[n.point_idx] - query;
                d.dot(d)
            };
            heap.push(d2);
        }
        let delta = coord(query, n.axis) - coord(self.points[n.point_idx], n.axis);
        let (near, far) = if delta < 0.0 { (n.left, n.right) } else { (n.right, n.left) };
        self.search(near, query, skip, heap);
        if !heap.full() || delta * delta <= heap.worst() {
            self.search(far, query, skip, heap);
        }
    }
}

/// Fixed-capacity max-heap of squared distances.
struct BoundedMaxHeap {
    cap: usize,
    data: Vec<f64>,
}

impl BoundedMaxHeap {
    fn new(cap: usize) -> Self {
        BoundedMaxHeap { cap, data: Vec::with_capacity(cap + 1) }
    }

    fn full(&self) -> bool {
        self.data.len() >= self.cap
    }

    fn worst(&self) -> f64 {
        self.data.first().copied().unwrap_or(f64::INFINITY)
    }

    fn push(&mut self, d2: f64) {
        if self.full() {
            if d2 >= self.worst() {
                return;
            }
            self.pop_root();
        }
        self.data.push(d2);
        let mut i = self.data.len() - 1;
        while i > 0 {
            let parent = (i - 1) / 2;
            if self.data[parent] < self.data[i] {
                self.data.swap(parent, i);
                i = parent;
            } else {
                break;
            }
        }
    }

    fn pop_root(&mut self) {
        let last = self.data.len() - 1;
        self.data.swap(0, last);
        self.data.pop();
        let mut i = 0;
        loop {
            let (l, r) = (2 * i + 1, 2 * i + 2);
            let mut largest = i;
            if l < self.data.len() && self.data[l] > self.data[largest] {
                largest = l;
            }
            if r < self.data.len() && self.data[r] > self.data[largest] {
                largest = r;
            }
            if largest == i {
                break;
            }
            self.data.swap(i, largest);
            i = largest;
        }
    }

    fn mean_sqrt(&self) -> f64 {
        if self.data.is_empty() {
            return 0.0;
        }
        self.data.iter().map(|d2| d2.sqrt()).sum::<f64>() / self.data.len() as f64
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn brute_mean_knn(points: &[Vec3], idx: usize, k: usize) -> f64 {
        let mut dists: Vec<f64> = points
            .iter()
            .enumerate()
            .filter(|(i, _)| *i != idx)
            .map(|(_, p)| points[idx].dist(*p))
            .collect();
        dists.sort_by(f64::total_cmp);
        let take = dists.len().min(k);
        dists[..take].iter().sum::<f64>() / take as f64
    }

    #[test]
    fn matches_brute_force_on_random_clouds() {
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        for _ in 0..10 {
            let points: Vec<Vec3> = (0..200)
                .map(|_| {
                    Vec3::new(
                        rng.random_range(-5.0..5.0),
                        rng.random_range(-5.0..5.0),
                        rng.random_range(0.0..2.0),
                    )
                })
                .collect();
            let tree = KdTree::build(&points);
            for idx in [0, 17, 99, 199] {
                let fast = tree.mean_knn_distance(points[idx], idx, 8);
                let slow = brute_mean_knn(&points, idx, 8);
                assert!((fast - slow).abs() < 1e-9, "idx {idx}: {fast} vs {slow}");
            }
        }
    }

    #[test]
    fn handles_duplicate_points() {
        let points = vec![Vec3::new(1.0, 1.0, 0.0); 5];
        let tree = KdTree::build(&points);
        assert_eq!(tree.mean_knn_distance(points[0], 0, 3), 0.0);
    }
}
