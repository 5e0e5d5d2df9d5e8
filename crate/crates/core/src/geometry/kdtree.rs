use alloc::collections::BinaryHeap;
use alloc::vec::Vec;
use core::cmp::Ordering;

use super::Point3;

const LEAF_SIZE: usize = 8;

#[derive(Debug, Clone)]
enum Node {
    Leaf { start: usize, end: usize },
    Split { axis: usize, value: f64, left: usize, right: usize },
}

/// Static 3-d tree over a borrowed-by-copy point set. Immutable after construction.
#[derive(Debug, Clone)]
pub struct KdTree {
    points: Vec<Point3>,
    /// Permutation of point indices; leaves reference contiguous ranges of it.
    order: Vec<usize>,
    nodes: Vec<Node>,
}

impl KdTree {
    pub fn build(points: &[Point3]) -> Self {
        let mut tree = KdTree {
            points: points.to_vec(),
            order: (0..points.len()).collect(),
            nodes: Vec::new(),
        };
        if !points.is_empty() {
            tree.build_node(0, points.len());
        }
        tree
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &[Point3] {
        &self.points
    }

    fn build_node(&mut self, start: usize, end: usize) -> usize {
        let id = self.nodes.len();
        if end - start <= LEAF_SIZE {
            self.nodes.push(Node::Leaf { start, end });
            return id;
        }
        // split on the widest axis for better balance on flat clouds
        let axis = self.widest_axis(start, end);
        let mid = start + (end - start) / 2;
        let pts = &self.points;
        self.order[start..end].select_nth_unstable_by(mid - start, |&a, &b| {
            pts[a].coord(axis).total_cmp(&pts[b].coord(axis))
        });
        let value = self.points[self.order[mid]].coord(axis);
        self.nodes.push(Node::Leaf { start: 0, end: 0 });
        let left = self.build_node(start, mid);
        let right = self.build_node(mid, end);
        self.nodes[id] = Node::Split { axis, value, left, right };
        id
    }

    fn widest_axis(&self, start: usize, end: usize) -> usize {
        let mut lo = [f64::INFINITY; 3];
        let mut hi = [f64::NEG_INFINITY; 3];
        for &i in &self.order[start..end] {
            let p = self.points[i].to_array();
            for a in 0..3 {
                lo[a] = lo[a].min(p[a]);
                hi[a] = hi[a].max(p[a]);
            }
        }
        (0..3)
            .max_by(|&a, &b| (hi[a] - lo[a]).total_cmp(&(hi[b] - lo[b])))
            .unwrap_or(0)
    }

    /// Indices of at most `k_max` points within `radius` of `query` (inclusive),
    /// nearest first, equal distances ordered by index.
    pub fn radius_search(&self, query: &Point3, radius: f64, k_max: usize) -> Vec<usize> {
        if self.nodes.is_empty() || k_max == 0 || !(radius >= 0.0) {
            return Vec::new();
        }
        let mut best = BinaryHeap::new();
        self.collect(0, query, radius * radius, k_max, &mut best);
        let mut hits: Vec<Hit> = best.into_vec();
        hits.sort_unstable();
        hits.into_iter().map(|h| h.index).collect()
    }

    fn collect(&self, node: usize, q: &Point3, r2: f64, k: usize, best: &mut BinaryHeap<Hit>) {
        match self.nodes[node] {
            Node::Leaf { start, end } => {
                for &index in &self.order[start..end] {
                    let d2 = self.points[index].distance_squared(q);
                    if d2 > r2 {
                        continue;
                    }
                    let hit = Hit { d2, index };
                    if best.len() < k {
                        best.push(hit);
                    } else if best.peek().is_some_and(|worst| hit < *worst) {
                        best.pop();
                        best.push(hit);
                    }
                }
            }
            Node::Split { axis, value, left, right } => {
                let diff = q.coord(axis) - value;
                let (near, far) = if diff <= 0.0 { (left, right) } else { (right, left) };
                self.collect(near, q, r2, k, best);
                let bound = match best.peek() {
                    Some(worst) if best.len() == k => worst.d2.min(r2),
                    _ => r2,
                };
                // left holds coords <= value, right holds coords >= value
                if diff == 0.0 || diff * diff <= bound {
                    self.collect(far, q, r2, k, best);
                }
            }
        }
    }
}

/// Candidate ordered by `(distance, index)`.
#[derive(Debug, Clone, Copy, PartialEq)]
struct Hit {
    d2: f64,
    index: usize,
}

impl Eq for Hit {}

impl PartialOrd for Hit {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Hit {
    fn cmp(&self, other: &Self) -> Ordering {
        self.d2.total_cmp(&other.d2).then(self.index.cmp(&other.index))
    }
}
