use std::cmp::Ordering;
use std::collections::BinaryHeap;

/// Exact k-nearest-neighbor search over 3D points.
///
/// Neighbors are ordered by squared distance, ties by point index, so
/// results are fully deterministic.
#[derive(Debug, Clone)]
pub struct KdTree {
    points: Vec<[f64; 3]>,
    /// Point indices arranged as an implicit balanced tree: the median of
    /// each range is its node, split axis cycling x, y, z by depth.
    order: Vec<u32>,
}

const LEAF_SIZE: usize = 8;

#[derive(PartialEq)]
struct Candidate {
    dist2: f64,
    index: u32,
}

impl Eq for Candidate {}

impl Ord for Candidate {
    fn cmp(&self, other: &Self) -> Ordering {
        self.dist2
            .total_cmp(&other.dist2)
            .then(self.index.cmp(&other.index))
    }
}

impl PartialOrd for Candidate {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl KdTree {
    pub fn new(points: Vec<[f64; 3]>) -> Self {
        let mut order: Vec<u32> = (0..points.len() as u32).collect();
        build(&points, &mut order, 0);
        KdTree { points, order }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// The `k` nearest points to `query` as `(index, squared distance)`.
    pub fn nearest(&self, query: [f64; 3], k: usize) -> Vec<(u32, f64)> {
        if k == 0 || self.points.is_empty() {
            return Vec::new();
        }
        let mut heap = BinaryHeap::with_capacity(k + 1);
        self.search(&self.order, 0, query, k, &mut heap);
        let mut out: Vec<Candidate> = heap.into_vec();
        out.sort();
        out.into_iter().map(|c| (c.index, c.dist2)).collect()
    }

    fn search(
        &self,
        range: &[u32],
        depth: usize,
        query: [f64; 3],
        k: usize,
        heap: &mut BinaryHeap<Candidate>,
    ) {
        let mut offer = |index: u32| {
            let p = self.points[index as usize];
            let dist2 = (0..3).map(|a| (p[a] - query[a]).powi(2)).sum();
            let c = Candidate { dist2, index };
            if heap.len() < k {
                heap.push(c);
            } else if c < *heap.peek().unwrap() {
                heap.pop();
                heap.push(c);
            }
        };
        if range.len() <= LEAF_SIZE {
            range.iter().for_each(|&i| offer(i));
            return;
        }
        let mid = range.len() / 2;
        let axis = depth % 3;
        let node = range[mid];
        offer(node);
        let delta = query[axis] - self.points[node as usize][axis];
        let (near, far) = if delta < 0.0 {
            (&range[..mid], &range[mid + 1..])
        } else {
            (&range[mid + 1..], &range[..mid])
        };
        self.search(near, depth + 1, query, k, heap);
        // equal distances must still be visited for the index tie-break
        if heap.len() < k || delta * delta <= heap.peek().unwrap().dist2 {
            self.search(far, depth + 1, query, k, heap);
        }
    }
}

fn build(points: &[[f64; 3]], range: &mut [u32], depth: usize) {
    if range.len() <= LEAF_SIZE {
        return;
    }
    let axis = depth % 3;
    let mid = range.len() / 2;
    range.select_nth_unstable_by(mid, |&a, &b| {
        points[a as usize][axis]
            .total_cmp(&points[b as usize][axis])
            .then(a.cmp(&b))
    });
    let (left, rest) = range.split_at_mut(mid);
    build(points, left, depth + 1);
    build(points, &mut rest[1..], depth + 1);
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn brute(points: &[[f64; 3]], q: [f64; 3], k: usize) -> Vec<(u32, f64)> {
        let mut all: Vec<(u32, f64)> = points
            .iter()
            .enumerate()
            .map(|(i, p)| (i as u32, (0..3).map(|a| (p[a] - q[a]).powi(2)).sum()))
            .collect();
        all.sort_by(|a, b| a.1.total_cmp(&b.1).then(a.0.cmp(&b.0)));
        all.truncate(k);
        all
    }

    #[test]
    fn ties_break_by_index() {
        let points = vec![[1.0, 0.0, 0.0]; 20];
        let tree = KdTree::new(points);
        let got: Vec<u32> = tree.nearest([0.0; 3], 5).iter().map(|n| n.0).collect();
        assert_eq!(got, vec![0, 1, 2, 3, 4]);
    }

    #[test]
    fn empty_and_oversized_k() {
        assert!(KdTree::new(Vec::new()).nearest([0.0; 3], 3).is_empty());
        let tree = KdTree::new(vec![[0.0; 3], [1.0; 3]]);
        assert_eq!(tree.nearest([0.9; 3], 10).len(), 2);
        assert_eq!(tree.nearest([0.9; 3], 10)[0].0, 1);
    }

    proptest! {
        #[test]
        fn matches_brute_force(
            pts in prop::collection::vec(prop::array::uniform3(-4i32..4), 1..120),
            q in prop::array::uniform3(-5i32..5),
            k in 1usize..20,
        ) {
            // integer grid coordinates force plenty of exact distance ties
            let points: Vec<[f64; 3]> = pts.iter().map(|p| p.map(|v| v as f64 * 0.5)).collect();
            let q = q.map(|v| v as f64 * 0.5);
            let tree = KdTree::new(points.clone());
            prop_assert_eq!(tree.nearest(q, k), brute(&points, q, k));
        }
    }
}
