use crate::linalg::Vec3;
use crate::scalar::Real;

const LEAF_SIZE: usize = 8;

#[derive(Debug, Clone)]
enum Node<T> {
    Leaf { lo: usize, hi: usize },
    Split { axis: usize, value: T, left: usize, right: usize },
}

/// Exact nearest-neighbor index over a fixed point set. Among equidistant points the lowest
/// original index wins, matching an exhaustive scan.
#[derive(Debug, Clone)]
pub struct KdTree<T> {
    points: Vec<Vec3<T>>,
    order: Vec<usize>,
    nodes: Vec<Node<T>>,
}

impl<T: Real> KdTree<T> {
    pub fn new(points: &[Vec3<T>]) -> Self {
        let mut tree = Self { points: points.to_vec(), order: (0..points.len()).collect(), nodes: Vec::new() };
        if !points.is_empty() {
            tree.build(0, points.len());
        }
        tree
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    fn build(&mut self, lo: usize, hi: usize) -> usize {
        let id = self.nodes.len();
        if hi - lo <= LEAF_SIZE {
            self.nodes.push(Node::Leaf { lo, hi });
            return id;
        }
        let (mut min, mut max) = (Vec3::splat(T::infinity()), Vec3::splat(T::neg_infinity()));
        for &i in &self.order[lo..hi] {
            min = min.min(self.points[i]);
            max = max.max(self.points[i]);
        }
        let axis = (max - min).max_axis();
        let mid = lo + (hi - lo) / 2;
        let points = &self.points;
        self.order[lo..hi].select_nth_unstable_by(mid - lo, |&a, &b| {
            points[a][axis].partial_cmp(&points[b][axis]).expect("finite points").then(a.cmp(&b))
        });
        let value = self.points[self.order[mid]][axis];
        self.nodes.push(Node::Split { axis, value, left: 0, right: 0 });
        let left = self.build(lo, mid);
        let right = self.build(mid, hi);
        self.nodes[id] = Node::Split { axis, value, left, right };
        id
    }

    /// `(index, squared distance)` of the nearest point; `None` for an empty tree.
    pub fn nearest(&self, q: Vec3<T>) -> Option<(usize, T)> {
        if self.points.is_empty() {
            return None;
        }
        let mut best = (usize::MAX, T::infinity());
        self.search(0, q, &mut best);
        Some(best)
    }

    fn search(&self, node: usize, q: Vec3<T>, best: &mut (usize, T)) {
        match self.nodes[node] {
            Node::Leaf { lo, hi } => {
                for &i in &self.order[lo..hi] {
                    let d = (self.points[i] - q).norm_squared();
                    if d < best.1 || (d == best.1 && i < best.0) {
                        *best = (i, d);
                    }
                }
            }
            Node::Split { axis, value, left, right } => {
                let diff = q[axis] - value;
                let (near, far) = if diff < T::zero() { (left, right) } else { (right, left) };
                self.search(near, q, best);
                if diff * diff <= best.1 {
                    self.search(far, q, best);
                }
            }
        }
    }
}

/// Exhaustive scan with the same tie rule as [`KdTree::nearest`].
pub fn brute_force_nearest<T: Real>(points: &[Vec3<T>], q: Vec3<T>) -> Option<(usize, T)> {
    let mut best: Option<(usize, T)> = None;
    for (i, p) in points.iter().enumerate() {
        let d = (*p - q).norm_squared();
        if best.is_none_or(|(_, bd)| d < bd) {
            best = Some((i, d));
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sampling::{streams, RayRng};

    #[test]
    fn matches_exhaustive_search() {
        let mut rng = RayRng::new(21, streams::EVAL);
        for n in [1, 5, 9, 200, 1000] {
            let mut p = || Vec3::new(rng.uniform(), rng.uniform(), rng.uniform());
            let pts: Vec<Vec3<f64>> = (0..n).map(|_| p()).collect();
            let queries: Vec<Vec3<f64>> = (0..200).map(|_| p()).collect();
            let tree = KdTree::new(&pts);
            for q in queries {
                assert_eq!(tree.nearest(q), brute_force_nearest(&pts, q));
            }
        }
    }

    #[test]
    fn duplicates_resolve_to_lowest_index() {
        let pts = vec![Vec3::new(1.0, 0.0, 0.0); 20];
        let tree = KdTree::new(&pts);
        assert_eq!(tree.nearest(Vec3::zero()), Some((0, 1.0)));
        let grid: Vec<Vec3<f64>> = (0..27).map(|i| Vec3::new((i % 3) as f64, ((i / 3) % 3) as f64, (i / 9) as f64)).collect();
        let tree = KdTree::new(&grid);
        let q = Vec3::new(0.5, 0.5, 0.5);
        assert_eq!(tree.nearest(q), brute_force_nearest(&grid, q));
        assert_eq!(tree.nearest(q).unwrap().0, 0);
    }

    #[test]
    fn empty_tree() {
        assert!(KdTree::<f64>::new(&[]).nearest(Vec3::zero()).is_none());
    }
}
