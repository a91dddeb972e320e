use super::skeleton::HandSkeleton;
use crate::error::{invalid, Result};
use crate::linalg::Vec3;
use crate::scalar::Real;

/// Geodesic distance from a point on bone `(a, b)` to every joint of a tree given by `parents`:
/// along-bone distance to both endpoints, then shortest paths over the bone graph.
pub fn tree_geodesic_distances<T: Real>(
    joints: &[Vec3<T>],
    parents: &[Option<usize>],
    bone: (usize, usize),
    p_d: Vec3<T>,
) -> Vec<T> {
    let n = joints.len();
    let mut adj = vec![Vec::new(); n];
    for (c, p) in parents.iter().enumerate() {
        if let Some(p) = *p {
            let w = joints[c].distance(joints[p]);
            adj[c].push((p, w));
            adj[p].push((c, w));
        }
    }
    let mut dist = vec![T::infinity(); n];
    dist[bone.0] = p_d.distance(joints[bone.0]);
    dist[bone.1] = p_d.distance(joints[bone.1]);
    let mut done = vec![false; n];
    // The graph is tiny; a linear scan for the next node is simpler than a heap.
    while let Some(u) = (0..n).filter(|&i| !done[i] && dist[i].is_finite()).min_by(|&i, &j| dist[i].partial_cmp(&dist[j]).unwrap().then(i.cmp(&j))) {
        done[u] = true;
        for &(v, w) in &adj[u] {
            if dist[u] + w < dist[v] {
                dist[v] = dist[u] + w;
            }
        }
    }
    dist
}

/// The `k` joints with the smallest geodesic distance, sorted by distance with ties going to
/// the lower joint index.
pub fn tree_geodesic_knn<T: Real>(
    joints: &[Vec3<T>],
    parents: &[Option<usize>],
    bone: (usize, usize),
    p_d: Vec3<T>,
    k: usize,
) -> Result<Vec<usize>> {
    if k == 0 || k > joints.len() {
        return Err(invalid(format!("K_3D must be in 1..={}, got {k}", joints.len())));
    }
    let dist = tree_geodesic_distances(joints, parents, bone, p_d);
    let mut order: Vec<usize> = (0..joints.len()).collect();
    order.sort_by(|&i, &j| dist[i].partial_cmp(&dist[j]).unwrap().then(i.cmp(&j)));
    order.truncate(k);
    Ok(order)
}

pub fn geodesic_distances<T: Real>(skeleton: &HandSkeleton<T>, p_d: Vec3<T>, bone: usize) -> Vec<T> {
    tree_geodesic_distances(skeleton.joints(), skeleton.parents(), skeleton.bone(bone), p_d)
}

pub fn geodesic_knn<T: Real>(skeleton: &HandSkeleton<T>, p_d: Vec3<T>, bone: usize, k: usize) -> Result<Vec<usize>> {
    if bone >= skeleton.bone_count() {
        return Err(invalid(format!("bone index {bone} out of range")));
    }
    tree_geodesic_knn(skeleton.joints(), skeleton.parents(), skeleton.bone(bone), p_d, k)
}
