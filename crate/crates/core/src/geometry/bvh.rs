use crate::error::{Error, Result};
use crate::linalg::Vec3;
use crate::scalar::Real;

use super::intersect::intersect_unchecked;
use super::mesh::{Aabb, TriangleMesh};
use super::check_unit;

pub const MAX_LEAF_SIZE: usize = 4;
const SAH_BINS: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NodeKind {
    Interior { left: usize, right: usize },
    /// Range into [`Bvh::face_order`].
    Leaf { start: usize, count: usize },
}

#[derive(Debug, Clone)]
pub struct BvhNode<T> {
    pub bounds: Aabb<T>,
    pub kind: NodeKind,
}

/// Bounding volume hierarchy over the faces of one mesh. Node 0 is the root.
#[derive(Debug, Clone)]
pub struct Bvh<T> {
    nodes: Vec<BvhNode<T>>,
    face_order: Vec<usize>,
}

/// First intersection of a ray with a mesh.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RayHit<T> {
    pub t: T,
    pub face: usize,
    pub point: Vec3<T>,
}

impl<T: Real> Bvh<T> {
    pub fn nodes(&self) -> &[BvhNode<T>] {
        &self.nodes
    }

    pub fn face_order(&self) -> &[usize] {
        &self.face_order
    }

    /// Checks containment, the leaf partition and tree shape against `mesh`.
    pub fn validate(&self, mesh: &TriangleMesh<T>) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidArgument(m));
        let mut seen_node = vec![false; self.nodes.len()];
        let mut seen_face = vec![0usize; mesh.face_count()];
        let mut stack = vec![(0usize, None::<usize>)];
        while let Some((ni, parent)) = stack.pop() {
            if ni >= self.nodes.len() || std::mem::replace(&mut seen_node[ni], true) {
                return bad(format!("node {ni} reached twice or missing"));
            }
            let node = &self.nodes[ni];
            if let Some(p) = parent {
                let pb = &self.nodes[p].bounds;
                if !(pb.contains(node.bounds.min, T::zero()) && pb.contains(node.bounds.max, T::zero())) {
                    return bad(format!("node {ni} escapes its parent {p}"));
                }
            }
            match node.kind {
                NodeKind::Interior { left, right } => {
                    stack.push((left, Some(ni)));
                    stack.push((right, Some(ni)));
                }
                NodeKind::Leaf { start, count } => {
                    if count == 0 || count > MAX_LEAF_SIZE {
                        return bad(format!("leaf {ni} holds {count} faces"));
                    }
                    for &f in &self.face_order[start..start + count] {
                        seen_face[f] += 1;
                        if !mesh.triangle(f).iter().all(|&v| node.bounds.contains(v, T::zero())) {
                            return bad(format!("face {f} escapes leaf {ni}"));
                        }
                    }
                }
            }
        }
        if seen_node.iter().any(|s| !s) {
            return bad("unreachable nodes".into());
        }
        if let Some(f) = seen_face.iter().position(|&c| c != 1) {
            return bad(format!("face {f} appears {} times in leaves", seen_face[f]));
        }
        Ok(())
    }
}

struct Builder<'a, T> {
    boxes: &'a [Aabb<T>],
    centroids: &'a [Vec3<T>],
    order: Vec<usize>,
    nodes: Vec<BvhNode<T>>,
}

/// Builds a BVH using binned surface-area-heuristic splits.
pub fn build_bvh<T: Real>(mesh: &TriangleMesh<T>) -> Result<Bvh<T>> {
    if mesh.face_count() == 0 {
        return Err(Error::EmptyMesh);
    }
    let boxes: Vec<Aabb<T>> = (0..mesh.face_count())
        .map(|f| {
            let mut bb = Aabb::empty();
            for v in mesh.triangle(f) {
                bb.grow(v);
            }
            // Pad so rounding in the slab test never culls a triangle that the exact test hits.
            let pad = T::epsilon() * T::lit(64.0) * T::one().max(bb.min.abs().max(bb.max.abs()).max_component());
            bb.min -= Vec3::splat(pad);
            bb.max += Vec3::splat(pad);
            bb
        })
        .collect();
    let centroids: Vec<Vec3<T>> = boxes.iter().map(Aabb::center).collect();
    let mut b = Builder { boxes: &boxes, centroids: &centroids, order: (0..mesh.face_count()).collect(), nodes: Vec::new() };
    b.build(0, mesh.face_count());
    Ok(Bvh { nodes: b.nodes, face_order: b.order })
}

impl<T: Real> Builder<'_, T> {
    fn build(&mut self, start: usize, end: usize) -> usize {
        let faces = &self.order[start..end];
        let bounds = faces.iter().fold(Aabb::empty(), |acc, &f| acc.union(&self.boxes[f]));
        let idx = self.nodes.len();
        let count = end - start;
        self.nodes.push(BvhNode { bounds, kind: NodeKind::Leaf { start, count } });
        if count <= MAX_LEAF_SIZE {
            return idx;
        }
        let mid = self.sah_partition(start, end).unwrap_or(start + count / 2);
        let left = self.build(start, mid);
        let right = self.build(mid, end);
        self.nodes[idx].kind = NodeKind::Interior { left, right };
        idx
    }

    /// Partitions `order[start..end]` at the cheapest binned split; `None` if every centroid coincides.
    fn sah_partition(&mut self, start: usize, end: usize) -> Option<usize> {
        let faces = &self.order[start..end];
        let mut cb = Aabb::empty();
        for &f in faces {
            cb.grow(self.centroids[f]);
        }
        let extent = cb.extent();
        let bins = T::lit(SAH_BINS as f64);
        let bin_of = |c: Vec3<T>, axis: usize| -> usize {
            let rel = (c[axis] - cb.min[axis]) / extent[axis] * bins;
            rel.to_usize().unwrap_or(0).min(SAH_BINS - 1)
        };
        let mut best: Option<(T, usize, usize)> = None;
        for axis in 0..3 {
            if !(extent[axis] > T::zero()) {
                continue;
            }
            let mut counts = [0usize; SAH_BINS];
            let mut bboxes = [Aabb::empty(); SAH_BINS];
            for &f in faces {
                let b = bin_of(self.centroids[f], axis);
                counts[b] += 1;
                bboxes[b] = bboxes[b].union(&self.boxes[f]);
            }
            for split in 1..SAH_BINS {
                let (mut lb, mut rb) = (Aabb::empty(), Aabb::empty());
                let (mut ln, mut rn) = (0usize, 0usize);
                for b in 0..split {
                    lb = lb.union(&bboxes[b]);
                    ln += counts[b];
                }
                for b in split..SAH_BINS {
                    rb = rb.union(&bboxes[b]);
                    rn += counts[b];
                }
                if ln == 0 || rn == 0 {
                    continue;
                }
                let cost = lb.surface_area() * T::lit(ln as f64) + rb.surface_area() * T::lit(rn as f64);
                if best.is_none_or(|(c, _, _)| cost < c) {
                    best = Some((cost, axis, split));
                }
            }
        }
        let (_, axis, split) = best?;
        let slice = &mut self.order[start..end];
        let mut i = 0;
        for j in 0..slice.len() {
            if bin_of(self.centroids[slice[j]], axis) < split {
                slice.swap(i, j);
                i += 1;
            }
        }
        Some(start + i)
    }
}

#[inline]
fn improves<T: Real>(t: T, face: usize, best: &Option<(T, usize)>) -> bool {
    match *best {
        None => true,
        Some((bt, bf)) => t < bt || (t == bt && face < bf),
    }
}

fn finish<T: Real>(origin: Vec3<T>, dir: Vec3<T>, best: Option<(T, usize)>) -> Option<RayHit<T>> {
    best.map(|(t, face)| RayHit { t, face, point: origin + dir * t })
}

/// First hit of the ray against `mesh`, accelerated by `bvh`. Ties in `t` go to the lowest face index.
pub fn cast_ray<T: Real>(bvh: &Bvh<T>, mesh: &TriangleMesh<T>, origin: Vec3<T>, direction: Vec3<T>) -> Result<Option<RayHit<T>>> {
    check_unit(direction)?;
    Ok(cast_unchecked(bvh, mesh, origin, direction))
}

pub(crate) fn cast_unchecked<T: Real>(bvh: &Bvh<T>, mesh: &TriangleMesh<T>, origin: Vec3<T>, dir: Vec3<T>) -> Option<RayHit<T>> {
    let inv = Vec3::new(T::one() / dir.x, T::one() / dir.y, T::one() / dir.z);
    let mut best: Option<(T, usize)> = None;
    let mut stack: Vec<(usize, T)> = Vec::with_capacity(64);
    let Some((t_root, _)) = bvh.nodes[0].bounds.ray_interval(origin, inv, dir) else {
        return None;
    };
    stack.push((0, t_root));
    while let Some((ni, t_enter)) = stack.pop() {
        if best.is_some_and(|(bt, _)| t_enter > bt) {
            continue;
        }
        match bvh.nodes[ni].kind {
            NodeKind::Leaf { start, count } => {
                for &f in &bvh.face_order[start..start + count] {
                    if let Some(t) = intersect_unchecked(origin, dir, mesh.triangle(f)) {
                        if improves(t, f, &best) {
                            best = Some((t, f));
                        }
                    }
                }
            }
            NodeKind::Interior { left, right } => {
                let tl = bvh.nodes[left].bounds.ray_interval(origin, inv, dir).map(|r| r.0);
                let tr = bvh.nodes[right].bounds.ray_interval(origin, inv, dir).map(|r| r.0);
                match (tl, tr) {
                    (Some(a), Some(b)) => {
                        // Nearer child on top of the stack.
                        if a <= b {
                            stack.push((right, b));
                            stack.push((left, a));
                        } else {
                            stack.push((left, a));
                            stack.push((right, b));
                        }
                    }
                    (Some(a), None) => stack.push((left, a)),
                    (None, Some(b)) => stack.push((right, b)),
                    (None, None) => {}
                }
            }
        }
    }
    finish(origin, dir, best)
}

/// Exhaustive first-hit search over every face; the reference for [`cast_ray`].
pub fn brute_force_cast<T: Real>(mesh: &TriangleMesh<T>, origin: Vec3<T>, direction: Vec3<T>) -> Result<Option<RayHit<T>>> {
    check_unit(direction)?;
    let mut best = None;
    for f in 0..mesh.face_count() {
        if let Some(t) = intersect_unchecked(origin, direction, mesh.triangle(f)) {
            if improves(t, f, &best) {
                best = Some((t, f));
            }
        }
    }
    Ok(finish(origin, direction, best))
}
