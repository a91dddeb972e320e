use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::Vec3;
use crate::sampling::RigidTransform;
use crate::scalar::Real;

/// Axis-aligned bounding box.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Aabb<T> {
    pub min: Vec3<T>,
    pub max: Vec3<T>,
}

impl<T: Real> Aabb<T> {
    pub fn empty() -> Self {
        Self { min: Vec3::splat(T::infinity()), max: Vec3::splat(T::neg_infinity()) }
    }

    pub fn grow(&mut self, p: Vec3<T>) {
        self.min = self.min.min(p);
        self.max = self.max.max(p);
    }

    pub fn union(&self, o: &Self) -> Self {
        Self { min: self.min.min(o.min), max: self.max.max(o.max) }
    }

    pub fn extent(&self) -> Vec3<T> {
        self.max - self.min
    }

    pub fn center(&self) -> Vec3<T> {
        (self.min + self.max) * T::lit(0.5)
    }

    pub fn surface_area(&self) -> T {
        let e = self.extent();
        if e.x < T::zero() {
            return T::zero();
        }
        T::lit(2.0) * (e.x * e.y + e.y * e.z + e.z * e.x)
    }

    pub fn contains(&self, p: Vec3<T>, tol: T) -> bool {
        (0..3).all(|a| p[a] >= self.min[a] - tol && p[a] <= self.max[a] + tol)
    }

    /// Parametric entry/exit of the ray `origin + t·dir`, clipped to `t ≥ 0`.
    pub fn ray_interval(&self, origin: Vec3<T>, inv_dir: Vec3<T>, dir: Vec3<T>) -> Option<(T, T)> {
        let mut t0 = T::zero();
        let mut t1 = T::infinity();
        for a in 0..3 {
            if dir[a] == T::zero() {
                if origin[a] < self.min[a] || origin[a] > self.max[a] {
                    return None;
                }
                continue;
            }
            let ta = (self.min[a] - origin[a]) * inv_dir[a];
            let tb = (self.max[a] - origin[a]) * inv_dir[a];
            let (lo, hi) = if ta <= tb { (ta, tb) } else { (tb, ta) };
            t0 = t0.max(lo);
            t1 = t1.min(hi);
            if t0 > t1 {
                return None;
            }
        }
        Some((t0, t1))
    }
}

/// Indexed triangle mesh.
#[derive(Debug, Clone, PartialEq)]
pub struct TriangleMesh<T> {
    vertices: Vec<Vec3<T>>,
    faces: Vec<[usize; 3]>,
}

impl<T: Real> TriangleMesh<T> {
    /// Validates indices, repeated corners and finiteness. Zero faces is allowed here;
    /// consumers that need geometry (the BVH) reject empty meshes themselves.
    pub fn new(vertices: Vec<Vec3<T>>, faces: Vec<[usize; 3]>) -> Result<Self> {
        if let Some(i) = vertices.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidMesh(format!("vertex {i} is not finite")));
        }
        for (f, tri) in faces.iter().enumerate() {
            if let Some(&bad) = tri.iter().find(|&&i| i >= vertices.len()) {
                return Err(Error::InvalidMesh(format!(
                    "face {f} references vertex {bad} but only {} vertices exist",
                    vertices.len()
                )));
            }
            if tri[0] == tri[1] || tri[1] == tri[2] || tri[0] == tri[2] {
                return Err(Error::InvalidMesh(format!("face {f} repeats a vertex index")));
            }
        }
        Ok(Self { vertices, faces })
    }

    pub fn vertices(&self) -> &[Vec3<T>] {
        &self.vertices
    }

    pub fn faces(&self) -> &[[usize; 3]] {
        &self.faces
    }

    pub fn face_count(&self) -> usize {
        self.faces.len()
    }

    #[inline]
    pub fn triangle(&self, f: usize) -> [Vec3<T>; 3] {
        let [a, b, c] = self.faces[f];
        [self.vertices[a], self.vertices[b], self.vertices[c]]
    }

    pub fn face_area(&self, f: usize) -> T {
        let [a, b, c] = self.triangle(f);
        (b - a).cross(c - a).norm() * T::lit(0.5)
    }

    pub fn bounds(&self) -> Aabb<T> {
        let mut bb = Aabb::empty();
        for &v in &self.vertices {
            bb.grow(v);
        }
        bb
    }

    pub fn cast<U: Real>(&self) -> TriangleMesh<U> {
        TriangleMesh { vertices: self.vertices.iter().map(|v| v.cast()).collect(), faces: self.faces.clone() }
    }

    pub fn transformed(&self, tf: &RigidTransform<T>) -> Self {
        Self { vertices: self.vertices.iter().map(|&v| tf.apply_point(v)).collect(), faces: self.faces.clone() }
    }

    /// Mirror image across the plane through `point` with unit `normal`. Face winding is flipped
    /// so orientation stays consistent.
    pub fn mirrored(&self, point: Vec3<T>, normal: Vec3<T>) -> Self {
        let two = T::lit(2.0);
        let vertices = self.vertices.iter().map(|&v| v - normal * (two * (v - point).dot(normal))).collect();
        let faces = self.faces.iter().map(|&[a, b, c]| [a, c, b]).collect();
        Self { vertices, faces }
    }

    /// Concatenates two meshes.
    pub fn merged(&self, other: &Self) -> Self {
        let off = self.vertices.len();
        let mut vertices = self.vertices.clone();
        vertices.extend_from_slice(&other.vertices);
        let mut faces = self.faces.clone();
        faces.extend(other.faces.iter().map(|&[a, b, c]| [a + off, b + off, c + off]));
        Self { vertices, faces }
    }

    /// Scales uniformly about the origin.
    pub fn scaled(&self, s: T) -> Self {
        Self { vertices: self.vertices.iter().map(|&v| v * s).collect(), faces: self.faces.clone() }
    }

    /// Uniformly recenters and rescales so the mesh fits `[-half, half]³`. Returns the scale factor
    /// applied after centering.
    pub fn normalize_to_cube(&mut self, half: T) -> T {
        let bb = self.bounds();
        let c = bb.center();
        let e = bb.extent().max_component() * T::lit(0.5);
        let s = if e > T::zero() { half / e } else { T::one() };
        for v in &mut self.vertices {
            *v = (*v - c) * s;
        }
        s
    }

    /// Axis-aligned box `[-h, h]³` as 12 outward-facing triangles.
    pub fn cube(half: T) -> Self {
        let h = half;
        let vertices = vec![
            Vec3::new(-h, -h, -h),
            Vec3::new(h, -h, -h),
            Vec3::new(h, h, -h),
            Vec3::new(-h, h, -h),
            Vec3::new(-h, -h, h),
            Vec3::new(h, -h, h),
            Vec3::new(h, h, h),
            Vec3::new(-h, h, h),
        ];
        let faces = vec![
            [0, 2, 1],
            [0, 3, 2],
            [4, 5, 6],
            [4, 6, 7],
            [0, 1, 5],
            [0, 5, 4],
            [2, 3, 7],
            [2, 7, 6],
            [1, 2, 6],
            [1, 6, 5],
            [0, 4, 7],
            [0, 7, 3],
        ];
        Self { vertices, faces }
    }

    /// Icosahedron subdivided `subdivisions` times with vertices projected onto the sphere.
    /// Face count is `20·4^subdivisions`.
    pub fn icosphere(center: Vec3<T>, radius: T, subdivisions: u32) -> Self {
        let t = (1.0 + 5f64.sqrt()) / 2.0;
        let base = [
            (-1.0, t, 0.0),
            (1.0, t, 0.0),
            (-1.0, -t, 0.0),
            (1.0, -t, 0.0),
            (0.0, -1.0, t),
            (0.0, 1.0, t),
            (0.0, -1.0, -t),
            (0.0, 1.0, -t),
            (t, 0.0, -1.0),
            (t, 0.0, 1.0),
            (-t, 0.0, -1.0),
            (-t, 0.0, 1.0),
        ];
        let mut unit: Vec<[f64; 3]> = base
            .iter()
            .map(|&(x, y, z)| {
                let n = (x * x + y * y + z * z as f64).sqrt();
                [x / n, y / n, z / n]
            })
            .collect();
        let mut faces: Vec<[usize; 3]> = vec![
            [0, 11, 5],
            [0, 5, 1],
            [0, 1, 7],
            [0, 7, 10],
            [0, 10, 11],
            [1, 5, 9],
            [5, 11, 4],
            [11, 10, 2],
            [10, 7, 6],
            [7, 1, 8],
            [3, 9, 4],
            [3, 4, 2],
            [3, 2, 6],
            [3, 6, 8],
            [3, 8, 9],
            [4, 9, 5],
            [2, 4, 11],
            [6, 2, 10],
            [8, 6, 7],
            [9, 8, 1],
        ];
        for _ in 0..subdivisions {
            let mut midpoint = std::collections::HashMap::new();
            let mut next = Vec::with_capacity(faces.len() * 4);
            let mut mid = |a: usize, b: usize, verts: &mut Vec<[f64; 3]>| -> usize {
                let key = (a.min(b), a.max(b));
                *midpoint.entry(key).or_insert_with(|| {
                    let (p, q) = (verts[a], verts[b]);
                    let m = [p[0] + q[0], p[1] + q[1], p[2] + q[2]];
                    let n = (m[0] * m[0] + m[1] * m[1] + m[2] * m[2]).sqrt();
                    verts.push([m[0] / n, m[1] / n, m[2] / n]);
                    verts.len() - 1
                })
            };
            for &[a, b, c] in &faces {
                let ab = mid(a, b, &mut unit);
                let bc = mid(b, c, &mut unit);
                let ca = mid(c, a, &mut unit);
                next.extend_from_slice(&[[a, ab, ca], [b, bc, ab], [c, ca, bc], [ab, bc, ca]]);
            }
            faces = next;
        }
        let vertices = unit.iter().map(|p| center + Vec3::from_f64(p[0], p[1], p[2]) * radius).collect();
        Self { vertices, faces }
    }
}
