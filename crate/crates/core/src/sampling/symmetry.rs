use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::linalg::Vec3;
use crate::scalar::Real;

use super::ray::{BoundingVolume, Ray};
use super::rng::{streams, RayRng};

/// Reflective plane of a symmetric object.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SymmetryPlane<T> {
    pub point: Vec3<T>,
    pub normal: Vec3<T>,
}

impl<T: Real> SymmetryPlane<T> {
    /// Normalizes `normal`; a zero normal is an error.
    pub fn new(point: Vec3<T>, normal: Vec3<T>) -> Result<Self> {
        let normal = normal.normalized().ok_or_else(|| invalid("symmetry plane normal is zero"))?;
        Ok(Self { point, normal })
    }

    pub fn reflect_dir(&self, d: Vec3<T>) -> Vec3<T> {
        d - self.normal * (T::lit(2.0) * d.dot(self.normal))
    }

    pub fn reflect_point(&self, p: Vec3<T>) -> Vec3<T> {
        p - self.normal * (T::lit(2.0) * (p - self.point).dot(self.normal))
    }

    pub fn project(&self, p: Vec3<T>) -> Vec3<T> {
        p - self.normal * (p - self.point).dot(self.normal)
    }

    pub fn signed_distance(&self, p: Vec3<T>) -> T {
        (p - self.point).dot(self.normal)
    }
}

/// Two rays from one origin on the plane whose directions mirror each other across it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SymmetryPair<T> {
    pub ray_a: Ray<T>,
    pub ray_b: Ray<T>,
    pub plane: SymmetryPlane<T>,
}

impl<T: Real> SymmetryPair<T> {
    pub fn from_ray(plane: SymmetryPlane<T>, ray: Ray<T>) -> Self {
        let origin = plane.project(ray.origin);
        let ray_a = Ray { origin, direction: ray.direction };
        let ray_b = Ray { origin, direction: plane.reflect_dir(ray.direction) };
        Self { ray_a, ray_b, plane }
    }
}

/// `n` pairs with origins uniform on the part of `plane` inside `bounds` (box samples projected
/// onto the plane, redrawn when the projection leaves the box) and uniform directions.
pub fn make_symmetry_pairs<T: Real>(
    plane: &SymmetryPlane<T>,
    bounds: &BoundingVolume<T>,
    n: usize,
    seed: u64,
) -> Result<Vec<SymmetryPair<T>>> {
    if !(plane.normal.norm() > T::zero()) {
        return Err(invalid("symmetry plane normal is zero"));
    }
    let mut rng = RayRng::new(seed, streams::SYMMETRY_PAIRS);
    let e = bounds.max - bounds.min;
    let mut out = Vec::with_capacity(n);
    let mut attempts = 0usize;
    while out.len() < n {
        attempts += 1;
        if attempts > 1000 + 1000 * n {
            return Err(invalid("symmetry plane does not cross the bounding volume"));
        }
        let u = [rng.uniform(), rng.uniform(), rng.uniform()];
        let p = bounds.min + Vec3::new(e.x * T::lit(u[0]), e.y * T::lit(u[1]), e.z * T::lit(u[2]));
        let d = rng.unit_vector();
        let origin = plane.project(p);
        if !bounds.contains(origin) {
            continue;
        }
        let dir: Vec3<T> = Vec3::from_f64(d[0], d[1], d[2]);
        let dir = dir.normalized().unwrap_or(dir);
        out.push(SymmetryPair::from_ray(*plane, Ray { origin, direction: dir }));
    }
    Ok(out)
}
