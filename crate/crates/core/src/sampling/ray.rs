use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::geometry::TriangleMesh;
use crate::linalg::{Mat3, Vec3};
use crate::scalar::Real;

use super::rng::{streams, RayRng};

/// Half-line `origin + t·direction`, `t ≥ 0`, with unit direction.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Ray<T> {
    pub origin: Vec3<T>,
    pub direction: Vec3<T>,
}

impl<T: Real> Ray<T> {
    pub fn new(origin: Vec3<T>, direction: Vec3<T>) -> Result<Self> {
        crate::geometry::check_unit(direction)?;
        if !origin.is_finite() {
            return Err(invalid("ray origin is not finite"));
        }
        Ok(Self { origin, direction })
    }

    /// Normalizes `direction` first; fails only for a zero or non-finite direction.
    pub fn normalized(origin: Vec3<T>, direction: Vec3<T>) -> Result<Self> {
        let d = direction.normalized().ok_or(Error::DirectionNotNormalized)?;
        Self::new(origin, d)
    }

    #[inline]
    pub fn at(&self, t: T) -> Vec3<T> {
        self.origin + self.direction * t
    }

    pub fn cast<U: Real>(&self) -> Ray<U> {
        let d: Vec3<U> = self.direction.cast();
        Ray { origin: self.origin.cast(), direction: d.normalized().unwrap_or(d) }
    }
}

/// Axis-aligned box that bounds ray origins.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundingVolume<T> {
    pub min: Vec3<T>,
    pub max: Vec3<T>,
}

impl<T: Real> BoundingVolume<T> {
    pub fn new(min: Vec3<T>, max: Vec3<T>) -> Result<Self> {
        if (0..3).all(|a| min[a] < max[a]) {
            Ok(Self { min, max })
        } else {
            Err(invalid("bounding volume needs min < max on every axis"))
        }
    }

    /// `[-1, 1]³`.
    pub fn unit_cube() -> Self {
        Self { min: Vec3::splat(-T::one()), max: Vec3::splat(T::one()) }
    }

    pub fn contains(&self, p: Vec3<T>) -> bool {
        (0..3).all(|a| p[a] >= self.min[a] && p[a] <= self.max[a])
    }

    pub fn diagonal(&self) -> T {
        (self.max - self.min).norm()
    }

    pub fn clamp(&self, p: Vec3<T>) -> Vec3<T> {
        p.max(self.min).min(self.max)
    }

    fn lerp(&self, u: [f64; 3]) -> Vec3<T> {
        let e = self.max - self.min;
        Vec3::new(
            self.min.x + e.x * T::lit(u[0]),
            self.min.y + e.y * T::lit(u[1]),
            self.min.z + e.z * T::lit(u[2]),
        )
    }
}

/// A ray with its visibility and, when visible, its first-hit distance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DdfSample<T> {
    pub ray: Ray<T>,
    pub depth: Option<T>,
}

impl<T: Real> DdfSample<T> {
    pub fn visible(ray: Ray<T>, depth: T) -> Self {
        Self { ray, depth: Some(depth) }
    }

    pub fn invisible(ray: Ray<T>) -> Self {
        Self { ray, depth: None }
    }

    #[inline]
    pub fn xi(&self) -> bool {
        self.depth.is_some()
    }
}

/// Proper rigid motion `x ↦ R·x + t`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RigidTransform<T> {
    pub rotation: Mat3<T>,
    pub translation: Vec3<T>,
}

impl<T: Real> RigidTransform<T> {
    pub fn new(rotation: Mat3<T>, translation: Vec3<T>) -> Result<Self> {
        if rotation.orthonormality_error() > T::tol(1e-7) || (rotation.determinant() - T::one()).abs() > T::tol(1e-6) {
            return Err(invalid("rotation is not a proper orthonormal matrix"));
        }
        if !translation.is_finite() {
            return Err(invalid("translation is not finite"));
        }
        Ok(Self { rotation, translation })
    }

    pub fn identity() -> Self {
        Self { rotation: Mat3::identity(), translation: Vec3::zero() }
    }

    pub fn from_axis_angle(omega: Vec3<T>, translation: Vec3<T>) -> Self {
        Self { rotation: Mat3::from_axis_angle(omega), translation }
    }

    #[inline]
    pub fn apply_point(&self, p: Vec3<T>) -> Vec3<T> {
        self.rotation.mul_vec(p) + self.translation
    }

    #[inline]
    pub fn apply_dir(&self, d: Vec3<T>) -> Vec3<T> {
        self.rotation.mul_vec(d)
    }

    pub fn apply_ray(&self, ray: &Ray<T>) -> Ray<T> {
        Ray { origin: self.apply_point(ray.origin), direction: self.apply_dir(ray.direction) }
    }

    pub fn inverse(&self) -> Self {
        let rt = self.rotation.transpose();
        Self { rotation: rt, translation: -rt.mul_vec(self.translation) }
    }

    /// `self ∘ other`: applies `other` first.
    pub fn compose(&self, other: &Self) -> Self {
        Self { rotation: self.rotation.mul_mat(&other.rotation), translation: self.apply_point(other.translation) }
    }

    /// Random proper rigid motion (uniform axis, angle in `[0, π)`, translation in `[-s, s]³`).
    pub fn random(rng: &mut RayRng, max_translation: f64) -> Self {
        let axis = rng.unit_vector();
        let angle = rng.uniform_range(0.0, std::f64::consts::PI);
        let omega = Vec3::from_f64(axis[0] * angle, axis[1] * angle, axis[2] * angle);
        let t = Vec3::from_f64(
            rng.uniform_range(-max_translation, max_translation),
            rng.uniform_range(-max_translation, max_translation),
            rng.uniform_range(-max_translation, max_translation),
        );
        Self::from_axis_angle(omega, t)
    }
}

/// Expresses a ray in the wrist frame described by `transform`.
pub fn normalize_to_wrist<T: Real>(ray: &Ray<T>, transform: &RigidTransform<T>) -> Ray<T> {
    transform.apply_ray(ray)
}

fn draw_ray<T: Real>(rng: &mut RayRng, origin: Vec3<T>) -> Ray<T> {
    let d = rng.unit_vector();
    let d: Vec3<T> = Vec3::from_f64(d[0], d[1], d[2]);
    Ray { origin, direction: d.normalized().unwrap_or(d) }
}

/// `n` rays with origins uniform in `bounds` and directions uniform on the sphere. Each ray
/// consumes three uniforms then three normals from stream [`streams::RAYS`].
pub fn sample_rays_uniform<T: Real>(bounds: &BoundingVolume<T>, n: usize, seed: u64) -> Result<Vec<Ray<T>>> {
    sample_rays_uniform_on(bounds, n, seed, streams::RAYS)
}

/// [`sample_rays_uniform`] drawing from an explicit stream, e.g. [`streams::EVAL`] for held-out rays.
pub fn sample_rays_uniform_on<T: Real>(bounds: &BoundingVolume<T>, n: usize, seed: u64, stream: u64) -> Result<Vec<Ray<T>>> {
    if n == 0 {
        return Err(invalid("ray count must be at least 1"));
    }
    let mut rng = RayRng::new(seed, stream);
    Ok((0..n)
        .map(|_| {
            let o = bounds.lerp([rng.uniform(), rng.uniform(), rng.uniform()]);
            draw_ray(&mut rng, o)
        })
        .collect())
}

/// Half of the origins (even indices) are uniform in `bounds`; the other half are drawn within
/// `band` of the surface: an area-weighted surface point plus a uniform offset in a ball of
/// radius `band`, clamped to `bounds`.
pub fn sample_rays_surface_biased<T: Real>(
    mesh: &TriangleMesh<T>,
    bounds: &BoundingVolume<T>,
    n: usize,
    band: f64,
    seed: u64,
) -> Result<Vec<Ray<T>>> {
    if n == 0 {
        return Err(invalid("ray count must be at least 1"));
    }
    if mesh.face_count() == 0 {
        return Err(Error::EmptyMesh);
    }
    let mut cdf = Vec::with_capacity(mesh.face_count());
    let mut acc = 0.0;
    for f in 0..mesh.face_count() {
        acc += mesh.face_area(f).to_f64_lossy();
        cdf.push(acc);
    }
    if !(acc > 0.0) {
        return Err(Error::InvalidMesh("mesh has zero surface area".into()));
    }
    let mut rng = RayRng::new(seed, streams::RAYS);
    let mut surf = RayRng::new(seed, streams::SURFACE_ORIGINS);
    Ok((0..n)
        .map(|i| {
            let o = if i % 2 == 0 {
                bounds.lerp([rng.uniform(), rng.uniform(), rng.uniform()])
            } else {
                let target = surf.uniform() * acc;
                let f = cdf.partition_point(|&c| c < target).min(cdf.len() - 1);
                let [a, b, c] = mesh.triangle(f);
                let (mut u, mut v) = (surf.uniform(), surf.uniform());
                if u + v > 1.0 {
                    u = 1.0 - u;
                    v = 1.0 - v;
                }
                let p = a + (b - a) * T::lit(u) + (c - a) * T::lit(v);
                let dir = surf.unit_vector();
                let r = band * surf.uniform().cbrt();
                bounds.clamp(p + Vec3::from_f64(dir[0] * r, dir[1] * r, dir[2] * r))
            };
            draw_ray(&mut rng, o)
        })
        .collect())
}
