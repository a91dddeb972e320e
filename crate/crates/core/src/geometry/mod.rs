//! Triangle meshes, exact first-hit ray casting and analytic test shapes.

mod bvh;
mod intersect;
mod mesh;
mod sphere;

pub use bvh::{brute_force_cast, build_bvh, cast_ray, Bvh, BvhNode, NodeKind, RayHit, MAX_LEAF_SIZE};
pub use intersect::{point_triangle_distance, ray_triangle_intersect};
pub use mesh::{Aabb, TriangleMesh};
pub use sphere::{analytic_sphere_ddf, SphereDdf};

use crate::error::{Error, Result};
use crate::linalg::Vec3;
use crate::scalar::Real;

pub(crate) fn check_unit<T: Real>(d: Vec3<T>) -> Result<()> {
    if (d.norm() - T::one()).abs() <= T::tol(1e-9) {
        Ok(())
    } else {
        Err(Error::DirectionNotNormalized)
    }
}
