use rayon::prelude::*;

use crate::error::Result;
use crate::geometry::{build_bvh, Bvh, TriangleMesh};
use crate::scalar::Real;

use super::ray::{DdfSample, Ray};

/// Exact first-hit visibility and depth for every ray, in input order.
pub fn generate_ground_truth<T: Real>(mesh: &TriangleMesh<T>, rays: &[Ray<T>]) -> Result<Vec<DdfSample<T>>> {
    let bvh = build_bvh(mesh)?;
    generate_ground_truth_with(&bvh, mesh, rays)
}

/// As [`generate_ground_truth`] with a prebuilt BVH. Rays are cast in parallel; output order
/// follows input order.
pub fn generate_ground_truth_with<T: Real>(bvh: &Bvh<T>, mesh: &TriangleMesh<T>, rays: &[Ray<T>]) -> Result<Vec<DdfSample<T>>> {
    rays.par_iter()
        .map(|ray| {
            let hit = crate::geometry::cast_ray(bvh, mesh, ray.origin, ray.direction)?;
            Ok(DdfSample { ray: *ray, depth: hit.map(|h| h.t) })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::Vec3;

    #[test]
    fn sphere_and_miss() {
        let mesh = TriangleMesh::<f64>::icosphere(Vec3::zero(), 1.0, 4);
        let rays = vec![
            Ray::new(Vec3::from_f64(0., 0., -2.), Vec3::from_f64(0., 0., 1.)).unwrap(),
            Ray::new(Vec3::from_f64(0., 0., -2.), Vec3::from_f64(0., 0., -1.)).unwrap(),
        ];
        let gt = generate_ground_truth(&mesh, &rays).unwrap();
        assert!(gt[0].xi());
        assert!((gt[0].depth.unwrap() - 1.0).abs() <= 2e-2);
        assert!(!gt[1].xi());
        assert_eq!(gt[1].ray, rays[1]);
    }
}
