use super::field::FieldEvaluator;
use crate::error::{invalid, Result};
use crate::linalg::Vec3;
use crate::sampling::Ray;
use crate::scalar::Real;

pub const DEFAULT_VIS_THRESHOLD: f64 = 0.5;

/// Points in field units together with the millimeters per unit used for metrics.
#[derive(Debug, Clone, PartialEq)]
pub struct PointCloud<T> {
    points: Vec<Vec3<T>>,
    mm_per_unit: T,
}

impl<T: Real> PointCloud<T> {
    pub fn new(points: Vec<Vec3<T>>, mm_per_unit: T) -> Result<Self> {
        if !(mm_per_unit > T::zero()) || !mm_per_unit.is_finite() {
            return Err(invalid("point cloud scale must be positive"));
        }
        if points.iter().any(|p| !p.is_finite()) {
            return Err(invalid("point cloud coordinates must be finite"));
        }
        Ok(Self { points, mm_per_unit })
    }

    pub fn points(&self) -> &[Vec3<T>] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn mm_per_unit(&self) -> T {
        self.mm_per_unit
    }

    /// Coordinates converted to millimeters.
    pub fn points_mm(&self) -> Vec<Vec3<T>> {
        self.points.iter().map(|&p| p * self.mm_per_unit).collect()
    }
}

/// Emits `P + D̂·θ` for every ray whose visibility exceeds `vis_threshold`, in input order.
pub fn ddf_to_pointcloud(
    field: &dyn FieldEvaluator,
    rays: &[Ray<f64>],
    vis_threshold: f64,
    mm_per_unit: f64,
) -> Result<PointCloud<f64>> {
    if !(vis_threshold > 0.0 && vis_threshold < 1.0) {
        return Err(invalid("visibility threshold must lie in (0, 1)"));
    }
    let values = field.evaluate(rays)?;
    let points = rays
        .iter()
        .zip(values)
        .filter(|(_, v)| v.is_visible(vis_threshold))
        .map(|(r, v)| r.at(v.depth))
        .collect();
    PointCloud::new(points, mm_per_unit)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::recon::{MeshField, SphereField};
    use crate::geometry::{point_triangle_distance, TriangleMesh};
    use crate::sampling::{sample_rays_uniform, BoundingVolume};

    #[test]
    fn sphere_points_lie_on_sphere() {
        let field = SphereField { center: Vec3::zero(), radius: 1.0 };
        let rays = sample_rays_uniform(&BoundingVolume::unit_cube(), 10_000, 1).unwrap();
        let cloud = ddf_to_pointcloud(&field, &rays, 0.5, 1.0).unwrap();
        assert!(cloud.len() > 5000);
        assert!(cloud.points().iter().all(|p| (p.norm() - 1.0).abs() <= 1e-6));
    }

    #[test]
    fn invisible_field_is_empty() {
        let field = SphereField { center: Vec3::new(10.0, 0.0, 0.0), radius: 0.1 };
        let rays: Vec<_> = (0..10).map(|_| Ray::new(Vec3::zero(), Vec3::new(0.0, 1.0, 0.0)).unwrap()).collect();
        assert!(ddf_to_pointcloud(&field, &rays, 0.5, 1.0).unwrap().is_empty());
    }

    #[test]
    fn mesh_points_lie_on_mesh() {
        let mesh = TriangleMesh::<f64>::cube(0.5);
        let field = MeshField::new(mesh.clone()).unwrap();
        let rays = sample_rays_uniform(&BoundingVolume::unit_cube(), 2000, 2).unwrap();
        let cloud = ddf_to_pointcloud(&field, &rays, 0.5, 1.0).unwrap();
        for p in cloud.points() {
            let d = (0..mesh.face_count()).map(|f| point_triangle_distance(*p, mesh.triangle(f))).fold(f64::INFINITY, f64::min);
            assert!(d <= 1e-6);
        }
    }

    #[test]
    fn scale_must_be_positive() {
        assert!(PointCloud::<f64>::new(vec![], 0.0).is_err());
        let c = PointCloud::new(vec![Vec3::new(1.0, 2.0, 3.0)], 10.0).unwrap();
        assert_eq!(c.points_mm()[0], Vec3::new(10.0, 20.0, 30.0));
    }
}
