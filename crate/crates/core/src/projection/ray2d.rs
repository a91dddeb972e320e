use crate::error::{invalid, Error, Result};
use crate::sampling::Ray;
use crate::scalar::Real;

use super::camera::{project_point, CameraPose};
use super::pyramid::{bilinear_sample, FeaturePyramid, FeatureVector};

/// Distance along the 3D ray to the second point whose projection fixes the 2D direction.
pub const PROJECTION_OFFSET: f64 = 0.1;
/// Pixel displacement below which the projected ray is treated as a dot.
pub const DEGENERATE_EPS: f64 = 1e-6;
/// Default pixel spacing between points sampled along the 2D ray.
pub const DEFAULT_SPACING: f64 = 4.0;

/// Projection of a 3D ray: a start pixel plus a unit 2D direction, or a dot when the ray runs
/// through the camera center.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Ray2D<T> {
    pub p: [T; 2],
    pub theta_star: Option<[T; 2]>,
}

impl<T: Real> Ray2D<T> {
    pub fn is_degenerate(&self) -> bool {
        self.theta_star.is_none()
    }
}

pub fn project_ray<T: Real>(camera: &CameraPose<T>, ray: &Ray<T>) -> Result<Ray2D<T>> {
    project_ray_with_offset(camera, ray, T::lit(PROJECTION_OFFSET))
}

pub fn project_ray_with_offset<T: Real>(camera: &CameraPose<T>, ray: &Ray<T>, offset: T) -> Result<Ray2D<T>> {
    let p = project_point(camera, ray.origin)?;
    let q = project_point(camera, ray.at(offset))?;
    let d = [q[0] - p[0], q[1] - p[1]];
    let len = (d[0] * d[0] + d[1] * d[1]).sqrt();
    let theta_star = (len >= T::lit(DEGENERATE_EPS)).then(|| [d[0] / len, d[1] / len]);
    Ok(Ray2D { p, theta_star })
}

/// Points `p + i·spacing·θ*` for `i = 1..=count`; the start pixel itself is not included.
pub fn sample_2d_points<T: Real>(ray2d: &Ray2D<T>, count: usize, spacing: T) -> Result<Vec<[T; 2]>> {
    let dir = ray2d.theta_star.ok_or(Error::DegenerateRay)?;
    if count == 0 {
        return Err(invalid("at least one 2D sample is required"));
    }
    Ok((1..=count)
        .map(|i| {
            let s = spacing * T::lit(i as f64);
            [ray2d.p[0] + dir[0] * s, ray2d.p[1] + dir[1] * s]
        })
        .collect())
}

/// Features at the projected origin and along the projected ray.
#[derive(Debug, Clone, PartialEq)]
pub struct RayFeatureInputs<T> {
    pub f_p: FeatureVector<T>,
    /// Empty for a degenerate projection; the origin feature then stands alone.
    pub f_l: Vec<FeatureVector<T>>,
    pub degenerate: bool,
}

pub fn collect_ray_feature_inputs<T: Real>(
    pyramid: &FeaturePyramid<T>,
    camera: &CameraPose<T>,
    ray: &Ray<T>,
    count: usize,
    spacing: T,
) -> Result<RayFeatureInputs<T>> {
    let r2 = project_ray(camera, ray)?;
    let f_p = bilinear_sample(pyramid, r2.p);
    if r2.is_degenerate() {
        return Ok(RayFeatureInputs { f_p, f_l: Vec::new(), degenerate: true });
    }
    let f_l = sample_2d_points(&r2, count, spacing)?.into_iter().map(|q| bilinear_sample(pyramid, q)).collect();
    Ok(RayFeatureInputs { f_p, f_l, degenerate: false })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{Mat3, Vec3};
    use crate::projection::FeatureGrid;

    fn cam() -> CameraPose<f64> {
        CameraPose::new(1.0, 1.0, 0.0, 0.0, Mat3::identity(), Vec3::zero()).unwrap()
    }

    fn ray(o: [f64; 3], d: [f64; 3]) -> Ray<f64> {
        Ray::new(Vec3::from_array(o), Vec3::from_array(d)).unwrap()
    }

    #[test]
    fn lateral_ray() {
        let r = project_ray(&cam(), &ray([0., 0., 2.], [1., 0., 0.])).unwrap();
        assert_eq!(r.p, [0.0, 0.0]);
        assert_eq!(r.theta_star, Some([1.0, 0.0]));
    }

    #[test]
    fn rays_through_center_are_dots() {
        assert!(project_ray(&cam(), &ray([0., 0., 2.], [0., 0., -1.])).unwrap().is_degenerate());
        assert!(project_ray(&cam(), &ray([0., 0., 2.], [0., 0., 1.])).unwrap().is_degenerate());
        let r = ray([0., 0., 2.], [0., 0., -1.]);
        assert!(project_ray_with_offset(&cam(), &r, 1.0).unwrap().is_degenerate());
    }

    #[test]
    fn sample_points() {
        let r = Ray2D { p: [0.0, 0.0], theta_star: Some([1.0, 0.0]) };
        let pts = sample_2d_points(&r, 8, 2.0).unwrap();
        let xs: Vec<f64> = pts.iter().map(|p| p[0]).collect();
        assert_eq!(xs, vec![2.0, 4.0, 6.0, 8.0, 10.0, 12.0, 14.0, 16.0]);
        assert!(pts.iter().all(|p| p[1] == 0.0));
        assert_eq!(sample_2d_points(&r, 1, 2.0).unwrap(), vec![[2.0, 0.0]]);
        assert_eq!(sample_2d_points(&r, 3, 0.0).unwrap(), vec![[0.0, 0.0]; 3]);
        let dot = Ray2D { p: [0.0, 0.0], theta_star: None };
        assert_eq!(sample_2d_points(&dot, 8, 2.0).unwrap_err().to_string(), "degenerate ray has no 2D direction");
    }

    #[test]
    fn collected_inputs() {
        let pyr = FeaturePyramid::new(vec![FeatureGrid::constant(16, 16, 2, 0.5)]).unwrap();
        let c = CameraPose::new(4.0, 4.0, 8.0, 8.0, Mat3::identity(), Vec3::zero()).unwrap();
        let dot = collect_ray_feature_inputs(&pyr, &c, &ray([0., 0., 2.], [0., 0., -1.]), 8, 1.0).unwrap();
        assert!(dot.degenerate && dot.f_l.is_empty());
        let full = collect_ray_feature_inputs(&pyr, &c, &ray([0., 0., 2.], [1., 0., 0.]), 8, 1.0).unwrap();
        assert_eq!(full.f_l.len(), 8);
        assert!(full.f_l.iter().all(|f| *f == full.f_p));
    }
}
