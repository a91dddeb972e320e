use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::linalg::{Mat3, Vec3};
use crate::sampling::Ray;
use crate::scalar::Real;

/// Camera-frame depth below which a point counts as behind the camera.
pub const MIN_DEPTH: f64 = 1e-6;

/// Pinhole intrinsics plus the world-to-camera rotation and translation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CameraPose<T> {
    pub fx: T,
    pub fy: T,
    pub cx: T,
    pub cy: T,
    pub rotation: Mat3<T>,
    pub translation: Vec3<T>,
}

impl<T: Real> CameraPose<T> {
    pub fn new(fx: T, fy: T, cx: T, cy: T, rotation: Mat3<T>, translation: Vec3<T>) -> Result<Self> {
        if !(fx > T::zero() && fy > T::zero()) {
            return Err(invalid("focal lengths must be positive"));
        }
        if rotation.orthonormality_error() > T::tol(1e-7) {
            return Err(invalid("camera rotation is not orthonormal"));
        }
        Ok(Self { fx, fy, cx, cy, rotation, translation })
    }

    /// Camera on the −z axis at distance 3 looking along +z, framing `[-1, 1]³` in a
    /// `size × size` image.
    pub fn framing_unit_cube(size: usize) -> Self {
        let s = T::lit(size as f64);
        Self {
            fx: s * T::lit(0.75),
            fy: s * T::lit(0.75),
            cx: s * T::lit(0.5),
            cy: s * T::lit(0.5),
            rotation: Mat3::identity(),
            translation: Vec3::from_f64(0.0, 0.0, 3.0),
        }
    }

    pub fn to_camera(&self, p: Vec3<T>) -> Vec3<T> {
        self.rotation.mul_vec(p) + self.translation
    }

    /// Camera center in world coordinates.
    pub fn center(&self) -> Vec3<T> {
        -self.rotation.tr_mul_vec(self.translation)
    }

    /// World-space ray from the camera center through pixel `(u, v)`.
    pub fn pixel_ray(&self, u: T, v: T) -> Ray<T> {
        let d_cam = Vec3::new((u - self.cx) / self.fx, (v - self.cy) / self.fy, T::one());
        let d = self.rotation.tr_mul_vec(d_cam);
        Ray { origin: self.center(), direction: d.normalized().expect("pixel direction is non-zero") }
    }

    pub fn cast<U: Real>(&self) -> CameraPose<U> {
        CameraPose {
            fx: crate::scalar::cast(self.fx),
            fy: crate::scalar::cast(self.fy),
            cx: crate::scalar::cast(self.cx),
            cy: crate::scalar::cast(self.cy),
            rotation: self.rotation.cast(),
            translation: self.translation.cast(),
        }
    }
}

/// Pixel coordinates `(fx·X/Z + cx, fy·Y/Z + cy)` of `p`, with `(X, Y, Z) = R·p + t`.
pub fn project_point<T: Real>(camera: &CameraPose<T>, p: Vec3<T>) -> Result<[T; 2]> {
    let c = camera.to_camera(p);
    if !(c.z > T::lit(MIN_DEPTH)) {
        return Err(Error::BehindCamera);
    }
    Ok([camera.fx * c.x / c.z + camera.cx, camera.fy * c.y / c.z + camera.cy])
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit_cam(f: f64, c: f64) -> CameraPose<f64> {
        CameraPose::new(f, f, c, c, Mat3::identity(), Vec3::zero()).unwrap()
    }

    #[test]
    fn examples() {
        let p = project_point(&unit_cam(1.0, 0.0), Vec3::from_f64(0.2, 0.4, 2.0)).unwrap();
        assert!((p[0] - 0.1).abs() < 1e-15 && (p[1] - 0.2).abs() < 1e-15);
        assert_eq!(project_point(&unit_cam(7.0, 3.0), Vec3::from_f64(0.0, 0.0, 1.0)).unwrap(), [3.0, 3.0]);
        let err = project_point(&unit_cam(1.0, 0.0), Vec3::from_f64(1.0, 1.0, 0.0)).unwrap_err();
        assert_eq!(err.to_string(), "behind camera");
    }

    #[test]
    fn pixel_ray_reprojects() {
        let cam = CameraPose::<f64>::framing_unit_cube(64);
        let r = cam.pixel_ray(10.0, 50.0);
        let p = project_point(&cam, r.at(2.5)).unwrap();
        assert!((p[0] - 10.0).abs() < 1e-12 && (p[1] - 50.0).abs() < 1e-12);
    }

    #[test]
    fn rejects_bad_intrinsics() {
        assert!(CameraPose::new(0.0, 1.0, 0.0, 0.0, Mat3::<f64>::identity(), Vec3::zero()).is_err());
    }
}
