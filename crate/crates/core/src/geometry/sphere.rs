use crate::error::{invalid, Result};
use crate::linalg::Vec3;
use crate::scalar::Real;

use super::check_unit;

/// Closed-form visibility and depth of a ray against a sphere.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SphereDdf<T> {
    pub visible: bool,
    pub depth: Option<T>,
}

pub fn analytic_sphere_ddf<T: Real>(center: Vec3<T>, radius: T, origin: Vec3<T>, direction: Vec3<T>) -> Result<SphereDdf<T>> {
    if !(radius > T::zero()) {
        return Err(invalid("sphere radius must be positive"));
    }
    check_unit(direction)?;
    let oc = origin - center;
    let b = direction.dot(oc);
    let c = oc.norm_squared() - radius * radius;
    let disc = b * b - c;
    if disc < T::zero() {
        return Ok(SphereDdf { visible: false, depth: None });
    }
    let root = disc.sqrt();
    let near = -b - root;
    let far = -b + root;
    let t = if near >= T::zero() {
        Some(near)
    } else if far >= T::zero() {
        Some(far)
    } else {
        None
    };
    Ok(SphereDdf { visible: t.is_some(), depth: t })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run(o: [f64; 3], d: [f64; 3]) -> SphereDdf<f64> {
        analytic_sphere_ddf(Vec3::zero(), 1.0, Vec3::from_array(o), Vec3::from_array(d)).unwrap()
    }

    #[test]
    fn examples() {
        assert_eq!(run([0., 0., -2.], [0., 0., 1.]), SphereDdf { visible: true, depth: Some(1.0) });
        assert!(!run([0., 0., -2.], [0., 0., -1.]).visible);
        assert!(!run([0., 2., 0.], [0., 0., 1.]).visible);
        assert_eq!(run([0., 0., 0.], [1., 0., 0.]).depth, Some(1.0));
    }

    #[test]
    fn bad_radius() {
        assert!(analytic_sphere_ddf(Vec3::<f64>::zero(), 0.0, Vec3::zero(), Vec3::from_f64(1., 0., 0.)).is_err());
    }
}
