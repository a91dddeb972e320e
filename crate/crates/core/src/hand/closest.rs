use super::skeleton::HandSkeleton;
use crate::linalg::Vec3;
use crate::sampling::Ray;
use crate::scalar::Real;

/// Closest approach between a ray and the skeleton: `p_s = origin + t·dir` on the ray,
/// `p_d = a + s·(b − a)` on `bone`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SkeletonContact<T> {
    pub p_s: Vec3<T>,
    pub p_d: Vec3<T>,
    pub bone: usize,
    pub dist: T,
    pub t: T,
    pub s: T,
}

/// Minimizes `|o + t·d − (a + s·(b − a))|` over `t ≥ 0`, `s ∈ [0, 1]` for a unit `d`.
/// Returns `(t, s, squared distance)`. The minimum of this convex problem is either the
/// unconstrained stationary point or lies on one of the three boundary lines, each of which is
/// a 1D clamp; all feasible candidates are evaluated.
pub fn ray_segment_closest<T: Real>(o: Vec3<T>, d: Vec3<T>, a: Vec3<T>, b: Vec3<T>) -> (T, T, T) {
    let e = b - a;
    let w = o - a;
    let dd = d.dot(d);
    let de = d.dot(e);
    let ee = e.dot(e);
    let dw = d.dot(w);
    let ew = e.dot(w);
    let zero = T::zero();
    let one = T::one();
    let f = |t: T, s: T| (w + d * t - e * s).norm_squared();

    let mut best = (zero, zero, T::infinity());
    let mut consider = |t: T, s: T| {
        let v = f(t, s);
        if v < best.2 {
            best = (t, s, v);
        }
    };

    let det = dd * ee - de * de;
    if det > T::epsilon() * dd * ee {
        let s = (dd * ew - de * dw) / det;
        let t = (de * s - dw) / dd;
        if t >= zero && s >= zero && s <= one {
            consider(t, s);
        }
    }
    // t = 0: closest point on the segment to the origin.
    let s0 = if ee > zero { (ew / ee).max(zero).min(one) } else { zero };
    consider(zero, s0);
    // s = 0 and s = 1: closest ray point to each endpoint.
    consider((-dw / dd).max(zero), zero);
    consider(((de - dw) / dd).max(zero), one);
    best
}

/// Closest approach over all 20 bones; ties go to the lowest bone index.
pub fn ray_skeleton_closest<T: Real>(ray: &Ray<T>, skeleton: &HandSkeleton<T>) -> SkeletonContact<T> {
    let joints = skeleton.joints();
    let mut best: Option<(T, SkeletonContact<T>)> = None;
    for b in 0..skeleton.bone_count() {
        let (pa, pc) = skeleton.bone(b);
        let (a, e) = (joints[pa], joints[pc]);
        let (t, s, d2) = ray_segment_closest(ray.origin, ray.direction, a, e);
        if best.is_none_or(|(bd, _)| d2 < bd) {
            best = Some((d2, SkeletonContact {
                p_s: ray.at(t),
                p_d: a + (e - a) * s,
                bone: b,
                dist: d2.sqrt(),
                t,
                s,
            }));
        }
    }
    best.expect("skeleton has bones").1
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sampling::{streams, RayRng};

    fn v(x: f64, y: f64, z: f64) -> Vec3<f64> {
        Vec3::new(x, y, z)
    }

    fn dense(o: Vec3<f64>, d: Vec3<f64>, a: Vec3<f64>, b: Vec3<f64>, tmax: f64) -> f64 {
        let mut best = f64::INFINITY;
        for i in 0..=2000 {
            let p = o + d * (tmax * i as f64 / 2000.0);
            for k in 0..=200 {
                let q = a + (b - a) * (k as f64 / 200.0);
                best = best.min(p.distance(q));
            }
        }
        best
    }

    #[test]
    fn perpendicular_minimum_at_origin() {
        let (t, s, d2) = ray_segment_closest(v(0.5, 1.0, 0.0), v(0.0, 0.0, 1.0), v(0.0, 0.0, 0.0), v(1.0, 0.0, 0.0));
        assert_eq!(t, 0.0);
        assert!((s - 0.5).abs() < 1e-15);
        assert!((d2 - 1.0).abs() < 1e-15);
    }

    #[test]
    fn crossing_ray_has_zero_distance() {
        let (t, s, d2) = ray_segment_closest(v(0.25, 1.0, 0.0), v(0.0, -1.0, 0.0), v(0.0, 0.0, 0.0), v(1.0, 0.0, 0.0));
        assert!((t - 1.0).abs() < 1e-15 && (s - 0.25).abs() < 1e-15 && d2 < 1e-30);
    }

    #[test]
    fn parallel_and_receding_rays() {
        // Parallel to the bone, offset by 1.
        let (_, _, d2) = ray_segment_closest(v(-2.0, 1.0, 0.0), v(1.0, 0.0, 0.0), v(0.0, 0.0, 0.0), v(1.0, 0.0, 0.0));
        assert!((d2 - 1.0).abs() < 1e-12);
        // Pointing away: closest is from the origin.
        let (t, s, d2) = ray_segment_closest(v(2.0, 0.0, 0.0), v(1.0, 0.0, 0.0), v(0.0, 0.0, 0.0), v(1.0, 0.0, 0.0));
        assert_eq!((t, s), (0.0, 1.0));
        assert!((d2 - 1.0).abs() < 1e-12);
    }

    #[test]
    fn matches_dense_sampling() {
        let mut rng = RayRng::new(11, streams::EVAL);
        for _ in 0..200 {
            let mut p = || v(rng.uniform_range(-1.0, 1.0), rng.uniform_range(-1.0, 1.0), rng.uniform_range(-1.0, 1.0));
            let (o, a, b) = (p(), p(), p());
            let d = p().normalized().unwrap();
            let (t, s, d2) = ray_segment_closest(o, d, a, b);
            assert!(t >= 0.0 && (0.0..=1.0).contains(&s));
            assert!(((o + d * t).distance(a + (b - a) * s) - d2.sqrt()).abs() < 1e-12);
            let oracle = dense(o, d, a, b, 4.0);
            assert!(d2.sqrt() <= oracle + 1e-12);
            assert!(oracle - d2.sqrt() < 5e-3);
        }
    }
}
