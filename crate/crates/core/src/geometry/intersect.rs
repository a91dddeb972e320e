use crate::error::Result;
use crate::linalg::Vec3;
use crate::scalar::Real;

use super::check_unit;

/// Smallest `t ≥ 0` at which `origin + t·direction` lies in the closed triangle, if any.
///
/// Edges and vertices count as inside. An origin lying on the triangle gives `t = 0`.
/// Zero-area triangles never intersect.
pub fn ray_triangle_intersect<T: Real>(
    origin: Vec3<T>,
    direction: Vec3<T>,
    v0: Vec3<T>,
    v1: Vec3<T>,
    v2: Vec3<T>,
) -> Result<Option<T>> {
    check_unit(direction)?;
    Ok(intersect_unchecked(origin, direction, [v0, v1, v2]))
}

#[inline]
pub(crate) fn intersect_unchecked<T: Real>(o: Vec3<T>, d: Vec3<T>, [v0, v1, v2]: [Vec3<T>; 3]) -> Option<T> {
    let e1 = v1 - v0;
    let e2 = v2 - v0;
    let n = e1.cross(e2);
    let n_len = n.norm();
    let scale = e1.norm() * e2.norm();
    let eps = T::epsilon();
    if !(n_len > eps * T::lit(16.0) * scale) {
        return None;
    }
    let p = d.cross(e2);
    let det = e1.dot(p);
    let s = o - v0;
    if det.abs() <= eps * T::lit(16.0) * n_len {
        return coplanar(o, d, [v0, v1, v2], n, n_len);
    }
    let inv = T::one() / det;
    let bary_eps = eps * T::lit(16.0);
    let u = s.dot(p) * inv;
    if u < -bary_eps || u > T::one() + bary_eps {
        return None;
    }
    let q = s.cross(e1);
    let v = d.dot(q) * inv;
    if v < -bary_eps || u + v > T::one() + bary_eps {
        return None;
    }
    let t = e2.dot(q) * inv;
    let t_eps = eps * T::lit(64.0) * T::one().max(s.norm());
    if t < -t_eps {
        return None;
    }
    Some(t.max(T::zero()))
}

/// Ray parallel to the triangle's plane: only counts when the origin lies in the plane, in which
/// case the ray is clipped against the three edges in 2D.
fn coplanar<T: Real>(o: Vec3<T>, d: Vec3<T>, tri: [Vec3<T>; 3], n: Vec3<T>, n_len: T) -> Option<T> {
    let s = o - tri[0];
    let tol = T::epsilon() * T::lit(64.0) * T::one().max(s.norm()).max(n_len.sqrt());
    if (s.dot(n) / n_len).abs() > tol {
        return None;
    }
    let drop = n.abs().max_axis();
    let (a, b) = match drop {
        0 => (1, 2),
        1 => (2, 0),
        _ => (0, 1),
    };
    let flat = |v: Vec3<T>| [v[a], v[b]];
    let cross2 = |p: [T; 2], q: [T; 2]| p[0] * q[1] - p[1] * q[0];
    let pts = tri.map(flat);
    let o2 = flat(o);
    let d2 = flat(d);
    // Orient so the interior is on the non-negative side of every edge.
    let area2 = cross2([pts[1][0] - pts[0][0], pts[1][1] - pts[0][1]], [pts[2][0] - pts[0][0], pts[2][1] - pts[0][1]]);
    let sign = if area2 >= T::zero() { T::one() } else { -T::one() };
    let mut t0 = T::zero();
    let mut t1 = T::infinity();
    for i in 0..3 {
        let p = pts[i];
        let q = pts[(i + 1) % 3];
        let edge = [q[0] - p[0], q[1] - p[1]];
        let f0 = sign * cross2(edge, [o2[0] - p[0], o2[1] - p[1]]);
        let g = sign * cross2(edge, d2);
        let f_tol = tol * T::one().max(edge[0].abs() + edge[1].abs());
        if g == T::zero() {
            if f0 < -f_tol {
                return None;
            }
        } else if g > T::zero() {
            t0 = t0.max(-f0 / g);
        } else {
            t1 = t1.min(-f0 / g);
        }
    }
    (t0 <= t1).then_some(t0)
}

/// Euclidean distance from `p` to the closed triangle.
pub fn point_triangle_distance<T: Real>(p: Vec3<T>, [a, b, c]: [Vec3<T>; 3]) -> T {
    // Region classification after Ericson, Real-Time Collision Detection, 5.1.5.
    let ab = b - a;
    let ac = c - a;
    let ap = p - a;
    let d1 = ab.dot(ap);
    let d2 = ac.dot(ap);
    if d1 <= T::zero() && d2 <= T::zero() {
        return ap.norm();
    }
    let bp = p - b;
    let d3 = ab.dot(bp);
    let d4 = ac.dot(bp);
    if d3 >= T::zero() && d4 <= d3 {
        return bp.norm();
    }
    let vc = d1 * d4 - d3 * d2;
    if vc <= T::zero() && d1 >= T::zero() && d3 <= T::zero() {
        let v = d1 / (d1 - d3);
        return (p - (a + ab * v)).norm();
    }
    let cp = p - c;
    let d5 = ab.dot(cp);
    let d6 = ac.dot(cp);
    if d6 >= T::zero() && d5 <= d6 {
        return cp.norm();
    }
    let vb = d5 * d2 - d1 * d6;
    if vb <= T::zero() && d2 >= T::zero() && d6 <= T::zero() {
        let w = d2 / (d2 - d6);
        return (p - (a + ac * w)).norm();
    }
    let va = d3 * d6 - d5 * d4;
    if va <= T::zero() && (d4 - d3) >= T::zero() && (d5 - d6) >= T::zero() {
        let w = (d4 - d3) / ((d4 - d3) + (d5 - d6));
        return (p - (b + (c - b) * w)).norm();
    }
    let denom = T::one() / (va + vb + vc);
    let v = vb * denom;
    let w = vc * denom;
    (p - (a + ab * v + ac * w)).norm()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::error::Error;

    fn tri() -> [Vec3<f64>; 3] {
        [Vec3::zero(), Vec3::from_f64(1.0, 0.0, 0.0), Vec3::from_f64(0.0, 1.0, 0.0)]
    }

    fn hit(o: [f64; 3], d: [f64; 3]) -> Option<f64> {
        let [a, b, c] = tri();
        ray_triangle_intersect(Vec3::from_array(o), Vec3::from_array(d), a, b, c).unwrap()
    }

    #[test]
    fn drop_onto_plane() {
        assert_eq!(hit([0.25, 0.25, 1.0], [0.0, 0.0, -1.0]), Some(1.0));
    }

    #[test]
    fn pointing_away_misses() {
        assert_eq!(hit([0.25, 0.25, 1.0], [0.0, 0.0, 1.0]), None);
    }

    #[test]
    fn in_plane_origin_inside_hits_at_zero() {
        assert_eq!(hit([0.25, 0.25, 0.0], [1.0, 0.0, 0.0]), Some(0.0));
    }

    #[test]
    fn in_plane_origin_outside_enters_at_edge() {
        // From (-1, 0.25, 0) moving +x: enters at the edge x = 0.
        assert_eq!(hit([-1.0, 0.25, 0.0], [1.0, 0.0, 0.0]), Some(1.0));
        assert_eq!(hit([-1.0, 2.0, 0.0], [1.0, 0.0, 0.0]), None);
    }

    #[test]
    fn parallel_off_plane_misses() {
        assert_eq!(hit([0.25, 0.25, 0.5], [1.0, 0.0, 0.0]), None);
    }

    #[test]
    fn edges_and_vertices_are_inclusive() {
        assert_eq!(hit([0.5, 0.0, 1.0], [0.0, 0.0, -1.0]), Some(1.0));
        assert_eq!(hit([0.0, 0.0, 1.0], [0.0, 0.0, -1.0]), Some(1.0));
        assert_eq!(hit([0.5, 0.5, 1.0], [0.0, 0.0, -1.0]), Some(1.0));
    }

    #[test]
    fn non_unit_direction_is_rejected() {
        let [a, b, c] = tri();
        let err = ray_triangle_intersect(Vec3::zero(), Vec3::from_f64(0.0, 0.0, 2.0), a, b, c).unwrap_err();
        assert!(matches!(err, Error::DirectionNotNormalized));
        assert_eq!(err.to_string(), "direction not normalized");
    }

    #[test]
    fn zero_area_triangle_never_hits() {
        let a: Vec3<f64> = Vec3::zero();
        let b = Vec3::from_f64(1.0, 0.0, 0.0);
        let c = Vec3::from_f64(2.0, 0.0, 0.0);
        let r = ray_triangle_intersect(Vec3::from_f64(0.5, 0.0, 1.0), Vec3::from_f64(0.0, 0.0, -1.0), a, b, c);
        assert_eq!(r.unwrap(), None);
    }

    #[test]
    fn point_triangle_distance_regions() {
        let t = tri();
        assert!((point_triangle_distance(Vec3::from_f64(0.2, 0.2, 0.3), t) - 0.3).abs() < 1e-15);
        assert!((point_triangle_distance(Vec3::from_f64(-1.0, 0.0, 0.0), t) - 1.0).abs() < 1e-15);
        assert!((point_triangle_distance(Vec3::from_f64(1.0, 1.0, 0.0), t) - 0.5f64.sqrt()).abs() < 1e-15);
    }
}
