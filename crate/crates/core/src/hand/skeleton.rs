use crate::error::{invalid, Error, Result};
use crate::linalg::{Mat3, Vec3};
use crate::sampling::RigidTransform;
use crate::scalar::Real;

pub const JOINT_COUNT: usize = 21;
/// Joints driven by the articulation vector: 1..=15 (wrist and fingertips are not).
pub const ARTICULATED_JOINTS: usize = 15;
pub const POSE_DIM: usize = 3 * ARTICULATED_JOINTS;

/// Bundled rest skeleton, text format version 1.
pub const REST_SKELETON: &str = include_str!("../../data/rest_skeleton.txt");

/// Joint positions, parent links and per-joint orthonormal frames (columns are the local x, y, z
/// axes in wrist coordinates). Parents always precede children; bone `b` joins joint `b + 1` to
/// its parent.
#[derive(Debug, Clone, PartialEq)]
pub struct HandSkeleton<T> {
    joints: Vec<Vec3<T>>,
    parents: Vec<Option<usize>>,
    frames: Vec<Mat3<T>>,
    names: Vec<String>,
}

impl<T: Real> HandSkeleton<T> {
    /// Builds a skeleton and its rest frames. Frame x follows the bone to the first child (or
    /// from the parent at a fingertip), z is `x × up` with `up = +z` (falling back to `+y` when
    /// the bone is vertical) and `y = z × x`.
    pub fn new(joints: Vec<Vec3<T>>, parents: Vec<Option<usize>>, names: Vec<String>) -> Result<Self> {
        if joints.len() != JOINT_COUNT || parents.len() != JOINT_COUNT || names.len() != JOINT_COUNT {
            return Err(invalid(format!("a hand skeleton has exactly {JOINT_COUNT} joints")));
        }
        if parents[0].is_some() {
            return Err(invalid("joint 0 must be the root"));
        }
        for (j, p) in parents.iter().enumerate().skip(1) {
            match *p {
                Some(p) if p < j => {
                    if !(joints[j].distance(joints[p]) > T::zero()) {
                        return Err(invalid(format!("bone {} has zero length", j - 1)));
                    }
                }
                _ => return Err(invalid(format!("joint {j} needs a parent with a lower index"))),
            }
        }
        if joints.iter().any(|j| !j.is_finite()) {
            return Err(invalid("joint positions must be finite"));
        }
        let frames = (0..JOINT_COUNT)
            .map(|j| {
                let x = match (0..JOINT_COUNT).find(|&c| parents[c] == Some(j)) {
                    Some(c) => joints[c] - joints[j],
                    None => joints[j] - joints[parents[j].expect("leaf has a parent")],
                };
                rest_frame(x)
            })
            .collect();
        Ok(Self { joints, parents, frames, names })
    }

    /// Parses the versioned text format (see `data/rest_skeleton.txt`).
    pub fn parse(text: &str) -> Result<Self> {
        let mut lines = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.split('#').next().unwrap_or("").trim()))
            .filter(|(_, l)| !l.is_empty());
        let parse_err = |line: usize, m: &str| Error::Parse { line, message: m.to_string() };
        let (ln, header) = lines.next().ok_or_else(|| parse_err(0, "empty skeleton file"))?;
        if header != "ddf-skeleton 1" {
            return Err(parse_err(ln, "expected header `ddf-skeleton 1`"));
        }
        let (ln, count) = lines.next().ok_or_else(|| parse_err(ln, "missing joint count"))?;
        if count.split_whitespace().collect::<Vec<_>>() != ["joints", "21"] {
            return Err(parse_err(ln, "expected `joints 21`"));
        }
        let mut joints = vec![None; JOINT_COUNT];
        let mut parents = vec![None; JOINT_COUNT];
        let mut names = vec![String::new(); JOINT_COUNT];
        for (ln, line) in lines {
            let f: Vec<&str> = line.split_whitespace().collect();
            if f.len() != 6 {
                return Err(parse_err(ln, "expected `index name parent x y z`"));
            }
            let idx: usize = f[0].parse().map_err(|_| parse_err(ln, "bad joint index"))?;
            if idx >= JOINT_COUNT || joints[idx].is_some() {
                return Err(parse_err(ln, "joint index out of range or repeated"));
            }
            let parent: i64 = f[2].parse().map_err(|_| parse_err(ln, "bad parent index"))?;
            let c = |s: &str| s.parse::<f64>().map_err(|_| parse_err(ln, "bad coordinate"));
            joints[idx] = Some(Vec3::from_f64(c(f[3])?, c(f[4])?, c(f[5])?));
            parents[idx] = usize::try_from(parent).ok();
            names[idx] = f[1].to_string();
        }
        let joints = joints.into_iter().collect::<Option<Vec<_>>>().ok_or_else(|| parse_err(0, "missing joints"))?;
        Self::new(joints, parents, names)
    }

    /// The bundled rest skeleton scaled by `scale` (e.g. meters to wrist-frame units).
    pub fn rest(scale: T) -> Self {
        Self::parse(REST_SKELETON).expect("bundled skeleton parses").scaled(scale)
    }

    pub fn joints(&self) -> &[Vec3<T>] {
        &self.joints
    }

    pub fn parents(&self) -> &[Option<usize>] {
        &self.parents
    }

    pub fn frames(&self) -> &[Mat3<T>] {
        &self.frames
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn bone_count(&self) -> usize {
        JOINT_COUNT - 1
    }

    /// `(parent, child)` joint indices of bone `b`.
    pub fn bone(&self, b: usize) -> (usize, usize) {
        let child = b + 1;
        (self.parents[child].expect("non-root joint"), child)
    }

    pub fn bone_length(&self, b: usize) -> T {
        let (p, c) = self.bone(b);
        self.joints[p].distance(self.joints[c])
    }

    pub fn scaled(&self, s: T) -> Self {
        Self { joints: self.joints.iter().map(|&j| j * s).collect(), ..self.clone() }
    }

    /// Applies one rigid motion to every joint position and frame.
    pub fn transformed(&self, tf: &RigidTransform<T>) -> Self {
        Self {
            joints: self.joints.iter().map(|&j| tf.apply_point(j)).collect(),
            frames: self.frames.iter().map(|f| tf.rotation.mul_mat(f)).collect(),
            ..self.clone()
        }
    }

    pub fn cast<U: Real>(&self) -> HandSkeleton<U> {
        HandSkeleton {
            joints: self.joints.iter().map(|j| j.cast()).collect(),
            parents: self.parents.clone(),
            frames: self.frames.iter().map(|f| f.cast()).collect(),
            names: self.names.clone(),
        }
    }
}

fn rest_frame<T: Real>(bone: Vec3<T>) -> Mat3<T> {
    let x = bone.normalized().expect("bone length checked");
    let up = Vec3::new(T::zero(), T::zero(), T::one());
    let z = x.cross(up).normalized().unwrap_or_else(|| {
        x.cross(Vec3::new(T::zero(), T::one(), T::zero())).normalized().expect("x is not parallel to both axes")
    });
    let y = z.cross(x);
    Mat3::from_columns(x, y, z)
}

/// 45 articulation parameters: one axis-angle vector per articulated joint, in joint order 1..=15,
/// each expressed in that joint's rest frame.
#[derive(Debug, Clone, PartialEq)]
pub struct HandPose<T> {
    theta: Vec<T>,
}

impl<T: Real> HandPose<T> {
    /// Validates the length and finiteness and canonicalizes each axis-angle to magnitude ≤ π.
    pub fn new(theta: Vec<T>) -> Result<Self> {
        if theta.len() != POSE_DIM {
            return Err(invalid(format!("hand pose needs {POSE_DIM} parameters, got {}", theta.len())));
        }
        if theta.iter().any(|v| !v.is_finite()) {
            return Err(invalid("hand pose parameters must be finite"));
        }
        let mut theta = theta;
        for w in theta.chunks_mut(3) {
            let v = Vec3::new(w[0], w[1], w[2]);
            let angle = v.norm();
            if angle > T::PI() {
                let tau = T::lit(std::f64::consts::TAU);
                let wrapped = angle - tau * (angle / tau).round();
                let c = v * (wrapped / angle);
                w.copy_from_slice(&c.to_array());
            }
        }
        Ok(Self { theta })
    }

    pub fn zero() -> Self {
        Self { theta: vec![T::zero(); POSE_DIM] }
    }

    pub fn params(&self) -> &[T] {
        &self.theta
    }

    /// Axis-angle of articulated joint `j` (1..=15).
    pub fn joint_axis_angle(&self, j: usize) -> Vec3<T> {
        let k = 3 * (j - 1);
        Vec3::new(self.theta[k], self.theta[k + 1], self.theta[k + 2])
    }
}

/// Poses the rest skeleton. Each articulated joint rotates its subtree about itself; rotations
/// compose from the wrist outwards and the wrist stays put.
pub fn forward_kinematics<T: Real>(rest: &HandSkeleton<T>, pose: &HandPose<T>) -> HandSkeleton<T> {
    let mut global = vec![Mat3::identity(); JOINT_COUNT];
    let mut joints = rest.joints.clone();
    let mut frames = rest.frames.clone();
    for j in 0..JOINT_COUNT {
        let parent_rot = rest.parents[j].map_or_else(Mat3::identity, |p| global[p]);
        if let Some(p) = rest.parents[j] {
            joints[j] = joints[p] + parent_rot.mul_vec(rest.joints[j] - rest.joints[p]);
        }
        let omega = if (1..=ARTICULATED_JOINTS).contains(&j) { pose.joint_axis_angle(j) } else { Vec3::zero() };
        let local = if omega != Vec3::zero() {
            let f = &rest.frames[j];
            f.mul_mat(&Mat3::from_axis_angle(omega)).mul_mat(&f.transpose())
        } else {
            Mat3::identity()
        };
        global[j] = parent_rot.mul_mat(&local);
        frames[j] = global[j].mul_mat(&rest.frames[j]);
    }
    HandSkeleton { joints, frames, ..rest.clone() }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sampling::{streams, RayRng};

    fn rest() -> HandSkeleton<f64> {
        HandSkeleton::rest(1.0)
    }

    #[test]
    fn bundled_skeleton_is_valid() {
        let s = rest();
        assert_eq!(s.joints().len(), 21);
        assert_eq!(s.bone_count(), 20);
        for f in s.frames() {
            assert!(f.orthonormality_error() < 1e-12);
            assert!((f.determinant() - 1.0).abs() < 1e-12);
        }
        assert_eq!(s.names()[16], "thumb_tip");
        assert_eq!(s.bone(15), (15, 16));
    }

    #[test]
    fn parse_errors_carry_line_numbers() {
        let bad = REST_SKELETON.replace("ddf-skeleton 1", "ddf-skeleton 2");
        assert!(matches!(HandSkeleton::<f64>::parse(&bad), Err(Error::Parse { .. })));
        let short = REST_SKELETON.replace("20 pinky_tip    9  0.145 -0.050  0.000", "");
        assert!(HandSkeleton::<f64>::parse(&short).is_err());
    }

    #[test]
    fn zero_pose_is_identity() {
        let s = rest();
        let posed = forward_kinematics(&s, &HandPose::zero());
        for (a, b) in posed.joints().iter().zip(s.joints()) {
            assert!(a.distance(*b) < 1e-15);
        }
        assert_eq!(posed.frames(), s.frames());
    }

    #[test]
    fn pose_length_is_checked() {
        assert!(HandPose::<f64>::new(vec![0.0; 44]).is_err());
    }

    #[test]
    fn pose_is_canonicalized() {
        let mut theta = vec![0.0; POSE_DIM];
        theta[0] = 1.5 * std::f64::consts::PI;
        let p = HandPose::new(theta).unwrap();
        assert!((p.params()[0] + 0.5 * std::f64::consts::PI).abs() < 1e-12);
        let a = Mat3::from_axis_angle(Vec3::new(1.5 * std::f64::consts::PI, 0.0, 0.0));
        let b = Mat3::from_axis_angle(p.joint_axis_angle(1));
        for i in 0..3 {
            for j in 0..3 {
                assert!((a.rows[i][j] - b.rows[i][j]).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn flexing_one_finger_moves_only_its_subtree() {
        let s = rest();
        let mut theta = vec![0.0; POSE_DIM];
        // Joint 1 (index MCP), quarter turn about its frame's z axis.
        theta[2] = std::f64::consts::FRAC_PI_2;
        let posed = forward_kinematics(&s, &HandPose::new(theta).unwrap());
        let moved = [2, 3, 17];
        for j in 0..JOINT_COUNT {
            let d = posed.joints()[j].distance(s.joints()[j]);
            if moved.contains(&j) {
                assert!(d > 1e-3, "joint {j} should move");
            } else {
                assert!(d < 1e-15, "joint {j} moved by {d}");
            }
        }
        // Rigid: distances from the pivot and between subtree joints are preserved.
        let pivot = s.joints()[1];
        for &a in &moved {
            assert!((posed.joints()[a].distance(pivot) - s.joints()[a].distance(pivot)).abs() < 1e-12);
            for &b in &moved {
                assert!((posed.joints()[a].distance(posed.joints()[b]) - s.joints()[a].distance(s.joints()[b])).abs() < 1e-12);
            }
        }
        // The quarter turn is about the frame's z axis: bone 1 (1→2) turns by 90°.
        let before = s.joints()[2] - pivot;
        let after = posed.joints()[2] - pivot;
        assert!(before.dot(after).abs() < 1e-12);
    }

    #[test]
    fn random_poses_preserve_bone_lengths_and_frames() {
        let s = rest();
        let mut rng = RayRng::new(5, streams::POSES);
        for _ in 0..100 {
            let theta = (0..POSE_DIM).map(|_| rng.uniform_range(-1.5, 1.5)).collect();
            let posed = forward_kinematics(&s, &HandPose::new(theta).unwrap());
            for b in 0..20 {
                let rel = (posed.bone_length(b) - s.bone_length(b)).abs() / s.bone_length(b);
                assert!(rel <= 1e-7, "bone {b} rel err {rel}");
            }
            for f in posed.frames() {
                assert!(f.orthonormality_error() < 1e-7);
            }
            assert_eq!(posed.joints()[0], s.joints()[0]);
        }
    }
}
