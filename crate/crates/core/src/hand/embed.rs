use super::closest::{ray_skeleton_closest, SkeletonContact};
use super::geodesic::geodesic_knn;
use super::skeleton::{HandSkeleton, JOINT_COUNT};
use crate::error::{invalid, Result};
use crate::linalg::Vec3;
use crate::sampling::Ray;
use crate::scalar::Real;

/// `p_s` expressed in the frames of the selected joints, concatenated in `joint_ids` order.
#[derive(Debug, Clone, PartialEq)]
pub struct IntersectionFeature<T> {
    pub coords: Vec<T>,
    pub joint_ids: Vec<usize>,
}

/// Ray origin and direction expressed in each of the 21 joint frames: 6 values per joint.
#[derive(Debug, Clone, PartialEq)]
pub struct GlobalHandEmbedding<T> {
    pub values: Vec<T>,
}

impl<T: Real> GlobalHandEmbedding<T> {
    pub const DIM: usize = 6 * JOINT_COUNT;
}

pub fn local_intersection_feature<T: Real>(
    p_s: Vec3<T>,
    skeleton: &HandSkeleton<T>,
    joint_ids: &[usize],
) -> Result<IntersectionFeature<T>> {
    for (i, &j) in joint_ids.iter().enumerate() {
        if j >= JOINT_COUNT || joint_ids[..i].contains(&j) {
            return Err(invalid("joint ids must be distinct and below 21"));
        }
    }
    let mut coords = Vec::with_capacity(3 * joint_ids.len());
    for &j in joint_ids {
        let local = skeleton.frames()[j].tr_mul_vec(p_s - skeleton.joints()[j]);
        coords.extend_from_slice(&local.to_array());
    }
    Ok(IntersectionFeature { coords, joint_ids: joint_ids.to_vec() })
}

pub fn global_hand_embedding<T: Real>(ray: &Ray<T>, skeleton: &HandSkeleton<T>) -> GlobalHandEmbedding<T> {
    let mut values = Vec::with_capacity(6 * JOINT_COUNT);
    for (frame, &o) in skeleton.frames().iter().zip(skeleton.joints()) {
        values.extend_from_slice(&frame.tr_mul_vec(ray.origin - o).to_array());
        values.extend_from_slice(&frame.tr_mul_vec(ray.direction).to_array());
    }
    GlobalHandEmbedding { values }
}

/// Everything the network needs from the hand for one ray.
#[derive(Debug, Clone, PartialEq)]
pub struct HandFeatures<T> {
    pub contact: SkeletonContact<T>,
    pub local: IntersectionFeature<T>,
    pub global: GlobalHandEmbedding<T>,
}

pub fn hand_features<T: Real>(ray: &Ray<T>, skeleton: &HandSkeleton<T>, k_3d: usize) -> Result<HandFeatures<T>> {
    let contact = ray_skeleton_closest(ray, skeleton);
    let ids = geodesic_knn(skeleton, contact.p_d, contact.bone, k_3d)?;
    Ok(HandFeatures {
        local: local_intersection_feature(contact.p_s, skeleton, &ids)?,
        global: global_hand_embedding(ray, skeleton),
        contact,
    })
}
