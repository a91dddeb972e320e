//! Articulated 21-joint hand skeleton and the per-ray hand features: closest approach between
//! a ray and the bones, geodesic nearest joints, and local/global joint-frame embeddings.

mod closest;
mod embed;
mod geodesic;
mod skeleton;

pub use closest::{ray_segment_closest, ray_skeleton_closest, SkeletonContact};
pub use embed::{global_hand_embedding, hand_features, local_intersection_feature, GlobalHandEmbedding, HandFeatures, IntersectionFeature};
pub use geodesic::{geodesic_distances, geodesic_knn};
pub use skeleton::{forward_kinematics, HandPose, HandSkeleton, ARTICULATED_JOINTS, JOINT_COUNT, POSE_DIM, REST_SKELETON};
