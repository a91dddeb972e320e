//! Perspective projection of rays and 2D feature sampling from a multi-resolution pyramid.

mod camera;
mod pyramid;
mod ray2d;

pub use camera::{project_point, CameraPose, MIN_DEPTH};
pub use pyramid::{bilinear_sample, synthetic_pyramid, FeatureGrid, FeaturePyramid, FeatureVector, SyntheticPyramidConfig};
pub use ray2d::{
    collect_ray_feature_inputs, project_ray, project_ray_with_offset, sample_2d_points, Ray2D, RayFeatureInputs,
    DEFAULT_SPACING, DEGENERATE_EPS, PROJECTION_OFFSET,
};
