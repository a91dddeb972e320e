use rayon::prelude::*;

use super::network::RayInput;
use crate::error::Result;
use crate::hand::{hand_features, HandSkeleton};
use crate::projection::{collect_ray_feature_inputs, CameraPose, FeaturePyramid};
use crate::sampling::Ray;
use crate::scalar::{cast, Real};

/// Assembles network inputs for wrist-frame rays: 2D features from the projected ray, then
/// the global and local hand embeddings.
#[derive(Debug, Clone)]
pub struct FeaturePipeline {
    pub camera: CameraPose<f64>,
    pub pyramid: FeaturePyramid<f64>,
    pub skeleton: HandSkeleton<f64>,
    pub k_l: usize,
    pub k_3d: usize,
    pub spacing: f64,
}

impl FeaturePipeline {
    pub fn channels(&self) -> usize {
        self.pyramid.total_channels()
    }

    pub fn input<T: Real>(&self, ray: &Ray<f64>) -> Result<RayInput<T>> {
        let f2 = collect_ray_feature_inputs(&self.pyramid, &self.camera, ray, self.k_l, self.spacing)?;
        let hand = hand_features(ray, &self.skeleton, self.k_3d)?;
        let conv = |v: &[f64]| v.iter().map(|&x| cast::<f64, T>(x)).collect::<Vec<T>>();
        Ok(RayInput {
            ray: Ray { origin: ray.origin.cast(), direction: ray.direction.cast() },
            f_p: conv(&f2.f_p),
            f_l: f2.f_l.iter().map(|k| conv(k)).collect(),
            f_global: conv(&hand.global.values),
            f_local: conv(&hand.local.coords),
        })
    }

    /// Order-preserving parallel map over [`Self::input`].
    pub fn inputs<T: Real>(&self, rays: &[Ray<f64>]) -> Result<Vec<RayInput<T>>> {
        rays.par_iter().map(|r| self.input(r)).collect()
    }
}
