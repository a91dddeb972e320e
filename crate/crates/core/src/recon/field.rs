use rayon::prelude::*;

use crate::error::Result;
use crate::geometry::{analytic_sphere_ddf, build_bvh, cast_ray, Bvh, TriangleMesh};
use crate::linalg::Vec3;
use crate::nn::{DdfNetwork, FeaturePipeline};
use crate::sampling::Ray;

/// Visibility as a probability (exactly 0 or 1 for exact fields) and the predicted distance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FieldValue {
    pub visibility: f64,
    pub depth: f64,
}

impl FieldValue {
    pub const MISS: Self = Self { visibility: 0.0, depth: 0.0 };

    pub fn hit(depth: f64) -> Self {
        Self { visibility: 1.0, depth }
    }

    pub fn is_visible(&self, threshold: f64) -> bool {
        self.visibility > threshold
    }
}

/// A queryable DDF. Evaluation is batched so learned fields can amortize the forward pass.
pub trait FieldEvaluator: Sync {
    fn evaluate(&self, rays: &[Ray<f64>]) -> Result<Vec<FieldValue>>;
}

/// Exact casting against a mesh.
#[derive(Debug, Clone)]
pub struct MeshField {
    mesh: TriangleMesh<f64>,
    bvh: Bvh<f64>,
}

impl MeshField {
    pub fn new(mesh: TriangleMesh<f64>) -> Result<Self> {
        let bvh = build_bvh(&mesh)?;
        Ok(Self { mesh, bvh })
    }

    pub fn mesh(&self) -> &TriangleMesh<f64> {
        &self.mesh
    }
}

impl FieldEvaluator for MeshField {
    fn evaluate(&self, rays: &[Ray<f64>]) -> Result<Vec<FieldValue>> {
        rays.par_iter()
            .map(|r| Ok(cast_ray(&self.bvh, &self.mesh, r.origin, r.direction)?.map_or(FieldValue::MISS, |h| FieldValue::hit(h.t))))
            .collect()
    }
}

/// Closed-form sphere.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SphereField {
    pub center: Vec3<f64>,
    pub radius: f64,
}

impl FieldEvaluator for SphereField {
    fn evaluate(&self, rays: &[Ray<f64>]) -> Result<Vec<FieldValue>> {
        rays.iter()
            .map(|r| {
                let s = analytic_sphere_ddf(self.center, self.radius, r.origin, r.direction)?;
                Ok(s.depth.map_or(FieldValue::MISS, FieldValue::hit))
            })
            .collect()
    }
}

/// A trained network behind the feature pipeline; visibility is the sigmoid probability.
#[derive(Debug, Clone)]
pub struct NetworkField {
    pub network: DdfNetwork<f32>,
    pub pipeline: FeaturePipeline,
    pub chunk: usize,
}

impl NetworkField {
    pub fn new(network: DdfNetwork<f32>, pipeline: FeaturePipeline) -> Self {
        Self { network, pipeline, chunk: 1024 }
    }
}

impl FieldEvaluator for NetworkField {
    fn evaluate(&self, rays: &[Ray<f64>]) -> Result<Vec<FieldValue>> {
        let parts: Vec<Result<Vec<FieldValue>>> = rays
            .par_chunks(self.chunk.max(1))
            .map(|chunk| {
                let inputs = chunk.iter().map(|r| self.pipeline.input::<f32>(r)).collect::<Result<Vec<_>>>()?;
                let refs: Vec<_> = inputs.iter().collect();
                Ok(self
                    .network
                    .forward_batch(&refs)?
                    .into_iter()
                    .map(|p| FieldValue { visibility: p.visibility() as f64, depth: p.depth as f64 })
                    .collect())
            })
            .collect();
        Ok(parts.into_iter().collect::<Result<Vec<_>>>()?.concat())
    }
}
