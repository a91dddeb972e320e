//! Glue between a [`RunConfig`] and the training loop, shared by the CLI and the tests.

use crate::error::{Error, Result};
use crate::geometry::TriangleMesh;
use crate::hand::{forward_kinematics, HandPose, HandSkeleton};
use crate::linalg::Vec3;
use crate::nn::{gradcheck, train, DdfNetwork, EpochLog, FeaturePipeline, GradcheckReport, PairExample, Target, TrainConfig, TrainingExample};
use crate::projection::{synthetic_pyramid, CameraPose, SyntheticPyramidConfig, DEFAULT_SPACING};
use crate::sampling::{generate_ground_truth, make_symmetry_pairs, sample_rays_uniform, BoundingVolume, DdfSample, Ray, SymmetryPlane};

use super::{load_mesh_obj, load_pyramid, load_ray_dataset, RunConfig};

/// Skeleton, pyramid and camera for a run. The pyramid file wins over synthesizing one from
/// `mesh` (or the config's mesh path when `mesh` is `None`).
pub fn build_pipeline(cfg: &RunConfig, mesh: Option<&TriangleMesh<f64>>) -> Result<FeaturePipeline> {
    let camera = cfg.camera.pose()?;
    let pyramid = match (&cfg.pyramid, mesh, &cfg.mesh) {
        (Some(p), _, _) => load_pyramid(p)?,
        (None, Some(m), _) => synth(cfg, m)?,
        (None, None, Some(path)) => synth(cfg, &load_mesh_obj(path, false)?.mesh)?,
        (None, None, None) => return Err(Error::Config("either `pyramid` or `mesh` is required".into())),
    };
    let rest = match &cfg.skeleton {
        Some(p) => HandSkeleton::parse(&std::fs::read_to_string(p)?)?,
        None => HandSkeleton::rest(1.0),
    }
    .scaled(cfg.skeleton_scale);
    let skeleton = match &cfg.hand_pose {
        Some(theta) => forward_kinematics(&rest, &HandPose::new(theta.clone())?),
        None => rest,
    };
    Ok(FeaturePipeline { camera, pyramid, skeleton, k_l: cfg.k_l, k_3d: cfg.k_3d, spacing: cfg.spacing })
}

fn synth(cfg: &RunConfig, mesh: &TriangleMesh<f64>) -> Result<crate::projection::FeaturePyramid<f64>> {
    let size = cfg.camera.image_size;
    let p = SyntheticPyramidConfig { width: size, height: size, seed: cfg.seed, ..Default::default() };
    synthetic_pyramid(mesh, &cfg.camera.pose()?, &p)
}

pub fn training_examples(pipeline: &FeaturePipeline, samples: &[DdfSample<f64>]) -> Result<Vec<TrainingExample<f32>>> {
    let rays: Vec<Ray<f64>> = samples.iter().map(|s| s.ray).collect();
    let inputs = pipeline.inputs::<f32>(&rays)?;
    Ok(inputs
        .into_iter()
        .zip(samples)
        .map(|(input, s)| TrainingExample { input, target: Target { xi: s.xi(), depth: s.depth.map(|d| d as f32) } })
        .collect())
}

/// Consecutive rays `(2i, 2i + 1)` form one pair.
pub fn pair_examples(pipeline: &FeaturePipeline, rays: &[Ray<f64>]) -> Result<Vec<PairExample<f32>>> {
    if rays.len() % 2 != 0 {
        return Err(Error::Format("paired ray file holds an odd number of rays".into()));
    }
    let mut inputs = pipeline.inputs::<f32>(rays)?.into_iter();
    let mut out = Vec::with_capacity(rays.len() / 2);
    while let (Some(a), Some(b)) = (inputs.next(), inputs.next()) {
        out.push(PairExample { a, b });
    }
    Ok(out)
}

pub struct FitOutput {
    pub network: DdfNetwork<f32>,
    pub log: Vec<EpochLog>,
    pub pipeline: FeaturePipeline,
}

/// Trains from the files named in `cfg`: ground truth from `data`, optional pairs from `pairs`.
pub fn fit(cfg: &RunConfig, on_epoch: impl FnMut(&EpochLog)) -> Result<FitOutput> {
    let data = cfg.data.as_ref().ok_or_else(|| Error::Config("`data` is required".into()))?;
    let ds = load_ray_dataset(data)?;
    let samples = ds.samples().ok_or_else(|| Error::Format(format!("{} carries no ground truth", data.display())))?;
    let pipeline = build_pipeline(cfg, None)?;
    let examples = training_examples(&pipeline, &samples)?;
    let pairs = match &cfg.pairs {
        Some(p) => pair_examples(&pipeline, &load_ray_dataset(p)?.rays)?,
        None => Vec::new(),
    };
    let tc = cfg.to_train_config();
    let mut network = DdfNetwork::new(tc.net_config(pipeline.channels()), tc.seed)?;
    let log = train(&mut network, &examples, &pairs, &tc, on_epoch)?;
    Ok(FitOutput { network, log, pipeline })
}

/// Real features for a small sphere scene, `samples` rays plus three symmetry pairs.
pub fn sphere_gradcheck(seed: u64, width: usize, samples: usize, h: f64) -> Result<GradcheckReport> {
    let mesh = TriangleMesh::<f64>::icosphere(Vec3::zero(), 0.5, 2);
    let camera = CameraPose::framing_unit_cube(32);
    let pyr = SyntheticPyramidConfig { width: 32, height: 32, levels: 3, channels_per_level: 4, seed };
    let tc = TrainConfig { width, ..TrainConfig::default() };
    let pipeline = FeaturePipeline {
        pyramid: synthetic_pyramid(&mesh, &camera, &pyr)?,
        camera,
        skeleton: HandSkeleton::rest(1.0),
        k_l: tc.k_l,
        k_3d: tc.k_3d,
        spacing: DEFAULT_SPACING,
    };
    let bounds = BoundingVolume::unit_cube();
    let rays = sample_rays_uniform(&bounds, samples.max(1), seed)?;
    let gt = generate_ground_truth(&mesh, &rays)?;
    let inputs = pipeline.inputs::<f64>(&rays)?;
    let examples: Vec<TrainingExample<f64>> =
        inputs.into_iter().zip(&gt).map(|(input, s)| TrainingExample { input, target: s.into() }).collect();
    let plane = SymmetryPlane::new(Vec3::zero(), Vec3::new(1.0, 0.0, 0.0))?;
    let pairs = make_symmetry_pairs(&plane, &bounds, 3, seed)?
        .iter()
        .map(|p| Ok(PairExample { a: pipeline.input(&p.ray_a)?, b: pipeline.input(&p.ray_b)? }))
        .collect::<Result<Vec<_>>>()?;
    let net = DdfNetwork::<f64>::new(tc.net_config(pipeline.channels()), seed)?;
    gradcheck(&net, &examples, &pairs, tc.lambda1, tc.lambda2, h)
}
