use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{Mat3, Vec3};
use crate::nn::TrainConfig;
use crate::projection::{CameraPose, DEFAULT_SPACING};
use crate::sampling::{BoundingVolume, SymmetryPlane};

/// Environment variable that overrides the config seed. An explicit `--seed` flag still wins.
pub const SEED_ENV: &str = "DDF_SEED";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CameraConfig {
    pub fx: f64,
    pub fy: f64,
    pub cx: f64,
    pub cy: f64,
    /// World-to-camera rotation, row-major.
    #[serde(default = "identity_rows")]
    pub rotation: [[f64; 3]; 3],
    #[serde(default)]
    pub translation: [f64; 3],
    /// Image size in pixels (square) used when a synthetic pyramid is built.
    #[serde(default = "default_image_size")]
    pub image_size: usize,
}

fn identity_rows() -> [[f64; 3]; 3] {
    Mat3::<f64>::identity().rows
}

fn default_image_size() -> usize {
    64
}

impl Default for CameraConfig {
    fn default() -> Self {
        Self::from_pose(&CameraPose::framing_unit_cube(64), 64)
    }
}

impl CameraConfig {
    pub fn from_pose(c: &CameraPose<f64>, image_size: usize) -> Self {
        Self {
            fx: c.fx,
            fy: c.fy,
            cx: c.cx,
            cy: c.cy,
            rotation: c.rotation.rows,
            translation: [c.translation.x, c.translation.y, c.translation.z],
            image_size,
        }
    }

    pub fn pose(&self) -> Result<CameraPose<f64>> {
        CameraPose::new(self.fx, self.fy, self.cx, self.cy, Mat3::from_rows(self.rotation), Vec3::from_array(self.translation))
            .map_err(|e| Error::Config(format!("camera: {e}")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoundsConfig {
    pub min: [f64; 3],
    pub max: [f64; 3],
}

impl Default for BoundsConfig {
    fn default() -> Self {
        Self { min: [-1.0; 3], max: [1.0; 3] }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PlaneConfig {
    pub point: [f64; 3],
    pub normal: [f64; 3],
}

/// Everything a `fit` run needs. Keys mirror the training hyperparameters; relative paths are
/// resolved against the directory holding the config file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub width: usize,
    pub pe_bands: [usize; 2],
    pub heads: usize,
    #[serde(rename = "K_l")]
    pub k_l: usize,
    #[serde(rename = "K_3D")]
    pub k_3d: usize,
    pub lambda1: f64,
    pub lambda2: f64,
    pub lr: f64,
    pub epochs: usize,
    pub batch: usize,
    pub seed: u64,
    pub threads: usize,
    /// Ground-truth DDFR file.
    pub data: Option<PathBuf>,
    /// Paired DDFR file feeding the symmetry loss.
    pub pairs: Option<PathBuf>,
    /// Object mesh, used to build a synthetic pyramid when `pyramid` is absent.
    pub mesh: Option<PathBuf>,
    pub pyramid: Option<PathBuf>,
    /// Skeleton text file; the bundled rest skeleton when absent.
    pub skeleton: Option<PathBuf>,
    pub skeleton_scale: f64,
    /// 45 axis-angle values; the zero pose when absent.
    pub hand_pose: Option<Vec<f64>>,
    pub bounds: BoundsConfig,
    pub camera: CameraConfig,
    pub symmetry_plane: Option<PlaneConfig>,
    /// Pixel spacing of the 2D samples along the projected ray.
    pub spacing: f64,
}

impl Default for RunConfig {
    fn default() -> Self {
        let t = TrainConfig::default();
        Self {
            width: t.width,
            pe_bands: t.pe_bands,
            heads: t.heads,
            k_l: t.k_l,
            k_3d: t.k_3d,
            lambda1: t.lambda1,
            lambda2: t.lambda2,
            lr: t.lr,
            epochs: t.epochs,
            batch: t.batch,
            seed: t.seed,
            threads: t.threads,
            data: None,
            pairs: None,
            mesh: None,
            pyramid: None,
            skeleton: None,
            skeleton_scale: 1.0,
            hand_pose: None,
            bounds: BoundsConfig::default(),
            camera: CameraConfig::default(),
            symmetry_plane: None,
            spacing: DEFAULT_SPACING,
        }
    }
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let c: Self = serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        c.validate()?;
        Ok(c)
    }

    /// Loads a config file and resolves its relative paths against the file's directory.
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let mut c = Self::from_json(&std::fs::read_to_string(path)?)?;
        let base = path.parent().unwrap_or(Path::new("."));
        for p in [&mut c.data, &mut c.pairs, &mut c.mesh, &mut c.pyramid, &mut c.skeleton].into_iter().flatten() {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        }
        Ok(c)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::Config(m.to_string()));
        if self.width == 0 || self.heads == 0 || self.k_l == 0 || self.k_3d == 0 || self.batch == 0 || self.threads == 0 {
            return bad("width, heads, K_l, K_3D, batch and threads must be positive");
        }
        if !(self.lr > 0.0 && self.lambda1 >= 0.0 && self.lambda2 >= 0.0) {
            return bad("lr must be positive and the loss weights non-negative");
        }
        if !(self.skeleton_scale > 0.0 && self.spacing >= 0.0) {
            return bad("skeleton_scale must be positive and spacing non-negative");
        }
        if self.hand_pose.as_ref().is_some_and(|p| p.len() != crate::hand::POSE_DIM) {
            return bad("hand_pose must hold 45 values");
        }
        self.bounds()?;
        self.camera.pose()?;
        self.plane()?;
        Ok(())
    }

    /// Applies `DDF_SEED` when set, then an explicit seed, which takes precedence.
    pub fn apply_seed_overrides(&mut self, explicit: Option<u64>) -> Result<()> {
        if let Ok(v) = std::env::var(SEED_ENV) {
            self.seed = v.trim().parse().map_err(|_| Error::Config(format!("{SEED_ENV} is not an unsigned integer: {v:?}")))?;
        }
        if let Some(s) = explicit {
            self.seed = s;
        }
        Ok(())
    }

    pub fn bounds(&self) -> Result<BoundingVolume<f64>> {
        BoundingVolume::new(Vec3::from_array(self.bounds.min), Vec3::from_array(self.bounds.max))
            .map_err(|e| Error::Config(format!("bounds: {e}")))
    }

    pub fn plane(&self) -> Result<Option<SymmetryPlane<f64>>> {
        self.symmetry_plane
            .map(|p| {
                SymmetryPlane::new(Vec3::from_array(p.point), Vec3::from_array(p.normal))
                    .map_err(|e| Error::Config(format!("symmetry_plane: {e}")))
            })
            .transpose()
    }

    pub fn to_train_config(&self) -> TrainConfig {
        TrainConfig {
            width: self.width,
            pe_bands: self.pe_bands,
            heads: self.heads,
            k_l: self.k_l,
            k_3d: self.k_3d,
            lambda1: self.lambda1,
            lambda2: self.lambda2,
            lr: self.lr,
            epochs: self.epochs,
            batch: self.batch,
            seed: self.seed,
            threads: self.threads,
        }
    }
}
