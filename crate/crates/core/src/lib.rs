//! Directed distance fields (DDF) for hand-held object reconstruction.
//!
//! A DDF maps a ray (origin, unit direction) to the distance to the first surface hit, paired
//! with a binary visibility field that says whether there is a hit at all. This crate covers
//! exact ground truth from triangle meshes, the 2D/3D per-ray features, a trainable conditional
//! DDF network with hand-written reverse-mode gradients, and conversion back to point clouds
//! and meshes with Chamfer/F-score evaluation.
//!
//! Everything numeric is generic over [`Real`] (`f32` or `f64`). The aliases below fix the
//! conventional choices: `f64` for geometry and `f32` for network parameters.

pub mod error;
pub mod geometry;
pub mod hand;
pub mod io;
pub mod linalg;
pub mod nn;
pub mod projection;
pub mod recon;
pub mod sampling;
pub mod scalar;

pub use error::{Error, Result};
pub use scalar::Real;

pub type Vec3d = linalg::Vec3<f64>;
pub type Mesh = geometry::TriangleMesh<f64>;
pub type MeshBvh = geometry::Bvh<f64>;
pub type Ray3 = sampling::Ray<f64>;
pub type Sample = sampling::DdfSample<f64>;
pub type Camera = projection::CameraPose<f64>;
pub type Pyramid = projection::FeaturePyramid<f64>;

pub type Skeleton = hand::HandSkeleton<f64>;
pub type Network = nn::DdfNetwork<f32>;
pub type Cloud = recon::PointCloud<f64>;
