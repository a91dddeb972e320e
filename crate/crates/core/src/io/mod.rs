//! File formats and run configuration: OBJ meshes, DDFR ray datasets, DDFN checkpoints, PLY
//! point clouds, DDFP feature pyramids and the JSON run config.
//!
//! Binary formats are little-endian with `f32` payloads.

mod binary;
mod checkpoint;
mod config;
mod obj;
mod ply;
mod pyramid;
mod rays;
mod run;

pub use checkpoint::{load_checkpoint, read_checkpoint, save_checkpoint, write_checkpoint, CHECKPOINT_MAGIC, CHECKPOINT_VERSION};
pub use config::{BoundsConfig, CameraConfig, PlaneConfig, RunConfig, SEED_ENV};
pub use obj::{load_mesh_obj, parse_obj, save_mesh_obj, write_obj, LoadedMesh};
pub use ply::{load_ply, read_ply, save_ply, write_ply, PlyFormat};
pub use pyramid::{load_pyramid, read_pyramid, save_pyramid, write_pyramid, PYRAMID_MAGIC};
pub use rays::{load_ray_dataset, read_ray_dataset, save_ray_dataset, write_ray_dataset, RayDataset, RAYS_MAGIC, RAYS_VERSION};
pub use run::{build_pipeline, fit, pair_examples, sphere_gradcheck, training_examples, FitOutput};
