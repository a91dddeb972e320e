//! Ray sampling in the bounding volume, symmetry pairs, wrist-frame normalization and
//! ground-truth DDF generation.

mod ground_truth;
mod ray;
mod rng;
mod symmetry;

pub use ground_truth::{generate_ground_truth, generate_ground_truth_with};
pub use ray::{normalize_to_wrist, sample_rays_surface_biased, sample_rays_uniform, sample_rays_uniform_on, BoundingVolume, DdfSample, Ray, RigidTransform};
pub use rng::{streams, RayRng};
pub use symmetry::{make_symmetry_pairs, SymmetryPair, SymmetryPlane};
