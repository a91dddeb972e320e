//! Turning a DDF (ground truth or learned) into point clouds and meshes, and scoring clouds
//! with Chamfer distance and F-score.

mod extract;
mod field;
mod kdtree;
mod marching;
mod metrics;
mod pointcloud;

pub use extract::{ddf_to_mesh, fibonacci_directions, proximity_grid, MeshExtraction, DEFAULT_ISO_FRACTION};
pub use field::{FieldEvaluator, FieldValue, MeshField, NetworkField, SphereField};
pub use kdtree::{brute_force_nearest, KdTree};
pub use marching::{marching_cubes, ScalarGrid};
pub use metrics::{chamfer_distance, evaluate_clouds, f_score, MetricsReport, CD_CONVENTION, CD_UNITS};
pub use pointcloud::{ddf_to_pointcloud, PointCloud, DEFAULT_VIS_THRESHOLD};
