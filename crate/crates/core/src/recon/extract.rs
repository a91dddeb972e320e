use super::field::FieldEvaluator;
use super::marching::{marching_cubes, ScalarGrid};
use super::pointcloud::DEFAULT_VIS_THRESHOLD;
use crate::error::{invalid, Error, Result};
use crate::geometry::TriangleMesh;
use crate::linalg::Vec3;
use crate::sampling::{BoundingVolume, Ray};

/// Default level as a fraction of the bounding-box diagonal.
pub const DEFAULT_ISO_FRACTION: f64 = 0.005;

/// Grid points evaluated per field call; bounds memory for learned fields.
const POINTS_PER_CHUNK: usize = 2048;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeshExtraction {
    pub resolution: usize,
    pub directions: usize,
    /// Absolute level; `None` means `DEFAULT_ISO_FRACTION · diagonal`.
    pub iso: Option<f64>,
    pub vis_threshold: f64,
}

impl Default for MeshExtraction {
    fn default() -> Self {
        Self { resolution: 48, directions: 32, iso: None, vis_threshold: DEFAULT_VIS_THRESHOLD }
    }
}

/// `n` near-uniform unit directions on a Fibonacci spiral.
pub fn fibonacci_directions(n: usize) -> Vec<Vec3<f64>> {
    let golden = std::f64::consts::PI * (3.0 - 5f64.sqrt());
    (0..n)
        .map(|i| {
            let z = 1.0 - (2 * i + 1) as f64 / n as f64;
            let r = (1.0 - z * z).max(0.0).sqrt();
            let phi = golden * i as f64;
            Vec3::new(r * phi.cos(), r * phi.sin(), z).normalized().expect("unit")
        })
        .collect()
}

/// `u(x) = min_θ D̂(x, θ)` over visible directions, sampled on a `resolution³` lattice spanning
/// `bounds`. Points with no visible direction take the box diagonal as a finite cap.
pub fn proximity_grid(
    field: &dyn FieldEvaluator,
    bounds: &BoundingVolume<f64>,
    resolution: usize,
    directions: usize,
    vis_threshold: f64,
) -> Result<ScalarGrid> {
    if resolution < 8 || directions < 6 {
        return Err(invalid("mesh extraction needs resolution ≥ 8 and at least 6 directions"));
    }
    let dirs = fibonacci_directions(directions);
    let n = resolution;
    let extent = bounds.max - bounds.min;
    let spacing = extent * (1.0 / (n - 1) as f64);
    let cap = bounds.diagonal();
    let total = n * n * n;
    let mut values = Vec::with_capacity(total);
    let mut any_visible = false;
    for start in (0..total).step_by(POINTS_PER_CHUNK) {
        let end = (start + POINTS_PER_CHUNK).min(total);
        let mut rays = Vec::with_capacity((end - start) * dirs.len());
        for id in start..end {
            let (x, y, z) = (id % n, (id / n) % n, id / (n * n));
            let p = bounds.min + Vec3::new(x as f64 * spacing.x, y as f64 * spacing.y, z as f64 * spacing.z);
            rays.extend(dirs.iter().map(|&d| Ray { origin: p, direction: d }));
        }
        let vals = field.evaluate(&rays)?;
        for chunk in vals.chunks(dirs.len()) {
            let u = chunk.iter().filter(|v| v.is_visible(vis_threshold)).map(|v| v.depth).fold(f64::INFINITY, f64::min);
            any_visible |= u.is_finite();
            values.push(u.min(cap));
        }
    }
    if !any_visible {
        return Err(Error::EmptyField);
    }
    ScalarGrid::new([n; 3], bounds.min, spacing, values)
}

/// Marching cubes on the proximity grid at the level `iso` (a thin shell around the surface).
/// A level above the field's range yields a mesh with zero faces.
pub fn ddf_to_mesh(field: &dyn FieldEvaluator, bounds: &BoundingVolume<f64>, params: &MeshExtraction) -> Result<TriangleMesh<f64>> {
    let grid = proximity_grid(field, bounds, params.resolution, params.directions, params.vis_threshold)?;
    let iso = params.iso.unwrap_or(DEFAULT_ISO_FRACTION * bounds.diagonal());
    marching_cubes(&grid, iso)
}
