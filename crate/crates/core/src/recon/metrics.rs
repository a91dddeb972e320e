use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::kdtree::KdTree;
use super::pointcloud::PointCloud;
use crate::error::{invalid, Result};
use crate::linalg::Vec3;

pub const CD_CONVENTION: &str = "mean-squared-sum";
pub const CD_UNITS: &str = "mm2";

fn check(a: &PointCloud<f64>, b: &PointCloud<f64>) -> Result<()> {
    if a.is_empty() || b.is_empty() {
        return Err(invalid("point clouds must be non-empty"));
    }
    Ok(())
}

/// Squared distances (mm²) from every point of `from` to its nearest point of `to`, in order.
fn nn_sq(from: &[Vec3<f64>], to: &[Vec3<f64>]) -> Vec<f64> {
    let tree = KdTree::new(to);
    from.par_iter().map(|&p| tree.nearest(p).expect("non-empty").1).collect()
}

/// `mean_a min_b |a−b|² + mean_b min_a |a−b|²`, in mm².
pub fn chamfer_distance(a: &PointCloud<f64>, b: &PointCloud<f64>) -> Result<f64> {
    check(a, b)?;
    if a.mm_per_unit() != b.mm_per_unit() {
        return Err(invalid("point clouds must share a scale"));
    }
    let (pa, pb) = (a.points_mm(), b.points_mm());
    let mean = |v: Vec<f64>| v.iter().sum::<f64>() / v.len() as f64;
    Ok(mean(nn_sq(&pa, &pb)) + mean(nn_sq(&pb, &pa)))
}

/// Harmonic mean of precision (`a` within `tau_mm` of `b`) and recall (`b` within `tau_mm` of `a`).
pub fn f_score(a: &PointCloud<f64>, b: &PointCloud<f64>, tau_mm: f64) -> Result<f64> {
    check(a, b)?;
    if !(tau_mm > 0.0) {
        return Err(invalid("F-score threshold must be positive"));
    }
    let (pa, pb) = (a.points_mm(), b.points_mm());
    Ok(f_from(&nn_sq(&pa, &pb), &nn_sq(&pb, &pa), tau_mm))
}

fn f_from(ab: &[f64], ba: &[f64], tau: f64) -> f64 {
    let frac = |v: &[f64]| v.iter().filter(|&&d| d.sqrt() <= tau).count() as f64 / v.len() as f64;
    let (p, r) = (frac(ab), frac(ba));
    if p + r == 0.0 {
        0.0
    } else {
        2.0 * p * r / (p + r)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub f5: f64,
    pub f10: f64,
    pub cd: f64,
    pub convention: String,
    pub units: String,
    pub n_pred: usize,
    pub n_gt: usize,
}

/// F-5, F-10 (mm) and Chamfer distance of a predicted cloud against ground truth.
pub fn evaluate_clouds(pred: &PointCloud<f64>, gt: &PointCloud<f64>) -> Result<MetricsReport> {
    check(pred, gt)?;
    let (pa, pb) = (pred.points_mm(), gt.points_mm());
    let (ab, ba) = (nn_sq(&pa, &pb), nn_sq(&pb, &pa));
    let mean = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;
    Ok(MetricsReport {
        f5: f_from(&ab, &ba, 5.0),
        f10: f_from(&ab, &ba, 10.0),
        cd: mean(&ab) + mean(&ba),
        convention: CD_CONVENTION.into(),
        units: CD_UNITS.into(),
        n_pred: pred.len(),
        n_gt: gt.len(),
    })
}
