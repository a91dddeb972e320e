use crate::error::{invalid, Result};
use crate::geometry::{build_bvh, cast_ray, TriangleMesh};
use crate::sampling::{streams, RayRng};
use crate::scalar::Real;

use super::camera::CameraPose;

/// Concatenated per-level features at one image location.
pub type FeatureVector<T> = Vec<T>;

/// One level: `height × width × channels`, stored row-major with channels innermost.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureGrid<T> {
    pub height: usize,
    pub width: usize,
    pub channels: usize,
    pub data: Vec<T>,
}

impl<T: Real> FeatureGrid<T> {
    pub fn new(height: usize, width: usize, channels: usize, data: Vec<T>) -> Result<Self> {
        if height == 0 || width == 0 || channels == 0 {
            return Err(invalid("feature grid dimensions must be positive"));
        }
        if data.len() != height * width * channels {
            return Err(invalid(format!("feature grid expects {} values, got {}", height * width * channels, data.len())));
        }
        if data.iter().any(|v| !v.is_finite()) {
            return Err(invalid("feature grid holds non-finite values"));
        }
        Ok(Self { height, width, channels, data })
    }

    pub fn constant(height: usize, width: usize, channels: usize, value: T) -> Self {
        Self { height, width, channels, data: vec![value; height * width * channels] }
    }

    #[inline]
    pub fn at(&self, row: usize, col: usize, ch: usize) -> T {
        self.data[(row * self.width + col) * self.channels + ch]
    }

    /// Bilinear interpolation with grid nodes at integer `(x = col, y = row)`; coordinates are
    /// clamped to the node range first.
    fn sample_into(&self, x: T, y: T, out: &mut Vec<T>) {
        let xmax = T::lit((self.width - 1) as f64);
        let ymax = T::lit((self.height - 1) as f64);
        let x = x.max(T::zero()).min(xmax);
        let y = y.max(T::zero()).min(ymax);
        let x0 = x.floor();
        let y0 = y.floor();
        let (tx, ty) = (x - x0, y - y0);
        let c0 = x0.to_usize().unwrap_or(0);
        let r0 = y0.to_usize().unwrap_or(0);
        let c1 = (c0 + 1).min(self.width - 1);
        let r1 = (r0 + 1).min(self.height - 1);
        for ch in 0..self.channels {
            let top = self.at(r0, c0, ch) * (T::one() - tx) + self.at(r0, c1, ch) * tx;
            let bottom = self.at(r1, c0, ch) * (T::one() - tx) + self.at(r1, c1, ch) * tx;
            out.push(top * (T::one() - ty) + bottom * ty);
        }
    }
}

/// Multi-resolution feature maps; level 0 is the finest and each next level halves the
/// resolution, rounding up.
#[derive(Debug, Clone, PartialEq)]
pub struct FeaturePyramid<T> {
    levels: Vec<FeatureGrid<T>>,
}

impl<T: Real> FeaturePyramid<T> {
    pub fn new(levels: Vec<FeatureGrid<T>>) -> Result<Self> {
        if levels.is_empty() {
            return Err(invalid("feature pyramid needs at least one level"));
        }
        for (l, pair) in levels.windows(2).enumerate() {
            let (a, b) = (&pair[0], &pair[1]);
            if b.width != a.width.div_ceil(2) || b.height != a.height.div_ceil(2) {
                return Err(invalid(format!("level {} is not half the resolution of level {l}", l + 1)));
            }
        }
        Ok(Self { levels })
    }

    pub fn levels(&self) -> &[FeatureGrid<T>] {
        &self.levels
    }

    /// Width and height of the finest level.
    pub fn size(&self) -> (usize, usize) {
        (self.levels[0].width, self.levels[0].height)
    }

    pub fn total_channels(&self) -> usize {
        self.levels.iter().map(|l| l.channels).sum()
    }
}

/// Samples every level at the finest-level pixel `point` and concatenates finest level first.
pub fn bilinear_sample<T: Real>(pyramid: &FeaturePyramid<T>, point: [T; 2]) -> FeatureVector<T> {
    let base = &pyramid.levels[0];
    let mut out = Vec::with_capacity(pyramid.total_channels());
    for level in &pyramid.levels {
        let sx = T::lit(level.width as f64 / base.width as f64);
        let sy = T::lit(level.height as f64 / base.height as f64);
        level.sample_into(point[0] * sx, point[1] * sy, &mut out);
    }
    out
}

/// Parameters of the deterministic stand-in for a learned image encoder.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SyntheticPyramidConfig {
    pub width: usize,
    pub height: usize,
    pub levels: usize,
    pub channels_per_level: usize,
    pub seed: u64,
}

impl Default for SyntheticPyramidConfig {
    fn default() -> Self {
        Self { width: 64, height: 64, levels: 5, channels_per_level: 4, seed: 0 }
    }
}

const NOISE_LATTICE: usize = 8;

/// Builds a pyramid whose channels per level are, in order: normalized column, normalized row,
/// the mesh silhouette seen by `camera` (1 inside, 0 outside), then seeded smooth value noise.
/// Fewer than three channels keeps the leading ones.
pub fn synthetic_pyramid<T: Real>(
    mesh: &TriangleMesh<T>,
    camera: &CameraPose<T>,
    config: &SyntheticPyramidConfig,
) -> Result<FeaturePyramid<T>> {
    if config.levels == 0 || config.channels_per_level == 0 || config.width == 0 || config.height == 0 {
        return Err(invalid("synthetic pyramid dimensions must be positive"));
    }
    let bvh = build_bvh(mesh)?;
    let mut rng = RayRng::new(config.seed, streams::PYRAMID_NOISE);
    let (w0, h0) = (config.width, config.height);
    let (mut w, mut h) = (w0, h0);
    let mut levels = Vec::with_capacity(config.levels);
    for _ in 0..config.levels {
        let noise_channels = config.channels_per_level.saturating_sub(3);
        let lattices: Vec<Vec<f64>> = (0..noise_channels)
            .map(|_| (0..NOISE_LATTICE * NOISE_LATTICE).map(|_| rng.uniform_range(-1.0, 1.0)).collect())
            .collect();
        let mut data = Vec::with_capacity(w * h * config.channels_per_level);
        for row in 0..h {
            for col in 0..w {
                // Finest-level pixel this node sits on.
                let u = col as f64 * w0 as f64 / w as f64;
                let v = row as f64 * h0 as f64 / h as f64;
                let mut feats = vec![col as f64 / w as f64, row as f64 / h as f64];
                if config.channels_per_level > 2 {
                    let ray = camera.pixel_ray(T::lit(u), T::lit(v));
                    let hit = cast_ray(&bvh, mesh, ray.origin, ray.direction)?;
                    feats.push(if hit.is_some() { 1.0 } else { 0.0 });
                }
                for lat in &lattices {
                    feats.push(value_noise(lat, u / w0 as f64, v / h0 as f64));
                }
                data.extend(feats.into_iter().take(config.channels_per_level).map(T::lit));
            }
        }
        levels.push(FeatureGrid::new(h, w, config.channels_per_level, data)?);
        w = w.div_ceil(2);
        h = h.div_ceil(2);
    }
    FeaturePyramid::new(levels)
}

fn value_noise(lattice: &[f64], s: f64, t: f64) -> f64 {
    let n = NOISE_LATTICE;
    let x = s.clamp(0.0, 1.0) * (n - 1) as f64;
    let y = t.clamp(0.0, 1.0) * (n - 1) as f64;
    let (i, j) = ((x.floor() as usize).min(n - 2), (y.floor() as usize).min(n - 2));
    let (fx, fy) = (x - i as f64, y - j as f64);
    let g = |a: usize, b: usize| lattice[b * n + a];
    let top = g(i, j) * (1.0 - fx) + g(i + 1, j) * fx;
    let bot = g(i, j + 1) * (1.0 - fx) + g(i + 1, j + 1) * fx;
    top * (1.0 - fy) + bot * fy
}
