use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use super::binary::{magic, Reader};
use crate::error::{Error, Result};
use crate::linalg::Vec3;
use crate::sampling::{DdfSample, Ray};

pub const RAYS_MAGIC: &[u8; 4] = b"DDFR";
pub const RAYS_VERSION: u16 = 1;

const FLAG_GROUND_TRUTH: u16 = 1;
const FLAG_PAIRED: u16 = 2;
const UNIT_TOLERANCE: f64 = 1e-6;

/// Rays with optional ground truth. When `paired`, records `2i` and `2i + 1` form a symmetry
/// pair.
#[derive(Debug, Clone, PartialEq)]
pub struct RayDataset {
    pub rays: Vec<Ray<f64>>,
    /// Per-ray depth (`None` for a miss) when the file carries ground truth.
    pub depths: Option<Vec<Option<f64>>>,
    pub paired: bool,
}

impl RayDataset {
    pub fn rays_only(rays: Vec<Ray<f64>>, paired: bool) -> Self {
        Self { rays, depths: None, paired }
    }

    pub fn from_samples(samples: &[DdfSample<f64>]) -> Self {
        Self { rays: samples.iter().map(|s| s.ray).collect(), depths: Some(samples.iter().map(|s| s.depth).collect()), paired: false }
    }

    pub fn samples(&self) -> Option<Vec<DdfSample<f64>>> {
        let depths = self.depths.as_ref()?;
        Some(self.rays.iter().zip(depths).map(|(&ray, &depth)| DdfSample { ray, depth }).collect())
    }

    pub fn len(&self) -> usize {
        self.rays.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rays.is_empty()
    }
}

pub fn write_ray_dataset<W: Write>(w: &mut W, data: &RayDataset) -> Result<()> {
    if let Some(d) = &data.depths {
        if d.len() != data.rays.len() {
            return Err(Error::DimensionMismatch("one depth entry per ray is required".into()));
        }
    }
    if data.paired && data.rays.len() % 2 != 0 {
        return Err(Error::InvalidArgument("a paired dataset needs an even ray count".into()));
    }
    let mut flags = 0;
    if data.depths.is_some() {
        flags |= FLAG_GROUND_TRUTH;
    }
    if data.paired {
        flags |= FLAG_PAIRED;
    }
    w.write_all(RAYS_MAGIC)?;
    w.write_all(&RAYS_VERSION.to_le_bytes())?;
    w.write_all(&(data.rays.len() as u64).to_le_bytes())?;
    w.write_all(&flags.to_le_bytes())?;
    for (i, r) in data.rays.iter().enumerate() {
        for v in r.origin.to_array().into_iter().chain(r.direction.to_array()) {
            w.write_all(&(v as f32).to_le_bytes())?;
        }
        let depth = data.depths.as_ref().and_then(|d| d[i]);
        w.write_all(&[u8::from(depth.is_some())])?;
        w.write_all(&depth.map_or(f32::NAN, |d| d as f32).to_le_bytes())?;
    }
    Ok(())
}

pub fn read_ray_dataset<R: Read>(r: R) -> Result<RayDataset> {
    let mut r = Reader::new(r);
    magic(&mut r, RAYS_MAGIC)?;
    let version = r.u16("version")?;
    if version != RAYS_VERSION {
        return Err(Error::Format(format!("unsupported version {version}")));
    }
    let count = r.u64("ray count")? as usize;
    let flags = r.u16("flags")?;
    if flags & !(FLAG_GROUND_TRUTH | FLAG_PAIRED) != 0 {
        return Err(Error::Format(format!("unknown flags {flags:#x}")));
    }
    let has_gt = flags & FLAG_GROUND_TRUTH != 0;
    let paired = flags & FLAG_PAIRED != 0;
    if paired && count % 2 != 0 {
        return Err(Error::Format("paired dataset has an odd ray count".into()));
    }
    let mut rays = Vec::with_capacity(count.min(1 << 24));
    let mut depths = Vec::with_capacity(if has_gt { count.min(1 << 24) } else { 0 });
    for i in 0..count {
        let mut v = [0f64; 6];
        for x in &mut v {
            *x = r.f32("ray record")? as f64;
        }
        let xi = r.u8("xi")?;
        let depth = r.f32("depth")?;
        let origin = Vec3::new(v[0], v[1], v[2]);
        let dir = Vec3::new(v[3], v[4], v[5]);
        if !origin.is_finite() {
            return Err(Error::Format(format!("record {i}: origin is not finite")));
        }
        if !dir.is_finite() || (dir.norm() - 1.0).abs() > UNIT_TOLERANCE {
            return Err(Error::Format(format!("record {i}: direction is not unit-norm")));
        }
        rays.push(Ray::normalized(origin, dir)?);
        if has_gt {
            match xi {
                1 if depth.is_finite() && depth >= 0.0 => depths.push(Some(depth as f64)),
                0 if depth.is_nan() => depths.push(None),
                0 | 1 => return Err(Error::Format(format!("record {i}: depth inconsistent with xi"))),
                _ => return Err(Error::Format(format!("record {i}: xi must be 0 or 1"))),
            }
        }
    }
    r.finish()?;
    Ok(RayDataset { rays, depths: has_gt.then_some(depths), paired })
}

pub fn save_ray_dataset(path: impl AsRef<Path>, data: &RayDataset) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    write_ray_dataset(&mut w, data)?;
    w.flush()?;
    Ok(())
}

pub fn load_ray_dataset(path: impl AsRef<Path>) -> Result<RayDataset> {
    read_ray_dataset(BufReader::new(File::open(path)?))
}
