use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use super::binary::{magic, Reader};
use crate::error::{Error, Result};
use crate::projection::{FeatureGrid, FeaturePyramid};

pub const PYRAMID_MAGIC: &[u8; 4] = b"DDFP";
const PYRAMID_VERSION: u16 = 1;

/// `DDFP`, u16 version, u16 level count, then per level u32 height, width, channels and the
/// HWC `f32` data.
pub fn write_pyramid<W: Write>(w: &mut W, pyramid: &FeaturePyramid<f64>) -> Result<()> {
    w.write_all(PYRAMID_MAGIC)?;
    w.write_all(&PYRAMID_VERSION.to_le_bytes())?;
    w.write_all(&(pyramid.levels().len() as u16).to_le_bytes())?;
    for l in pyramid.levels() {
        for d in [l.height, l.width, l.channels] {
            w.write_all(&(d as u32).to_le_bytes())?;
        }
        for &v in &l.data {
            w.write_all(&(v as f32).to_le_bytes())?;
        }
    }
    Ok(())
}

pub fn read_pyramid<R: Read>(r: R) -> Result<FeaturePyramid<f64>> {
    let mut r = Reader::new(r);
    magic(&mut r, PYRAMID_MAGIC)?;
    let version = r.u16("version")?;
    if version != PYRAMID_VERSION {
        return Err(Error::Format(format!("unsupported version {version}")));
    }
    let n = r.u16("level count")?;
    let mut levels = Vec::with_capacity(n as usize);
    for i in 0..n {
        let (h, w, c) = (r.u32("level height")? as usize, r.u32("level width")? as usize, r.u32("level channels")? as usize);
        let len = h.checked_mul(w).and_then(|x| x.checked_mul(c)).ok_or_else(|| Error::Format(format!("level {i} is too large")))?;
        let data = (0..len).map(|_| r.f32("level data").map(f64::from)).collect::<Result<Vec<_>>>()?;
        levels.push(FeatureGrid::new(h, w, c, data).map_err(|e| Error::Format(format!("level {i}: {e}")))?);
    }
    r.finish()?;
    FeaturePyramid::new(levels)
}

pub fn save_pyramid(path: impl AsRef<Path>, pyramid: &FeaturePyramid<f64>) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    write_pyramid(&mut w, pyramid)?;
    w.flush()?;
    Ok(())
}

pub fn load_pyramid(path: impl AsRef<Path>) -> Result<FeaturePyramid<f64>> {
    read_pyramid(BufReader::new(File::open(path)?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::TriangleMesh;
    use crate::projection::{synthetic_pyramid, CameraPose, SyntheticPyramidConfig};

    #[test]
    fn round_trip_is_exact_for_f32_values() {
        let mesh = TriangleMesh::<f64>::cube(0.5);
        let cfg = SyntheticPyramidConfig { width: 16, height: 16, levels: 3, ..Default::default() };
        let p = synthetic_pyramid(&mesh, &CameraPose::framing_unit_cube(16), &cfg).unwrap();
        let mut buf = Vec::new();
        write_pyramid(&mut buf, &p).unwrap();
        let back = read_pyramid(buf.as_slice()).unwrap();
        for (a, b) in back.levels().iter().zip(p.levels()) {
            assert_eq!((a.height, a.width, a.channels), (b.height, b.width, b.channels));
            assert!(a.data.iter().zip(&b.data).all(|(x, y)| *x == (*y as f32) as f64));
        }
        assert!(read_pyramid(&buf[..buf.len() - 2]).is_err());
    }
}
