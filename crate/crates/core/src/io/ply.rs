use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::linalg::Vec3;
use crate::recon::PointCloud;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PlyFormat {
    Ascii,
    BinaryLittleEndian,
}

/// Writes vertices as `float` x, y, z; the cloud scale travels in a `comment mm_per_unit` line.
pub fn write_ply<W: Write>(w: &mut W, cloud: &PointCloud<f64>, format: PlyFormat) -> Result<()> {
    let fmt = match format {
        PlyFormat::Ascii => "ascii",
        PlyFormat::BinaryLittleEndian => "binary_little_endian",
    };
    write!(
        w,
        "ply\nformat {fmt} 1.0\ncomment mm_per_unit {}\nelement vertex {}\nproperty float x\nproperty float y\nproperty float z\nend_header\n",
        cloud.mm_per_unit(),
        cloud.len()
    )?;
    for p in cloud.points() {
        let c = [p.x as f32, p.y as f32, p.z as f32];
        match format {
            PlyFormat::Ascii => writeln!(w, "{} {} {}", c[0], c[1], c[2])?,
            PlyFormat::BinaryLittleEndian => {
                for v in c {
                    w.write_all(&v.to_le_bytes())?;
                }
            }
        }
    }
    Ok(())
}

fn type_size(t: &str) -> Option<usize> {
    Some(match t {
        "char" | "uchar" | "int8" | "uint8" => 1,
        "short" | "ushort" | "int16" | "uint16" => 2,
        "int" | "uint" | "int32" | "uint32" | "float" | "float32" => 4,
        "double" | "float64" => 8,
        _ => return None,
    })
}

fn decode(t: &str, b: &[u8]) -> f64 {
    match t {
        "char" | "int8" => b[0] as i8 as f64,
        "uchar" | "uint8" => b[0] as f64,
        "short" | "int16" => i16::from_le_bytes([b[0], b[1]]) as f64,
        "ushort" | "uint16" => u16::from_le_bytes([b[0], b[1]]) as f64,
        "int" | "int32" => i32::from_le_bytes(b[..4].try_into().unwrap()) as f64,
        "uint" | "uint32" => u32::from_le_bytes(b[..4].try_into().unwrap()) as f64,
        "float" | "float32" => f32::from_le_bytes(b[..4].try_into().unwrap()) as f64,
        _ => f64::from_le_bytes(b[..8].try_into().unwrap()),
    }
}

/// Reads the vertex element (x, y, z plus any other scalar properties) of an ASCII or
/// little-endian binary PLY. The vertex element must come first.
pub fn read_ply<R: Read>(r: R) -> Result<PointCloud<f64>> {
    let mut r = BufReader::new(r);
    let mut line = String::new();
    let mut header = Vec::new();
    loop {
        line.clear();
        if r.read_line(&mut line)? == 0 {
            return Err(Error::Format("PLY header is not terminated".into()));
        }
        let l = line.trim().to_string();
        if l == "end_header" {
            break;
        }
        header.push(l);
    }
    if header.first().map(String::as_str) != Some("ply") {
        return Err(Error::Format("missing `ply` magic line".into()));
    }
    let mut format = None;
    let mut scale = 1.0;
    let mut count = None;
    let mut props: Vec<(String, String)> = Vec::new();
    let mut in_vertex = false;
    for l in &header[1..] {
        let f: Vec<&str> = l.split_whitespace().collect();
        match f.as_slice() {
            ["format", "ascii", _] => format = Some(PlyFormat::Ascii),
            ["format", "binary_little_endian", _] => format = Some(PlyFormat::BinaryLittleEndian),
            ["format", other, ..] => return Err(Error::Format(format!("unsupported PLY format `{other}`"))),
            ["comment", "mm_per_unit", v] => scale = v.parse().map_err(|_| Error::Format("bad mm_per_unit comment".into()))?,
            ["element", "vertex", n] => {
                if count.is_some() || !props.is_empty() {
                    return Err(Error::Format("vertex element must come first".into()));
                }
                count = Some(n.parse::<usize>().map_err(|_| Error::Format("bad vertex count".into()))?);
                in_vertex = true;
            }
            ["element", ..] => {
                if count.is_none() {
                    return Err(Error::Format("vertex element must come first".into()));
                }
                in_vertex = false;
            }
            ["property", "list", ..] if in_vertex => return Err(Error::Format("list properties on vertices are not supported".into())),
            ["property", t, name] if in_vertex => {
                if type_size(t).is_none() {
                    return Err(Error::Format(format!("unknown property type `{t}`")));
                }
                props.push((t.to_string(), name.to_string()));
            }
            _ => {}
        }
    }
    let format = format.ok_or_else(|| Error::Format("missing format line".into()))?;
    let count = count.ok_or_else(|| Error::Format("missing vertex element".into()))?;
    let pos = |n: &str| props.iter().position(|(_, p)| p == n).ok_or_else(|| Error::Format(format!("missing vertex property {n}")));
    let (ix, iy, iz) = (pos("x")?, pos("y")?, pos("z")?);
    let mut points = Vec::with_capacity(count.min(1 << 24));
    match format {
        PlyFormat::Ascii => {
            for i in 0..count {
                line.clear();
                if r.read_line(&mut line)? == 0 {
                    return Err(Error::Format(format!("truncated PLY at vertex {i}")));
                }
                // Parse at the declared width so f32 values come back bit-exact.
                let vals: Vec<f64> = line
                    .split_whitespace()
                    .zip(&props)
                    .map(|(s, (t, _))| {
                        let v = if matches!(t.as_str(), "float" | "float32") { s.parse::<f32>().map(f64::from) } else { s.parse::<f64>() };
                        v.map_err(|_| Error::Format(format!("vertex {i}: bad value `{s}`")))
                    })
                    .collect::<Result<_>>()?;
                if vals.len() < props.len() {
                    return Err(Error::Format(format!("vertex {i}: expected {} values", props.len())));
                }
                points.push(Vec3::new(vals[ix], vals[iy], vals[iz]));
            }
        }
        PlyFormat::BinaryLittleEndian => {
            let stride: usize = props.iter().map(|(t, _)| type_size(t).unwrap()).sum();
            let mut buf = vec![0u8; stride];
            for i in 0..count {
                r.read_exact(&mut buf).map_err(|_| Error::Format(format!("truncated PLY at vertex {i}")))?;
                let mut vals = Vec::with_capacity(props.len());
                let mut o = 0;
                for (t, _) in &props {
                    let s = type_size(t).unwrap();
                    vals.push(decode(t, &buf[o..o + s]));
                    o += s;
                }
                points.push(Vec3::new(vals[ix], vals[iy], vals[iz]));
            }
        }
    }
    PointCloud::new(points, scale)
}

pub fn save_ply(path: impl AsRef<Path>, cloud: &PointCloud<f64>, format: PlyFormat) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    write_ply(&mut w, cloud, format)?;
    w.flush()?;
    Ok(())
}

pub fn load_ply(path: impl AsRef<Path>) -> Result<PointCloud<f64>> {
    read_ply(File::open(path)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cloud() -> PointCloud<f64> {
        PointCloud::new(vec![Vec3::new(0.5, -1.25, 3.0), Vec3::new(1e-3, 2.0, -0.75)], 2.5).unwrap()
    }

    #[test]
    fn round_trips_both_encodings() {
        for f in [PlyFormat::Ascii, PlyFormat::BinaryLittleEndian] {
            let mut buf = Vec::new();
            write_ply(&mut buf, &cloud(), f).unwrap();
            let back = read_ply(buf.as_slice()).unwrap();
            assert_eq!(back.mm_per_unit(), 2.5);
            for (a, b) in back.points().iter().zip(cloud().points()) {
                assert!(a.distance(*b) < 1e-6);
            }
        }
    }

    #[test]
    fn reads_foreign_layouts() {
        let mut buf = b"ply\nformat binary_little_endian 1.0\nelement vertex 1\nproperty double x\nproperty uchar red\nproperty double y\nproperty double z\nelement face 0\nproperty list uchar int vertex_indices\nend_header\n".to_vec();
        for v in [1.0f64] {
            buf.extend(v.to_le_bytes());
        }
        buf.push(255);
        buf.extend(2.0f64.to_le_bytes());
        buf.extend(3.0f64.to_le_bytes());
        let c = read_ply(buf.as_slice()).unwrap();
        assert_eq!(c.points(), &[Vec3::new(1.0, 2.0, 3.0)]);
        assert!(read_ply(&b"ply\nformat ascii 1.0\nelement vertex 2\nproperty float x\nend_header\n"[..]).is_err());
    }
}
