use std::fs;
use std::io::Write;
use std::path::Path;

use crate::error::{Error, Result};
use crate::geometry::TriangleMesh;
use crate::linalg::Vec3;

/// A parsed mesh and, when normalization was requested, the applied scale factor.
#[derive(Debug, Clone, PartialEq)]
pub struct LoadedMesh {
    pub mesh: TriangleMesh<f64>,
    pub scale: Option<f64>,
}

fn parse_err(line: usize, message: impl Into<String>) -> Error {
    Error::Parse { line, message: message.into() }
}

/// Parses `v` and `f` records; other record types are ignored. Face corners may carry
/// `/vt/vn` suffixes and negative (relative) indices. Polygons are fan-triangulated.
pub fn parse_obj(text: &str) -> Result<TriangleMesh<f64>> {
    let mut vertices = Vec::new();
    let mut faces = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let content = raw.split('#').next().unwrap_or("");
        let mut parts = content.split_whitespace();
        match parts.next() {
            Some("v") => {
                let c: Vec<f64> = parts
                    .take(3)
                    .map(|s| s.parse::<f64>().map_err(|_| parse_err(line, format!("bad vertex coordinate `{s}`"))))
                    .collect::<Result<_>>()?;
                if c.len() != 3 {
                    return Err(parse_err(line, "vertex needs three coordinates"));
                }
                let v = Vec3::new(c[0], c[1], c[2]);
                if !v.is_finite() {
                    return Err(parse_err(line, "vertex is not finite"));
                }
                vertices.push(v);
            }
            Some("f") => {
                let idx: Vec<usize> = parts
                    .map(|corner| {
                        let head = corner.split('/').next().unwrap_or("");
                        let k: i64 = head.parse().map_err(|_| parse_err(line, format!("bad face index `{corner}`")))?;
                        let n = vertices.len() as i64;
                        let resolved = match k {
                            0 => return Err(parse_err(line, "OBJ indices are 1-based")),
                            k if k > 0 => k - 1,
                            k => n + k,
                        };
                        if resolved < 0 || resolved >= n {
                            return Err(parse_err(line, format!("face index {k} out of range")));
                        }
                        Ok(resolved as usize)
                    })
                    .collect::<Result<_>>()?;
                if idx.len() < 3 {
                    return Err(parse_err(line, "face needs at least three vertices"));
                }
                for k in 1..idx.len() - 1 {
                    faces.push([idx[0], idx[k], idx[k + 1]]);
                }
            }
            _ => {}
        }
    }
    if faces.is_empty() {
        return Err(Error::InvalidMesh("OBJ file has no faces".into()));
    }
    TriangleMesh::new(vertices, faces)
}

/// Reads an OBJ file; with `normalize`, rescales and recenters it into `[-0.9, 0.9]³`.
pub fn load_mesh_obj(path: impl AsRef<Path>, normalize: bool) -> Result<LoadedMesh> {
    let mut mesh = parse_obj(&fs::read_to_string(path)?)?;
    let scale = normalize.then(|| mesh.normalize_to_cube(0.9));
    Ok(LoadedMesh { mesh, scale })
}

pub fn write_obj<W: Write>(w: &mut W, mesh: &TriangleMesh<f64>) -> Result<()> {
    for v in mesh.vertices() {
        writeln!(w, "v {} {} {}", v.x, v.y, v.z)?;
    }
    for f in mesh.faces() {
        writeln!(w, "f {} {} {}", f[0] + 1, f[1] + 1, f[2] + 1)?;
    }
    Ok(())
}

pub fn save_mesh_obj(path: impl AsRef<Path>, mesh: &TriangleMesh<f64>) -> Result<()> {
    let mut buf = Vec::new();
    write_obj(&mut buf, mesh)?;
    fs::write(path, buf)?;
    Ok(())
}
