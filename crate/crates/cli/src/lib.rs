//! The `ddf` command line: generate ground truth, fit a conditional DDF, evaluate and convert
//! fields.
//!
//! Exit codes: 0 success, 1 usage error, 2 data error.

use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use ddf_core::io::{self, PlyFormat, RayDataset, RunConfig};
use ddf_core::linalg::Vec3;
use ddf_core::projection::{synthetic_pyramid, SyntheticPyramidConfig};
use ddf_core::recon::{ddf_to_mesh, ddf_to_pointcloud, evaluate_clouds, FieldEvaluator, MeshExtraction, MeshField, NetworkField, PointCloud, SphereField, DEFAULT_VIS_THRESHOLD};
use ddf_core::sampling::{
    generate_ground_truth, make_symmetry_pairs, sample_rays_surface_biased, sample_rays_uniform, sample_rays_uniform_on, streams, BoundingVolume,
    SymmetryPlane,
};
use serde_json::json;

#[derive(Parser)]
#[command(name = "ddf", version, about = "Directed distance field toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Sample rays in a box, optionally with symmetry pairs.
    GenRays {
        #[arg(long, default_value_t = 20000)]
        n: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// min x,y,z then max x,y,z
        #[arg(long, value_parser = six, default_value = "-1,-1,-1,1,1,1")]
        bounds: [f64; 6],
        /// Put half of the origins within `--band` of this mesh's surface.
        #[arg(long)]
        surface_mesh: Option<PathBuf>,
        #[arg(long, default_value_t = 0.1)]
        band: f64,
        /// Symmetry plane as point x,y,z then normal x,y,z.
        #[arg(long, value_parser = six)]
        plane: Option<[f64; 6]>,
        #[arg(long, default_value_t = 0, requires_all = ["plane", "pairs_out"])]
        pairs: usize,
        #[arg(long)]
        pairs_out: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Cast rays against a mesh and store visibility and depth.
    GenGt {
        #[arg(long)]
        mesh: PathBuf,
        #[arg(long)]
        rays: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Scale and center the mesh into [-0.9, 0.9]^3 first.
        #[arg(long)]
        normalize: bool,
    },
    /// Build the synthetic feature pyramid for a mesh seen by a camera.
    MakePyramid {
        #[arg(long)]
        mesh: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Take the camera (and image size) from a run config.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long, default_value_t = 5)]
        levels: usize,
        #[arg(long, default_value_t = 4)]
        channels: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Train a network from a run config.
    Fit {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Per-epoch loss log (JSON).
        #[arg(long)]
        log: Option<PathBuf>,
        /// Overrides the config and DDF_SEED.
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        threads: Option<usize>,
        #[arg(long)]
        quiet: bool,
    },
    /// F-5, F-10 and Chamfer distance between two clouds or fields, as JSON.
    Eval {
        /// A .ply cloud, a .ddfn checkpoint or a .obj mesh.
        #[arg(long)]
        pred: PathBuf,
        /// A .ply cloud or a .obj mesh.
        #[arg(long)]
        gt: PathBuf,
        #[command(flatten)]
        field: FieldArgs,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Turn a field into a point cloud (.ply) or a mesh (.obj).
    Convert {
        /// A .ddfn checkpoint, a .obj mesh, or `sphere` for the unit sphere.
        #[arg(long)]
        field: String,
        #[arg(long)]
        out: PathBuf,
        #[command(flatten)]
        sampling: FieldArgs,
        #[arg(long, default_value_t = 48)]
        resolution: usize,
        #[arg(long, default_value_t = 32)]
        directions: usize,
        #[arg(long)]
        iso: Option<f64>,
        #[arg(long)]
        ascii: bool,
    },
    /// Compare reverse-mode gradients with central differences.
    Gradcheck {
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 16)]
        width: usize,
        #[arg(long, default_value_t = 8)]
        samples: usize,
        #[arg(long, default_value_t = 1e-4)]
        h: f64,
        #[arg(long, default_value_t = 1e-3)]
        tolerance: f64,
    },
}

/// How a field is turned into a cloud.
#[derive(clap::Args)]
struct FieldArgs {
    #[arg(long, default_value_t = 10000)]
    rays: usize,
    #[arg(long, default_value_t = 0)]
    eval_seed: u64,
    /// Defaults to the checkpoint's bounds, else the unit cube.
    #[arg(long, value_parser = six)]
    bounds: Option<[f64; 6]>,
    /// Millimeters per coordinate unit, for field clouds and to override PLY files.
    #[arg(long)]
    mm_per_unit: Option<f64>,
    #[arg(long, default_value_t = DEFAULT_VIS_THRESHOLD)]
    vis_threshold: f64,
}

fn six(s: &str) -> Result<[f64; 6], String> {
    let v: Vec<f64> = s.split(',').map(|x| x.trim().parse::<f64>().map_err(|e| format!("{x:?}: {e}"))).collect::<Result<_, _>>()?;
    v.try_into().map_err(|v: Vec<f64>| format!("expected 6 comma-separated numbers, got {}", v.len()))
}

fn bounds_of(b: [f64; 6]) -> ddf_core::Result<BoundingVolume<f64>> {
    BoundingVolume::new(Vec3::new(b[0], b[1], b[2]), Vec3::new(b[3], b[4], b[5]))
}

/// Field clouds default to meters on disk, hence 1000 mm per unit.
const FIELD_MM_PER_UNIT: f64 = 1000.0;

/// Parses `args` (program name first), runs the command and returns the exit code.
pub fn run_from<I, T>(args: I) -> u8
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 1 } else { 0 };
        }
    };
    match run(cli.command) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            2
        }
    }
}

fn run(cmd: Command) -> ddf_core::Result<()> {
    match cmd {
        Command::GenRays { n, seed, bounds, surface_mesh, band, plane, pairs, pairs_out, out } => {
            let b = bounds_of(bounds)?;
            let rays = match surface_mesh {
                Some(m) => sample_rays_surface_biased(&io::load_mesh_obj(m, false)?.mesh, &b, n, band, seed)?,
                None => sample_rays_uniform(&b, n, seed)?,
            };
            io::save_ray_dataset(&out, &RayDataset::rays_only(rays, false))?;
            if let (Some(p), Some(path)) = (plane, pairs_out) {
                let plane = SymmetryPlane::new(Vec3::new(p[0], p[1], p[2]), Vec3::new(p[3], p[4], p[5]))?;
                let pairs = make_symmetry_pairs(&plane, &b, pairs, seed)?;
                let rays = pairs.iter().flat_map(|p| [p.ray_a, p.ray_b]).collect();
                io::save_ray_dataset(path, &RayDataset::rays_only(rays, true))?;
            }
            Ok(())
        }
        Command::GenGt { mesh, rays, out, normalize } => {
            let loaded = io::load_mesh_obj(mesh, normalize)?;
            if let Some(s) = loaded.scale {
                eprintln!("normalized mesh by scale {s}");
            }
            let ds = io::load_ray_dataset(rays)?;
            let samples = generate_ground_truth(&loaded.mesh, &ds.rays)?;
            let mut gt = RayDataset::from_samples(&samples);
            gt.paired = ds.paired;
            let hits = samples.iter().filter(|s| s.xi()).count();
            eprintln!("{hits} of {} rays hit", samples.len());
            io::save_ray_dataset(out, &gt)
        }
        Command::MakePyramid { mesh, out, config, levels, channels, seed } => {
            let mesh = io::load_mesh_obj(mesh, false)?.mesh;
            let camera = match &config {
                Some(c) => RunConfig::load(c)?.camera,
                None => io::CameraConfig::default(),
            };
            let size = camera.image_size;
            let cfg = SyntheticPyramidConfig { width: size, height: size, levels, channels_per_level: channels, seed };
            io::save_pyramid(out, &synthetic_pyramid(&mesh, &camera.pose()?, &cfg)?)
        }
        Command::Fit { config, out, log, seed, threads, quiet } => {
            let mut cfg = RunConfig::load(&config)?;
            cfg.apply_seed_overrides(seed)?;
            if let Some(t) = threads {
                cfg.threads = t;
            }
            cfg.validate()?;
            let fitted = io::fit(&cfg, |e| {
                if !quiet {
                    eprintln!("epoch {:>4}  total {:.6}  depth {:.6}  vis {:.6}  sym {:.6}", e.epoch, e.total, e.l_depth, e.l_vis, e.l_sym);
                }
            })?;
            io::save_checkpoint(&out, &fitted.network, &json!({ "config": cfg, "channels": fitted.pipeline.channels() }))?;
            if let Some(l) = log {
                std::fs::write(l, serde_json::to_string_pretty(&fitted.log)?)?;
            }
            Ok(())
        }
        Command::Eval { pred, gt, field, out } => {
            let pred = cloud_from(&pred, &field)?;
            let gt = cloud_from(&gt, &field)?;
            let report = evaluate_clouds(&pred, &gt)?;
            let text = serde_json::to_string_pretty(&report)?;
            match out {
                Some(p) => std::fs::write(p, text)?,
                None => println!("{text}"),
            }
            Ok(())
        }
        Command::Convert { field, out, sampling, resolution, directions, iso, ascii } => {
            let (f, bounds) = open_field(Path::new(&field), &sampling)?;
            match out.extension().and_then(|e| e.to_str()) {
                Some("ply") => {
                    let rays = sample_rays_uniform_on(&bounds, sampling.rays, sampling.eval_seed, streams::EVAL)?;
                    let cloud = ddf_to_pointcloud(f.as_ref(), &rays, sampling.vis_threshold, sampling.mm_per_unit.unwrap_or(FIELD_MM_PER_UNIT))?;
                    io::save_ply(out, &cloud, if ascii { PlyFormat::Ascii } else { PlyFormat::BinaryLittleEndian })
                }
                Some("obj") => {
                    let params = MeshExtraction { resolution, directions, iso, vis_threshold: sampling.vis_threshold };
                    let mesh = ddf_to_mesh(f.as_ref(), &bounds, &params)?;
                    eprintln!("{} vertices, {} faces", mesh.vertices().len(), mesh.face_count());
                    io::save_mesh_obj(out, &mesh)
                }
                _ => Err(ddf_core::Error::InvalidArgument("output must end in .ply or .obj".into())),
            }
        }
        Command::Gradcheck { seed, width, samples, h, tolerance } => {
            let report = io::sphere_gradcheck(seed, width, samples, h)?;
            println!("{}", serde_json::to_string_pretty(&report)?);
            if report.max_rel_error > tolerance {
                return Err(ddf_core::Error::InvalidArgument(format!(
                    "max relative error {:.3e} exceeds {tolerance:.1e}",
                    report.max_rel_error
                )));
            }
            Ok(())
        }
    }
}

fn ext(p: &Path) -> &str {
    p.extension().and_then(|e| e.to_str()).unwrap_or("")
}

fn cloud_from(path: &Path, args: &FieldArgs) -> ddf_core::Result<PointCloud<f64>> {
    if ext(path) == "ply" {
        let c = io::load_ply(path)?;
        return match args.mm_per_unit {
            Some(s) => PointCloud::new(c.points().to_vec(), s),
            None => Ok(c),
        };
    }
    let (f, bounds) = open_field(path, args)?;
    let rays = sample_rays_uniform_on(&bounds, args.rays, args.eval_seed, streams::EVAL)?;
    ddf_to_pointcloud(f.as_ref(), &rays, args.vis_threshold, args.mm_per_unit.unwrap_or(FIELD_MM_PER_UNIT))
}

/// A field plus the box its rays should come from.
fn open_field(path: &Path, args: &FieldArgs) -> ddf_core::Result<(Box<dyn FieldEvaluator>, BoundingVolume<f64>)> {
    let explicit = args.bounds.map(bounds_of).transpose()?;
    let unit = BoundingVolume::unit_cube();
    if path.as_os_str() == "sphere" {
        return Ok((Box::new(SphereField { center: Vec3::zero(), radius: 1.0 }), explicit.unwrap_or(unit)));
    }
    match ext(path) {
        "obj" => Ok((Box::new(MeshField::new(io::load_mesh_obj(path, false)?.mesh)?), explicit.unwrap_or(unit))),
        "ddfn" => {
            let (net, run) = io::load_checkpoint(path)?;
            let cfg: RunConfig = serde_json::from_value(run.get("config").cloned().unwrap_or_default())
                .map_err(|e| ddf_core::Error::Format(format!("checkpoint config: {e}")))?;
            let pipeline = io::build_pipeline(&cfg, None)?;
            let bounds = match explicit {
                Some(b) => b,
                None => cfg.bounds()?,
            };
            Ok((Box::new(NetworkField::new(net, pipeline)), bounds))
        }
        other => Err(ddf_core::Error::InvalidArgument(format!("unsupported field file extension {other:?}"))),
    }
}
