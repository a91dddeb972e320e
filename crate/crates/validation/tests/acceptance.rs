//! Acceptance suite: one PASS/FAIL line per criterion, exit status 1 if any fails.
//!
//! Runs as a plain binary (`harness = false`) so the lines are printed in order and uncaptured.

use std::path::Path;
use std::time::Instant;

use ddf_core::geometry::{brute_force_cast, build_bvh, cast_ray, TriangleMesh};
use ddf_core::hand::{geodesic_knn, global_hand_embedding, hand_features, ray_skeleton_closest, HandSkeleton};
use ddf_core::io::{pair_examples, save_ray_dataset, sphere_gradcheck, training_examples, RayDataset};
use ddf_core::linalg::Vec3;
use ddf_core::nn::{aggregate_2d, train, AttentionBlock, DdfNetwork, FeaturePipeline, TrainConfig};
use ddf_core::projection::{synthetic_pyramid, CameraPose, SyntheticPyramidConfig, DEFAULT_SPACING};
use ddf_core::recon::{chamfer_distance, ddf_to_pointcloud, f_score, FieldEvaluator, NetworkField, PointCloud, SphereField};
use ddf_core::sampling::{
    generate_ground_truth, make_symmetry_pairs, sample_rays_uniform, sample_rays_uniform_on, streams, BoundingVolume, DdfSample,
    Ray, RayRng, RigidTransform, SymmetryPlane,
};
use sha2::{Digest, Sha256};

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 10] = [
        ("ray-cast oracle equivalence", ray_cast_oracle),
        ("analytic-sphere ground truth", analytic_sphere),
        ("directed consistency", directed_consistency),
        ("gradient check", gradient_check),
        ("desk-scale overfit", overfit),
        ("symmetry loss effect", symmetry_effect),
        ("metric oracles", metric_oracles),
        ("2D aggregation contract", aggregation_contract),
        ("hand-feature oracles", hand_feature_oracles),
        ("fit determinism", fit_determinism),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let t = Instant::now();
        let o = run();
        let tag = if o.pass { "PASS" } else { "FAIL" };
        println!("criterion {:>2} [{tag}] {name}: {} ({:.1} s)", i + 1, o.detail, t.elapsed().as_secs_f64());
        failed += usize::from(!o.pass);
    }
    println!("acceptance: {} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}

/// Icosphere with radially jittered vertices, so faces are irregular and non-coplanar.
fn bumpy_sphere(subdivisions: u32, seed: u64) -> TriangleMesh<f64> {
    let base = TriangleMesh::<f64>::icosphere(Vec3::zero(), 1.0, subdivisions);
    let mut rng = RayRng::new(seed, streams::EVAL);
    let verts = base.vertices().iter().map(|&v| v * rng.uniform_range(0.85, 1.15)).collect();
    TriangleMesh::new(verts, base.faces().to_vec()).unwrap()
}

fn cube(half: f64) -> BoundingVolume<f64> {
    BoundingVolume::new(Vec3::splat(-half), Vec3::splat(half)).unwrap()
}

fn ray_cast_oracle() -> Outcome {
    let t0 = Instant::now();
    let mesh = bumpy_sphere(4, 1);
    let bvh = build_bvh(&mesh).unwrap();
    let rays = sample_rays_uniform(&cube(1.5), 10_000, 1).unwrap();
    let mut mismatches = 0;
    for r in &rays {
        let a = cast_ray(&bvh, &mesh, r.origin, r.direction).unwrap();
        let b = brute_force_cast(&mesh, r.origin, r.direction).unwrap();
        let same = match (a, b) {
            (None, None) => true,
            (Some(a), Some(b)) => a.face == b.face && (a.t - b.t).abs() <= 1e-9,
            _ => false,
        };
        mismatches += usize::from(!same);
    }
    let secs = t0.elapsed().as_secs_f64();
    outcome(
        mismatches == 0 && secs < 10.0,
        format!("{} rays vs {} faces, {mismatches} mismatches, {secs:.2} s (limit 10 s)", rays.len(), mesh.face_count()),
    )
}

fn analytic_sphere() -> Outcome {
    let t0 = Instant::now();
    let mesh = TriangleMesh::<f64>::icosphere(Vec3::zero(), 1.0, 4);
    let rays = sample_rays_uniform(&cube(1.5), 10_000, 2).unwrap();
    let gt = generate_ground_truth(&mesh, &rays).unwrap();
    let exact = SphereField { center: Vec3::zero(), radius: 1.0 }.evaluate(&rays).unwrap();
    let (mut agree, mut err, mut hits) = (0usize, 0.0, 0usize);
    for (s, e) in gt.iter().zip(&exact) {
        let ev = e.visibility > 0.5;
        agree += usize::from(s.xi() == ev);
        if let (Some(d), true) = (s.depth, ev) {
            err += (d - e.depth).abs();
            hits += 1;
        }
    }
    let (acc, mae) = (agree as f64 / rays.len() as f64, err / hits as f64);
    let secs = t0.elapsed().as_secs_f64();
    outcome(
        acc >= 0.999 && mae <= 2e-2 && secs < 5.0,
        format!("{} faces, visibility agreement {acc:.5} (>= 0.999), depth MAE {mae:.2e} (<= 2e-2), {secs:.2} s (limit 5 s)", mesh.face_count()),
    )
}

fn directed_consistency() -> Outcome {
    let mesh = bumpy_sphere(3, 3);
    let bvh = build_bvh(&mesh).unwrap();
    let rays = sample_rays_uniform(&cube(1.5), 4000, 3).unwrap();
    let visible: Vec<DdfSample<f64>> = generate_ground_truth(&mesh, &rays).unwrap().into_iter().filter(|s| s.xi()).take(1000).collect();
    let mut worst: f64 = 0.0;
    for s in &visible {
        let d = s.depth.unwrap();
        for f in [0.25, 0.5, 0.75] {
            let step = f * d;
            let hit = cast_ray(&bvh, &mesh, s.ray.at(step), s.ray.direction).unwrap();
            worst = worst.max(hit.map_or(f64::INFINITY, |h| (h.t - (d - step)).abs()));
        }
    }
    outcome(visible.len() == 1000 && worst <= 1e-6, format!("{} samples x 3 steps, max |D' - (D - s)| {worst:.2e} (<= 1e-6)", visible.len()))
}

fn gradient_check() -> Outcome {
    let t0 = Instant::now();
    let r = sphere_gradcheck(7, 16, 8, 1e-4).unwrap();
    let secs = t0.elapsed().as_secs_f64();
    let attention = r.per_tensor.iter().filter(|(n, _)| n.starts_with("attn.")).count();
    outcome(
        r.max_rel_error <= 1e-3 && attention == 4 && secs < 30.0,
        format!(
            "width 16, 8 samples, max relative error {:.2e} at {} (<= 1e-3), {} entries checked, {} skipped at kinks, {secs:.1} s (limit 30 s)",
            r.max_rel_error, r.worst_param, r.checked, r.skipped_kinks
        ),
    )
}

fn sphere_pipeline(mesh: &TriangleMesh<f64>) -> FeaturePipeline {
    let camera = CameraPose::framing_unit_cube(64);
    let pyramid = synthetic_pyramid(mesh, &camera, &SyntheticPyramidConfig::default()).unwrap();
    FeaturePipeline { camera, pyramid, skeleton: HandSkeleton::rest(1.0), k_l: 8, k_3d: 8, spacing: DEFAULT_SPACING }
}

fn overfit() -> Outcome {
    let t0 = Instant::now();
    let bounds = BoundingVolume::unit_cube();
    let sphere = SphereField { center: Vec3::zero(), radius: 1.0 };
    let pipeline = sphere_pipeline(&TriangleMesh::icosphere(Vec3::zero(), 1.0, 3));
    let rays = sample_rays_uniform(&bounds, 20_000, 0).unwrap();
    let gt: Vec<DdfSample<f64>> = rays
        .iter()
        .zip(sphere.evaluate(&rays).unwrap())
        .map(|(&ray, v)| DdfSample { ray, depth: (v.visibility > 0.5).then_some(v.depth) })
        .collect();
    let examples = training_examples(&pipeline, &gt).unwrap();
    let cfg = TrainConfig { threads: 1, ..TrainConfig::default() };
    let mut net = DdfNetwork::<f32>::new(cfg.net_config(pipeline.channels()), cfg.seed).unwrap();
    let log = train(&mut net, &examples, &[], &cfg, |_| {}).unwrap();
    let field = NetworkField::new(net, pipeline);

    let held = sample_rays_uniform_on(&bounds, 20_000, 0, streams::EVAL).unwrap();
    let (pred, truth) = (field.evaluate(&held).unwrap(), sphere.evaluate(&held).unwrap());
    let (mut agree, mut err, mut hits) = (0usize, 0.0, 0usize);
    for (p, t) in pred.iter().zip(&truth) {
        let tv = t.visibility > 0.5;
        agree += usize::from((p.visibility > 0.5) == tv);
        if tv {
            err += (p.depth - t.depth).abs();
            hits += 1;
        }
    }
    let (acc, mae) = (agree as f64 / held.len() as f64, err / hits as f64);
    let first = |c: PointCloud<f64>| PointCloud::new(c.points().iter().take(10_000).copied().collect(), 1.0).unwrap();
    let pc = first(ddf_to_pointcloud(&field, &held, 0.5, 1.0).unwrap());
    let gc = first(ddf_to_pointcloud(&sphere, &held, 0.5, 1.0).unwrap());
    let f = f_score(&pc, &gc, 0.01).unwrap();
    let secs = t0.elapsed().as_secs_f64();
    outcome(
        log.len() <= 100 && acc >= 0.98 && mae <= 0.02 && f >= 0.90 && secs < 900.0,
        format!(
            "{} epochs, held-out visibility accuracy {acc:.4} (>= 0.98), depth MAE {mae:.4} (<= 0.02), F(0.01) {f:.4} on {}/{} points (>= 0.90), {secs:.0} s (limit 900 s)",
            log.len(),
            pc.len(),
            gc.len()
        ),
    )
}

fn symmetry_effect() -> Outcome {
    let bounds = BoundingVolume::unit_cube();
    let x = Vec3::new(1.0, 0.0, 0.0);
    let half = TriangleMesh::<f64>::icosphere(Vec3::new(0.3, 0.1, 0.0), 0.45, 3);
    let mesh = half.merged(&half.mirrored(Vec3::zero(), x));
    let plane = SymmetryPlane::new(Vec3::zero(), x).unwrap();
    let pipeline = sphere_pipeline(&mesh);
    // A ray belongs to the back half when its first hit has x < 0.
    let back = |s: &DdfSample<f64>| s.depth.is_some_and(|d| s.ray.at(d).x < 0.0);

    let pairs = make_symmetry_pairs(&plane, &bounds, 5000, 0).unwrap();
    let pair_rays: Vec<Ray<f64>> = pairs.iter().flat_map(|p| [p.ray_a, p.ray_b]).collect();
    let mut rays = sample_rays_uniform(&bounds, 20_000, 0).unwrap();
    rays.extend(&pair_rays);
    let gt = generate_ground_truth(&mesh, &rays).unwrap();
    let mut examples = training_examples(&pipeline, &gt).unwrap();
    for (e, s) in examples.iter_mut().zip(&gt) {
        if back(s) {
            e.target.depth = None;
        }
    }
    let pair_ex = pair_examples(&pipeline, &pair_rays).unwrap();

    let held = sample_rays_uniform_on(&bounds, 20_000, 0, streams::EVAL).unwrap();
    let held_back: Vec<DdfSample<f64>> = generate_ground_truth(&mesh, &held).unwrap().into_iter().filter(back).collect();
    let held_rays: Vec<Ray<f64>> = held_back.iter().map(|s| s.ray).collect();
    let mae = |lambda2: f64| {
        let cfg = TrainConfig { lambda2, ..TrainConfig::default() };
        let mut net = DdfNetwork::<f32>::new(cfg.net_config(pipeline.channels()), cfg.seed).unwrap();
        train(&mut net, &examples, &pair_ex, &cfg, |_| {}).unwrap();
        let pred = NetworkField::new(net, pipeline.clone()).evaluate(&held_rays).unwrap();
        pred.iter().zip(&held_back).map(|(p, s)| (p.depth - s.depth.unwrap()).abs()).sum::<f64>() / held_back.len() as f64
    };
    let (off, on) = (mae(0.0), mae(0.5));
    let reduction = 1.0 - on / off;
    outcome(
        reduction >= 0.20,
        format!(
            "{} held-out back-half rays, depth MAE {off:.4} without symmetry vs {on:.4} with lambda2 = 0.5, reduction {:.1}% (>= 20%)",
            held_back.len(),
            100.0 * reduction
        ),
    )
}

fn exhaustive(a: &[Vec3<f64>], b: &[Vec3<f64>]) -> Vec<f64> {
    a.iter().map(|p| b.iter().map(|q| p.distance(*q).powi(2)).fold(f64::INFINITY, f64::min)).collect()
}

fn metric_oracles() -> Outcome {
    let mut rng = RayRng::new(7, streams::EVAL);
    let mut worst: f64 = 0.0;
    let point = |rng: &mut RayRng| Vec3::new(rng.uniform(), rng.uniform(), rng.uniform());
    for _ in 0..50 {
        let a: Vec<_> = (0..200).map(|_| point(&mut rng)).collect();
        let b: Vec<_> = (0..200).map(|_| point(&mut rng)).collect();
        let (ca, cb) = (PointCloud::new(a.clone(), 1.0).unwrap(), PointCloud::new(b.clone(), 1.0).unwrap());
        let (ab, ba) = (exhaustive(&a, &b), exhaustive(&b, &a));
        let mean = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;
        worst = worst.max((chamfer_distance(&ca, &cb).unwrap() - (mean(&ab) + mean(&ba))).abs());
        for tau in [0.02, 0.05, 0.1] {
            let frac = |v: &[f64]| v.iter().filter(|d| d.sqrt() <= tau).count() as f64 / v.len() as f64;
            let (p, r) = (frac(&ab), frac(&ba));
            let f = if p + r == 0.0 { 0.0 } else { 2.0 * p * r / (p + r) };
            worst = worst.max((f_score(&ca, &cb, tau).unwrap() - f).abs());
        }
    }
    let c = PointCloud::new((0..200).map(|_| point(&mut rng)).collect(), 1.0).unwrap();
    let (cd0, f1) = (chamfer_distance(&c, &c).unwrap(), f_score(&c, &c, 1e-3).unwrap());
    outcome(worst <= 1e-9 && cd0 == 0.0 && f1 == 1.0, format!("50 instances of 200 points, max deviation {worst:.2e} (<= 1e-9), identity CD {cd0} F {f1}"))
}

fn aggregation_contract() -> Outcome {
    let mut rng = RayRng::new(8, streams::EVAL);
    let block = AttentionBlock::<f64>::new(20, 2, &mut RayRng::new(8, streams::INIT)).unwrap();
    let vec = |rng: &mut RayRng| (0..20).map(|_| rng.uniform_range(-1.0, 1.0)).collect::<Vec<f64>>();
    let (mut passthrough, mut row_sum, mut perm): (f64, f64, f64) = (0.0, 0.0, 0.0);
    for _ in 0..100 {
        let f_p = vec(&mut rng);
        let keys: Vec<Vec<f64>> = (0..8).map(|_| vec(&mut rng)).collect();
        let empty = aggregate_2d(&block, &f_p, &[]).unwrap();
        passthrough = passthrough.max(empty.iter().zip(&f_p).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max));
        for w in block.attention_weights(&f_p, &keys).unwrap() {
            row_sum = row_sum.max((w.iter().sum::<f64>() - 1.0).abs());
        }
        let mut shuffled = keys.clone();
        rng.shuffle(&mut shuffled);
        let (a, b) = (aggregate_2d(&block, &f_p, &keys).unwrap(), aggregate_2d(&block, &f_p, &shuffled).unwrap());
        perm = perm.max(a.iter().zip(&b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max));
    }
    outcome(
        passthrough == 0.0 && row_sum <= 1e-6 && perm <= 1e-6,
        format!("empty keys deviate {passthrough:.1e} from F_p, softmax row sums within {row_sum:.1e}, permutation change {perm:.1e} (<= 1e-6)"),
    )
}

/// All-pairs shortest paths over the bone graph, with the contact point as an extra node.
fn floyd_knn(skel: &HandSkeleton<f64>, p_d: Vec3<f64>, bone: usize, k: usize) -> Vec<usize> {
    let n = skel.joints().len();
    let mut d = vec![vec![f64::INFINITY; n + 1]; n + 1];
    for (i, row) in d.iter_mut().enumerate() {
        row[i] = 0.0;
    }
    for (c, p) in skel.parents().iter().enumerate() {
        if let Some(p) = *p {
            let w = skel.joints()[c].distance(skel.joints()[p]);
            d[c][p] = w;
            d[p][c] = w;
        }
    }
    let (a, b) = skel.bone(bone);
    for j in [a, b] {
        let w = p_d.distance(skel.joints()[j]);
        d[n][j] = w;
        d[j][n] = w;
    }
    for m in 0..=n {
        for i in 0..=n {
            for j in 0..=n {
                if d[i][m] + d[m][j] < d[i][j] {
                    d[i][j] = d[i][m] + d[m][j];
                }
            }
        }
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| d[n][i].partial_cmp(&d[n][j]).unwrap().then(i.cmp(&j)));
    order.truncate(k);
    order
}

fn hand_feature_oracles() -> Outcome {
    let skel = HandSkeleton::<f64>::rest(1.0);
    let bounds = cube(0.25);
    let rays = sample_rays_uniform(&bounds, 200, 9).unwrap();
    let mut closest_gap: f64 = 0.0;
    let mut knn_mismatch = 0;
    for r in &rays {
        let c = ray_skeleton_closest(r, &skel);
        // Dense oracle: t on a fine grid along the ray, s on a fine grid along each bone.
        let mut best = f64::INFINITY;
        for b in 0..skel.bone_count() {
            let (pa, pc) = skel.bone(b);
            let (ja, jc) = (skel.joints()[pa], skel.joints()[pc]);
            for i in 0..=400 {
                let q = ja + (jc - ja) * (i as f64 / 400.0);
                // Exact t for this q keeps the oracle independent of the 2D solver.
                let t = (q - r.origin).dot(r.direction).max(0.0);
                best = best.min(r.at(t).distance(q));
            }
        }
        closest_gap = closest_gap.max((c.dist - best).abs());
        if geodesic_knn(&skel, c.p_d, c.bone, 8).unwrap() != floyd_knn(&skel, c.p_d, c.bone, 8) {
            knn_mismatch += 1;
        }
    }
    let mut rng = RayRng::new(10, streams::POSES);
    let mut invariance: f64 = 0.0;
    for r in rays.iter().take(50) {
        let tf = RigidTransform::random(&mut rng, 0.5);
        let (moved_ray, moved_skel) = (tf.apply_ray(r), skel.transformed(&tf));
        let g = global_hand_embedding(r, &skel).values;
        let g2 = global_hand_embedding(&moved_ray, &moved_skel).values;
        let l = hand_features(r, &skel, 8).unwrap().local.coords;
        let l2 = hand_features(&moved_ray, &moved_skel, 8).unwrap().local.coords;
        for (a, b) in g.iter().zip(&g2).chain(l.iter().zip(&l2)) {
            invariance = invariance.max((a - b).abs());
        }
    }
    outcome(
        closest_gap <= 1e-3 && knn_mismatch == 0 && invariance <= 1e-7,
        format!(
            "closest-point gap to dense search {closest_gap:.2e} (<= 1e-3), geodesic kNN mismatches {knn_mismatch}/200, embedding change under rigid motion {invariance:.1e} (<= 1e-7)"
        ),
    )
}

fn sha(path: &Path) -> String {
    let bytes = std::fs::read(path).unwrap();
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

fn fit_determinism() -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    let p = |n: &str| dir.path().join(n);
    let mesh = TriangleMesh::<f64>::icosphere(Vec3::new(0.1, 0.0, 0.0), 0.6, 2);
    ddf_core::io::save_mesh_obj(p("mesh.obj"), &mesh).unwrap();
    let rays = sample_rays_uniform(&BoundingVolume::unit_cube(), 1500, 5).unwrap();
    save_ray_dataset(p("gt.ddfr"), &RayDataset::from_samples(&generate_ground_truth(&mesh, &rays).unwrap())).unwrap();
    let plane = SymmetryPlane::new(Vec3::zero(), Vec3::new(0.0, 1.0, 0.0)).unwrap();
    let pairs = make_symmetry_pairs(&plane, &BoundingVolume::unit_cube(), 200, 5).unwrap();
    save_ray_dataset(p("pairs.ddfr"), &RayDataset::rays_only(pairs.iter().flat_map(|q| [q.ray_a, q.ray_b]).collect(), true)).unwrap();
    std::fs::write(
        p("run.json"),
        r#"{"width": 32, "epochs": 4, "batch": 256, "seed": 11, "data": "gt.ddfr", "pairs": "pairs.ddfr", "mesh": "mesh.obj"}"#,
    )
    .unwrap();
    // Same entry point as the `ddf` binary, run in-process twice.
    std::env::remove_var(ddf_core::io::SEED_ENV);
    let run = |tag: &str| {
        let (out, log) = (p(&format!("{tag}.ddfn")), p(&format!("{tag}.json")));
        let args: Vec<std::ffi::OsString> = vec![
            "ddf".into(),
            "fit".into(),
            "--quiet".into(),
            "--config".into(),
            p("run.json").into(),
            "--out".into(),
            out.clone().into(),
            "--log".into(),
            log.clone().into(),
        ];
        let code = ddf_cli::run_from(args);
        assert_eq!(code, 0, "fit exited with {code}");
        (sha(&out), sha(&log))
    };
    let (a, b) = (run("a"), run("b"));
    outcome(a == b, format!("checkpoint sha256 {}.. vs {}.., loss log {}.. vs {}..", &a.0[..12], &b.0[..12], &a.1[..12], &b.1[..12]))
}
