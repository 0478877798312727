//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any
//! criterion fails.

use std::collections::{BTreeSet, HashMap};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use isostream_core::isosurface::{polygonize, IsosurfaceMesh, WELD_RADIUS};
use isostream_core::scoring::{
    attenuate, entropy_coarse, entropy_per_segment, occlusion_factors, score_all, Camera, EntropyScore,
    ScoreMode, SegmentProjection,
};
use isostream_core::selection::{cell_footprint, select_streamlines, SelectionConfig, SelectionReason};
use isostream_core::topology::{extract_scalar_extrema, extract_vector_critical_points, CriticalKind};
use isostream_core::tracing::{build_candidates, integrate_streamline, Seed, SeedProvenance, Streamline, TraceConfig};
use isostream_core::volume::{generate_synthetic, Field, SyntheticKind, SyntheticSpec, VolumeGrid};
use isostream_core::Vec3;

type Outcome = Result<String, String>;
type Criterion = fn() -> Outcome;
type Extrema = Vec<(usize, f32)>;

macro_rules! ensure {
    ($cond:expr, $($msg:tt)+) => {
        // negated on purpose so NaN fails
        #[allow(clippy::neg_cmp_op_on_partial_ord)]
        if !$cond {
            return Err(format!($($msg)+));
        }
    };
}

fn within(elapsed: Duration, limit_s: f64) -> Outcome {
    ensure!(elapsed.as_secs_f64() < limit_s, "took {:.2} s, limit {limit_s} s", elapsed.as_secs_f64());
    Ok(format!("{:.2} s", elapsed.as_secs_f64()))
}

fn rotation_grid(n: usize) -> VolumeGrid {
    let mut spec = SyntheticSpec::new(SyntheticKind::Rotation, [n, n, n]);
    spec.params.center = Some([0.5, 0.5, 0.5]);
    generate_synthetic(&spec).unwrap()
}

fn coarse_identity() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut worst = 0.0f64;
    for _ in 0..10_000 {
        let e: f64 = rng.random();
        let m = rng.random_range(1..=1000usize);
        let m0 = rng.random_range(0..=m);
        let alpha: f64 = rng.random();
        let err = (entropy_coarse(e, m, m0, alpha) - (1.0 - alpha * m0 as f64 / m as f64) * e).abs();
        worst = worst.max(err);
    }
    ensure!(worst <= 1e-12, "max deviation {worst:e}");
    Ok(format!("max deviation {worst:.1e}, {}", within(start.elapsed(), 1.0)?))
}

fn analytic_entropy() -> Outcome {
    let expect = 2.0 / 5f64.log2();
    let equal = vec![
        SegmentProjection { index: 0, d: 7.0, weighted: 7.0, occluders: 0, occluded: false, clipped: false };
        4
    ];
    let direct = entropy_per_segment(&equal, 4);
    ensure!((direct - expect).abs() <= 1e-9, "direct {direct} vs {expect}");

    // four equal segments in a fronto-parallel plane project to equal lengths
    let cam = Camera {
        eye: Vec3::new(0.0, 0.0, 4.0),
        target: Vec3::zeros(),
        up: Vec3::y(),
        fov_y: 1.0,
        viewport: [640, 480],
        near: 0.1,
        far: 100.0,
    };
    let pts: Vec<Vec3> = (0..5).map(|i| Vec3::new(-0.4 + 0.2 * i as f64, 0.1, 0.0)).collect();
    let line = Streamline::from_points(0, pts, None);
    let scored = score_all(&cam, std::slice::from_ref(&line), &[], ScoreMode::PerSegment).unwrap()[0].entropy;
    ensure!((scored - expect).abs() <= 1e-9, "projected {scored} vs {expect}");

    let axis: Vec<Vec3> = (0..20).map(|i| Vec3::new(0.0, 0.0, 1.0 - 0.1 * i as f64)).collect();
    let end_on = Streamline::from_points(1, axis, None);
    for mode in [ScoreMode::PerSegment, ScoreMode::Coarse] {
        let s = score_all(&cam, std::slice::from_ref(&end_on), &[], mode).unwrap()[0];
        ensure!(s.entropy == 0.0 && s.entropy_coarse == 0.0, "end-on {mode:?}: {s:?}");
    }
    Ok(format!("E = {scored:.9} (2/log2 5 = {expect:.9}), end-on E = 0"))
}

fn occlusion_monotonicity() -> Outcome {
    let g = rotation_grid(32);
    let mut cfg = TraceConfig::for_grid(&g, "velocity").unwrap();
    cfg.uniform_seed_count = 500;
    cfg.rng_seed = 7;
    let candidates = build_candidates(&g, "velocity", &[], &cfg).unwrap();
    ensure!(candidates.len() >= 450, "only {} candidates", candidates.len());
    let sphere = polygonize(&g, "scalar", 0.3, 1.0).unwrap().weld(WELD_RADIUS);
    let cam = Camera {
        eye: Vec3::new(0.5, -2.0, 1.1),
        target: Vec3::repeat(0.5),
        up: Vec3::z(),
        fov_y: 0.9,
        viewport: [800, 600],
        near: 0.01,
        far: 50.0,
    };
    let center = Vec3::repeat(0.5);
    let inside: Vec<bool> = candidates
        .iter()
        .map(|s| s.points.iter().all(|p| (p - center).norm() < 0.29))
        .collect();

    let start = Instant::now();
    let mut previous: Option<Vec<f64>> = None;
    let mut final_scores = Vec::new();
    for alpha in [0.0, 0.25, 0.5, 0.75, 1.0] {
        let mut mesh = sphere.clone();
        mesh.opacity = alpha;
        let scores = score_all(&cam, &candidates, &[mesh], ScoreMode::PerSegment).unwrap();
        let e: Vec<f64> = scores.iter().map(|s| s.entropy).collect();
        if let Some(prev) = &previous {
            for (i, (a, b)) in prev.iter().zip(&e).enumerate() {
                ensure!(b <= a, "candidate {i}: E rose from {a} to {b} at alpha {alpha}");
            }
        }
        previous = Some(e);
        final_scores = scores;
    }
    let elapsed = start.elapsed();
    let hidden = inside.iter().filter(|&&b| b).count();
    ensure!(hidden > 0, "scene has no streamline inside the sphere");
    for (s, &in_sphere) in final_scores.iter().zip(&inside) {
        ensure!(!in_sphere || s.entropy == 0.0, "inside streamline {} has E = {}", s.streamline_id, s.entropy);
    }
    Ok(format!("{} candidates, {hidden} inside, {}", candidates.len(), within(elapsed, 30.0)?))
}

fn quad(z: f64, opacity: f64) -> IsosurfaceMesh {
    let mut m = IsosurfaceMesh::empty(0, 0.0, opacity);
    m.vertices = vec![
        Vec3::new(-2.0, -2.0, z),
        Vec3::new(2.0, -2.0, z),
        Vec3::new(2.0, 2.0, z),
        Vec3::new(-2.0, 2.0, z),
    ];
    m.triangles = vec![[0, 1, 2], [0, 2, 3]];
    m
}

fn attenuation_product() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let cam = Camera {
        eye: Vec3::new(0.0, 0.0, 6.0),
        target: Vec3::zeros(),
        up: Vec3::y(),
        fov_y: 1.2,
        viewport: [500, 500],
        near: 0.1,
        far: 100.0,
    };
    let mut checked = 0;
    for _ in 0..200 {
        let (a1, a2): (f64, f64) = (rng.random(), rng.random());
        let (z1, z2) = (rng.random_range(0.5..2.0), rng.random_range(2.5..4.0));
        // keep midpoints off the quads' shared diagonal
        let y = rng.random_range(0.05..0.5);
        let x0 = rng.random_range(-0.5..-0.1);
        let line = Streamline::from_points(0, vec![Vec3::new(x0, y + 0.6, 0.0), Vec3::new(x0 + 0.3, y + 0.6, 0.0)], None);
        let fwd = occlusion_factors(&cam, &line, &[quad(z1, a1), quad(z2, a2)]).unwrap();
        let rev = occlusion_factors(&cam, &line, &[quad(z2, a2), quad(z1, a1)]).unwrap();
        let p = &fwd[0];
        let expect = p.d * (1.0 - a1) * (1.0 - a2);
        ensure!(p.occluders == 2, "expected two crossings, got {}", p.occluders);
        ensure!((p.weighted - expect).abs() <= 1e-12 * p.d.max(1.0), "{} vs {expect}", p.weighted);
        ensure!((rev[0].weighted - p.weighted).abs() <= 1e-12 * p.d.max(1.0), "order changed the result");
        ensure!((attenuate(p.d, &[a1, a2]) - attenuate(p.d, &[a2, a1])).abs() <= 1e-12 * p.d.max(1.0), "fold order");
        checked += 1;
    }
    Ok(format!("{checked} two-surface configurations"))
}

fn vector_critical_points() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut worst = 0.0f64;
    for _ in 0..100 {
        let c = [rng.random_range(0.1..0.9), rng.random_range(0.1..0.9), rng.random_range(0.1..0.9)];
        let mut spec = SyntheticSpec::new(SyntheticKind::Linear, [32, 32, 32]);
        spec.params.center = Some(c);
        spec.params.matrix = Some([[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]]);
        let g = generate_synthetic(&spec).unwrap();
        let cps = extract_vector_critical_points(&g, "velocity").unwrap();
        ensure!(cps.len() == 1, "c = {c:?}: {} critical points", cps.len());
        worst = worst.max((cps[0].position - Vec3::from(c)).norm());
    }
    ensure!(worst <= 1e-6, "max position error {worst:e}");
    let constant = generate_synthetic(&SyntheticSpec::new(SyntheticKind::Constant, [32, 32, 32])).unwrap();
    let n = extract_vector_critical_points(&constant, "velocity").unwrap().len();
    ensure!(n == 0, "constant field gave {n}");
    Ok(format!("max error {worst:.1e}, {}", within(start.elapsed(), 20.0)?))
}

/// Strict comparison against the six axis neighbours, boundary excluded.
fn extrema_oracle(values: &[f32], n: usize) -> (Extrema, Extrema) {
    let at = |i: usize, j: usize, k: usize| values[i + n * (j + n * k)];
    let (mut maxima, mut minima) = (Vec::new(), Vec::new());
    for k in 1..n - 1 {
        for j in 1..n - 1 {
            for i in 1..n - 1 {
                let v = at(i, j, k);
                let nb = [at(i - 1, j, k), at(i + 1, j, k), at(i, j - 1, k), at(i, j + 1, k), at(i, j, k - 1), at(i, j, k + 1)];
                let idx = i + n * (j + n * k);
                if nb.iter().all(|&w| v > w) {
                    maxima.push((idx, v));
                }
                if nb.iter().all(|&w| v < w) {
                    minima.push((idx, v));
                }
            }
        }
    }
    maxima.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
    minima.sort_by(|a, b| a.1.total_cmp(&b.1).then(a.0.cmp(&b.0)));
    (maxima, minima)
}

fn scalar_extrema() -> Outcome {
    let n = 16;
    let mut total = 0;
    for seed in 0..50u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(100 + seed);
        // half the fields are coarsely quantized so ties are common
        let levels = if seed % 2 == 0 { 4 } else { 1 << 20 };
        let values: Vec<f32> = (0..n * n * n).map(|_| rng.random_range(0..levels) as f32 / levels as f32).collect();
        let g = VolumeGrid::spanning([n; 3], Vec3::zeros(), Vec3::repeat(1.0))
            .unwrap()
            .with_field(Field::scalar("f", values.clone()))
            .unwrap();
        let got = extract_scalar_extrema(&g, "f", false).unwrap();
        let (maxima, minima) = extrema_oracle(&values, n);
        let expect: Vec<(CriticalKind, usize, f32)> = maxima
            .iter()
            .map(|&(i, v)| (CriticalKind::ScalarMax, i, v))
            .chain(minima.iter().map(|&(i, v)| (CriticalKind::ScalarMin, i, v)))
            .collect();
        let actual: Vec<(CriticalKind, usize, f32)> = got
            .iter()
            .map(|cp| {
                let p = cp.position * (n - 1) as f64;
                let idx = p.x.round() as usize + n * (p.y.round() as usize + n * p.z.round() as usize);
                (cp.kind, idx, cp.value as f32)
            })
            .collect();
        ensure!(actual == expect, "field {seed}: {} found, oracle {}", actual.len(), expect.len());
        total += expect.len();
    }
    Ok(format!("50 fields, {total} extrema agree"))
}

fn mesh_closed_and_area(mesh: &IsosurfaceMesh) -> (bool, f64) {
    let mut edges: HashMap<(u32, u32), usize> = HashMap::new();
    let mut area = 0.0;
    for t in &mesh.triangles {
        for e in 0..3 {
            let (a, b) = (t[e], t[(e + 1) % 3]);
            *edges.entry((a.min(b), a.max(b))).or_default() += 1;
        }
        let [a, b, c] = t.map(|i| mesh.vertices[i as usize]);
        area += 0.5 * (b - a).cross(&(c - a)).norm();
    }
    (!edges.is_empty() && edges.values().all(|&c| c == 2), area)
}

fn marching_cubes() -> Outcome {
    let g = rotation_grid(64);
    let sphere = polygonize(&g, "scalar", 0.3, 0.4).unwrap().weld(WELD_RADIUS);
    let (closed, area) = mesh_closed_and_area(&sphere);
    let exact = 4.0 * std::f64::consts::PI * 0.09;
    let rel = (area - exact).abs() / exact;
    ensure!(closed, "sphere mesh is not closed");
    ensure!(rel < 0.02, "area {area} vs {exact} ({:.2}%)", rel * 100.0);

    let ramp = generate_synthetic(&SyntheticSpec::new(SyntheticKind::Linear, [17, 17, 17])).unwrap();
    let plane = polygonize(&ramp, "scalar", 0.5, 0.4).unwrap();
    ensure!(!plane.vertices.is_empty(), "plane is empty");
    let off = plane.vertices.iter().map(|v| (v.x - 0.5).abs()).fold(0.0, f64::max);
    ensure!(off <= 1e-6, "plane vertex off by {off}");
    Ok(format!(
        "sphere {} triangles, area error {:.2}%, plane max offset {off:.1e}",
        sphere.triangles.len(),
        rel * 100.0
    ))
}

fn rk4_order() -> Outcome {
    // grid coordinates exact in f32, so interpolation of the linear field is exact
    let mut spec = SyntheticSpec::new(SyntheticKind::Rotation, [33, 33, 33]);
    spec.origin = [-0.5, -0.5, 0.0];
    spec.spacing = Some([1.0 / 32.0; 3]);
    spec.params.center = Some([0.0, 0.0, 0.5]);
    let g = generate_synthetic(&spec).unwrap();
    let radius = 0.3;
    let errors: Vec<f64> = [16usize, 32, 64, 128]
        .iter()
        .map(|&steps| {
            let mut cfg = TraceConfig::for_grid(&g, "velocity").unwrap();
            cfg.step_size = std::f64::consts::TAU / steps as f64;
            cfg.max_steps = steps;
            let seed = Seed { position: Vec3::new(radius, 0.0, 0.5), provenance: SeedProvenance::Uniform, rng_index: 0 };
            let s = integrate_streamline(&g, "velocity", &seed, &cfg).unwrap().unwrap();
            (s.points.last().unwrap().xy().norm() - radius).abs()
        })
        .collect();
    let ratios: Vec<f64> = errors.windows(2).map(|w| w[0] / w[1]).collect();
    ensure!(ratios.iter().all(|&r| r >= 8.0), "errors {errors:?}, ratios {ratios:?}");
    Ok(format!("error ratios {}", ratios.iter().map(|r| format!("{r:.1}")).collect::<Vec<_>>().join(", ")))
}

struct Scene {
    candidates: Vec<Streamline>,
    scores: Vec<EntropyScore>,
}

fn random_scene(rng: &mut ChaCha8Rng, n: usize) -> Scene {
    let mut candidates = Vec::new();
    let mut scores = Vec::new();
    for id in 0..n {
        let len = rng.random_range(1..4);
        let pts: Vec<Vec3> = (0..len)
            .map(|_| Vec3::new(rng.random_range(0.0..4.0), rng.random_range(0.0..4.0), 0.5))
            .collect();
        let fc = rng.random_bool(0.4).then(|| rng.random_range(0..3));
        let e = rng.random_range(0..8) as f64 / 7.0;
        candidates.push(Streamline::from_points(id, pts, fc));
        scores.push(EntropyScore {
            streamline_id: id,
            entropy: e,
            entropy_coarse: e,
            m: len.max(2) - 1,
            m0: 0,
            mode: ScoreMode::PerSegment,
            from_critical: fc,
        });
    }
    Scene { candidates, scores }
}

/// Literal phase rules: repeatedly take the best remaining option.
fn oracle_select(scene: &Scene, g: &VolumeGrid, cfg: &SelectionConfig) -> Vec<(usize, SelectionReason)> {
    let n = scene.candidates.len();
    let fp: Vec<BTreeSet<[usize; 3]>> = scene.candidates.iter().map(|c| cell_footprint(g, c, cfg.cell_stride)).collect();
    let better = |a: usize, b: usize| {
        let (ea, eb) = (scene.scores[a].entropy, scene.scores[b].entropy);
        ea > eb || (ea == eb && a < b)
    };
    let mut chosen: Vec<(usize, SelectionReason)> = Vec::new();
    let feasible = |i: usize, chosen: &[(usize, SelectionReason)]| {
        !chosen.iter().any(|&(c, _)| c == i)
            && (!cfg.density_control || chosen.iter().all(|&(c, _)| fp[c].is_disjoint(&fp[i])))
    };
    if cfg.guarantee_critical {
        let mut pending: Vec<usize> = scene.scores.iter().filter_map(|s| s.from_critical).collect();
        pending.sort();
        pending.dedup();
        while !pending.is_empty() && chosen.len() < cfg.k {
            // critical point whose best candidate ranks highest
            let best_of = |cp: usize| (0..n).filter(|&i| scene.scores[i].from_critical == Some(cp)).reduce(|a, b| if better(a, b) { a } else { b }).unwrap();
            let pos = (0..pending.len()).reduce(|a, b| if better(best_of(pending[a]), best_of(pending[b])) { a } else { b }).unwrap();
            let cp = pending.remove(pos);
            let pick = (0..n)
                .filter(|&i| scene.scores[i].from_critical == Some(cp) && feasible(i, &chosen))
                .reduce(|a, b| if better(a, b) { a } else { b });
            if let Some(i) = pick {
                chosen.push((i, SelectionReason::CriticalGuarantee));
            }
        }
    }
    while chosen.len() < cfg.k {
        match (0..n).filter(|&i| feasible(i, &chosen)).reduce(|a, b| if better(a, b) { a } else { b }) {
            Some(i) => chosen.push((i, SelectionReason::Entropy)),
            None => break,
        }
    }
    chosen
}

fn selection_oracle() -> Outcome {
    let g = VolumeGrid::spanning([5, 5, 2], Vec3::zeros(), Vec3::new(4.0, 4.0, 1.0)).unwrap();
    let cam = Camera::look_at(Vec3::new(2.0, 2.0, 10.0), Vec3::new(2.0, 2.0, 0.5), Vec3::y());
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let mut runs = 0;
    for scene_no in 0..1500 {
        let n = rng.random_range(0..=12);
        let scene = random_scene(&mut rng, n);
        for guarantee in [false, true] {
            for density in [false, true] {
                for stride in [1, 2] {
                    let cfg = SelectionConfig {
                        k: rng.random_range(0..=n + 1),
                        guarantee_critical: guarantee,
                        density_control: density,
                        cell_stride: stride,
                        mode: ScoreMode::PerSegment,
                    };
                    let r = select_streamlines(&scene.candidates, &scene.scores, &g, &cfg, &cam).unwrap();
                    let got: Vec<(usize, SelectionReason)> = r.chosen.iter().map(|c| (c.streamline_id, c.reason)).collect();
                    let expect = oracle_select(&scene, &g, &cfg);
                    ensure!(got == expect, "scene {scene_no} {cfg:?}: got {got:?}, oracle {expect:?}");
                    if !guarantee && !density {
                        let mut sorted: Vec<usize> = (0..n).collect();
                        sorted.sort_by(|&a, &b| scene.scores[b].entropy.total_cmp(&scene.scores[a].entropy).then(a.cmp(&b)));
                        sorted.truncate(cfg.k);
                        ensure!(r.ids() == sorted, "scene {scene_no}: not the top-k sort");
                    }
                    if density {
                        let fps: Vec<_> = r.ids().iter().map(|&i| cell_footprint(&g, &scene.candidates[i], stride)).collect();
                        for a in 0..fps.len() {
                            for b in a + 1..fps.len() {
                                ensure!(fps[a].is_disjoint(&fps[b]), "scene {scene_no}: chosen share a cell");
                            }
                        }
                    }
                    runs += 1;
                }
            }
        }
    }
    Ok(format!("{runs} selections agree with the oracle"))
}

fn view_dependence() -> Outcome {
    let g = rotation_grid(24);
    let side = Camera {
        eye: Vec3::new(0.5, -2.5, 0.5),
        target: Vec3::repeat(0.5),
        up: Vec3::z(),
        fov_y: 0.8,
        viewport: [800, 600],
        near: 0.01,
        far: 50.0,
    };
    let end = Camera { eye: Vec3::new(0.5, 0.5, 3.0), up: Vec3::y(), ..side };
    let cfg = SelectionConfig { k: 12, ..Default::default() };
    let mut differs = 0;
    let mut margins = [f64::INFINITY; 2];
    for seed in 0..20u64 {
        let mut trace = TraceConfig::for_grid(&g, "velocity").unwrap();
        trace.uniform_seed_count = 150;
        trace.max_steps = 300;
        trace.rng_seed = seed;
        let candidates = build_candidates(&g, "velocity", &[], &trace).unwrap();
        let mut chosen_sets = Vec::new();
        for (c, cam) in [side, end].iter().enumerate() {
            let scores = score_all(cam, &candidates, &[], cfg.mode).unwrap();
            let r = select_streamlines(&candidates, &scores, &g, &cfg, cam).unwrap();
            ensure!(!r.chosen.is_empty(), "seed {seed}: nothing selected");
            let selected_mean = r.chosen.iter().map(|c| c.entropy).sum::<f64>() / r.chosen.len() as f64;
            let mut rng = ChaCha8Rng::seed_from_u64(1000 + seed);
            let subset = sample(&mut rng, candidates.len(), r.chosen.len());
            let random_mean = subset.iter().map(|i| scores[i].key()).sum::<f64>() / r.chosen.len() as f64;
            ensure!(selected_mean >= random_mean, "seed {seed} camera {c}: selected {selected_mean} < random {random_mean}");
            margins[c] = margins[c].min(selected_mean - random_mean);
            chosen_sets.push(r.ids().into_iter().collect::<BTreeSet<_>>());
        }
        if chosen_sets[0] != chosen_sets[1] {
            differs += 1;
        }
    }
    ensure!(differs == 20, "selected sets differ for only {differs}/20 seeds");
    Ok(format!("sets differ 20/20, min mean-E margin side {:.3} end {:.3}", margins[0], margins[1]))
}

fn run_binary(args: &[&str]) -> Result<(), String> {
    let status = Command::new(env!("CARGO_BIN_EXE_isostream"))
        .args(args)
        .arg("--quiet")
        .status()
        .map_err(|e| e.to_string())?;
    ensure!(status.success(), "isostream {args:?} exited with {status}");
    Ok(())
}

fn end_to_end_determinism() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let d = |p: &str| dir.path().join(p).to_string_lossy().into_owned();
    run_binary(&["gen", "rotation", "24", "24", "24", "--params", r#"{"center":[0.5,0.5,0.5]}"#, "--out", &d("rot.svf")])?;
    let config = serde_json::json!({
        "input": "rot.svf",
        "isosurfaces": [{"isovalue": 0.3, "opacity": 0.6}],
        "trace": {"uniform_seed_count": 120, "max_steps": 300, "rng_seed": 11},
        "selection": {"k": 15},
        "camera": {"eye": [1.8, -1.5, 1.4], "target": [0.5, 0.5, 0.5], "up": [0.0, 0.0, 1.0],
                   "fov_y": 0.9, "viewport": [800, 600], "near": 0.01, "far": 50.0},
        "outputs": "run"
    });
    std::fs::write(d("run.json"), config.to_string()).map_err(|e| e.to_string())?;
    run_binary(&["select", "--config", &d("run.json"), "--out", &d("a")])?;
    run_binary(&["select", "--config", &d("run.json"), "--out", &d("b")])?;
    let mut total = 0;
    for name in isostream_cli::OUTPUT_FILES {
        let a = std::fs::read(Path::new(&d("a")).join(name)).map_err(|e| format!("{name}: {e}"))?;
        let b = std::fs::read(Path::new(&d("b")).join(name)).map_err(|e| format!("{name}: {e}"))?;
        ensure!(a == b, "{name} differs between runs");
        ensure!(!a.is_empty(), "{name} is empty");
        total += a.len();
    }
    Ok(format!("{} files, {total} bytes identical", isostream_cli::OUTPUT_FILES.len()))
}

fn main() {
    let criteria: [(&str, Criterion); 11] = [
        ("coarse-penalty identity over 10k random inputs", coarse_identity),
        ("entropy closed form and end-on zero", analytic_entropy),
        ("per-segment entropy non-increasing in opacity", occlusion_monotonicity),
        ("two-surface attenuation is an order-free product", attenuation_product),
        ("linear-field zero found at its centre; constant field has none", vector_critical_points),
        ("scalar extrema match the neighbour oracle", scalar_extrema),
        ("marching cubes sphere closed with accurate area; plane exact", marching_cubes),
        ("RK4 revolution error shrinks at least 8x per halving", rk4_order),
        ("selection matches the brute-force oracle", selection_oracle),
        ("selection depends on view and beats random subsets", view_dependence),
        ("select command output is byte-identical across runs", end_to_end_determinism),
    ];
    let mut failed = 0;
    for (name, check) in criteria {
        let start = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(check))
            .unwrap_or_else(|p| Err(p.downcast_ref::<String>().cloned().or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string())).unwrap_or_else(|| "panic".into())));
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("PASS  {name}: {detail} [{secs:.2} s]"),
            Err(detail) => {
                failed += 1;
                println!("FAIL  {name}: {detail} [{secs:.2} s]");
            }
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
