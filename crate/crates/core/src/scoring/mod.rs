//! Projected-length entropy of streamlines under a camera, with attenuation
//! by semitransparent isosurfaces.

mod bvh;
mod camera;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use bvh::{intersect, TriangleBvh};
pub use camera::{project_point, Camera, Projected, Projector};

use crate::isosurface::IsosurfaceMesh;
use crate::tracing::Streamline;
use crate::{Error, Result, Vec3};

/// Ray parameter window for counting occluders between eye and midpoint.
pub const RAY_T_MIN: f64 = 1e-6;
pub const RAY_T_MAX: f64 = 1.0 - 1e-6;
/// Total projected lengths below this many pixels count as a degenerate view.
pub const DEGENERATE_PIXELS: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ScoreMode {
    /// One opacity for the whole streamline, applied to the unoccluded entropy.
    Coarse,
    /// Per-segment attenuation by every surface crossed.
    #[default]
    PerSegment,
}

impl std::str::FromStr for ScoreMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "coarse" => Ok(ScoreMode::Coarse),
            "per-segment" => Ok(ScoreMode::PerSegment),
            other => Err(Error::InvalidArgument(format!("unknown score mode {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SegmentProjection {
    pub index: usize,
    /// Projected length in pixels.
    pub d: f64,
    /// `d` after attenuation by the occluding surfaces.
    pub weighted: f64,
    pub occluders: usize,
    pub occluded: bool,
    pub clipped: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EntropyScore {
    #[serde(rename = "id")]
    pub streamline_id: usize,
    /// Coarse mode: entropy of the unweighted lengths. Per-segment mode:
    /// entropy of the attenuated lengths.
    #[serde(rename = "E")]
    pub entropy: f64,
    /// Unweighted entropy scaled by the single-opacity penalty.
    #[serde(rename = "E_coarse")]
    pub entropy_coarse: f64,
    pub m: usize,
    pub m0: usize,
    pub mode: ScoreMode,
    pub from_critical: Option<usize>,
}

impl EntropyScore {
    /// The value streamlines are ranked by under this score's mode.
    pub fn key(&self) -> f64 {
        match self.mode {
            ScoreMode::Coarse => self.entropy_coarse,
            ScoreMode::PerSegment => self.entropy,
        }
    }
}

/// One row of the score report.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScoreRecord {
    pub id: usize,
    #[serde(rename = "E")]
    pub e: f64,
    #[serde(rename = "E_coarse")]
    pub e_coarse: f64,
    pub m: usize,
    pub m0: usize,
    pub from_critical: Option<usize>,
}

/// Report rows ordered by ranking key descending, then id.
pub fn score_report(scores: &[EntropyScore]) -> Vec<ScoreRecord> {
    let mut sorted: Vec<&EntropyScore> = scores.iter().collect();
    sorted.sort_by(|a, b| b.key().total_cmp(&a.key()).then(a.streamline_id.cmp(&b.streamline_id)));
    sorted
        .into_iter()
        .map(|s| ScoreRecord {
            id: s.streamline_id,
            e: s.key(),
            e_coarse: s.entropy_coarse,
            m: s.m,
            m0: s.m0,
            from_critical: s.from_critical,
        })
        .collect()
}

/// Acceleration structures for a set of isosurfaces.
#[derive(Debug, Clone, Default)]
pub struct OcclusionScene {
    surfaces: Vec<(TriangleBvh, f64)>,
}

impl OcclusionScene {
    pub fn new(meshes: &[IsosurfaceMesh]) -> Self {
        let surfaces = meshes
            .par_iter()
            .map(|m| (TriangleBvh::new((0..m.triangles.len()).map(|t| m.triangle(t))), m.opacity))
            .collect();
        OcclusionScene { surfaces }
    }

    pub fn max_opacity(&self) -> f64 {
        self.surfaces.iter().map(|s| s.1).fold(0.0, f64::max)
    }

    /// Occluder count and attenuation factor along the segment `eye -> p`.
    pub fn attenuation(&self, eye: &Vec3, p: &Vec3) -> (usize, f64) {
        let dir = p - eye;
        let mut count = 0;
        let mut factor = 1.0;
        for (bvh, alpha) in &self.surfaces {
            let hits = bvh.count_hits(eye, &dir, RAY_T_MIN, RAY_T_MAX);
            count += hits;
            factor *= (1.0 - alpha).powi(hits as i32);
        }
        (count, factor)
    }
}

/// Applies the one-surface-at-a-time attenuation `d <- (1 - a) d` in order.
pub fn attenuate(d: f64, alphas: &[f64]) -> f64 {
    alphas.iter().fold(d, |acc, a| (1.0 - a) * acc)
}

fn project_points(projector: &Projector, points: &[Vec3]) -> Vec<SegmentProjection> {
    let projected: Vec<Projected> = points.iter().map(|p| projector.project(p)).collect();
    projected
        .windows(2)
        .enumerate()
        .map(|(index, w)| {
            let (d, clipped) = match (w[0].pixel(), w[1].pixel()) {
                (Some(a), Some(b)) => ((a[0] - b[0]).hypot(a[1] - b[1]), false),
                _ => (0.0, true),
            };
            SegmentProjection { index, d, weighted: d, occluders: 0, occluded: false, clipped }
        })
        .collect()
}

fn apply_occlusion(eye: &Vec3, scene: &OcclusionScene, points: &[Vec3], projs: &mut [SegmentProjection]) {
    for (proj, w) in projs.iter_mut().zip(points.windows(2)) {
        let mid = (w[0] + w[1]) * 0.5;
        let (n, factor) = scene.attenuation(eye, &mid);
        proj.occluders = n;
        proj.occluded = n > 0;
        proj.weighted = proj.d * factor;
    }
}

pub fn project_streamline(cam: &Camera, s: &Streamline) -> Result<Vec<SegmentProjection>> {
    Ok(project_points(&cam.projector()?, &s.points))
}

pub fn occlusion_factors(
    cam: &Camera,
    s: &Streamline,
    meshes: &[IsosurfaceMesh],
) -> Result<Vec<SegmentProjection>> {
    let mut projs = project_streamline(cam, s)?;
    apply_occlusion(&cam.eye, &OcclusionScene::new(meshes), &s.points, &mut projs);
    Ok(projs)
}

fn normalized_entropy(d_total: f64, weighted: impl Iterator<Item = f64>, m: usize) -> f64 {
    if m == 0 || d_total.is_nan() || d_total < DEGENERATE_PIXELS {
        return 0.0;
    }
    let h: f64 = weighted
        .map(|w| w / d_total)
        .filter(|&x| x > 0.0)
        .map(|x| -x * x.log2())
        .sum();
    (h / ((1 + m) as f64).log2()).clamp(0.0, 1.0)
}

/// Entropy of the attenuated lengths, each taken as a fraction of the total
/// unattenuated projected length.
pub fn entropy_per_segment(projs: &[SegmentProjection], m: usize) -> f64 {
    let d_total: f64 = projs.iter().map(|p| p.d).sum();
    normalized_entropy(d_total, projs.iter().map(|p| p.weighted), m)
}

fn entropy_unweighted(projs: &[SegmentProjection], m: usize) -> f64 {
    let d_total: f64 = projs.iter().map(|p| p.d).sum();
    normalized_entropy(d_total, projs.iter().map(|p| p.d), m)
}

/// Penalizes `e` by opacity `alpha` in proportion to the occluded share
/// `m0 / m` of the segments.
pub fn entropy_coarse(e: f64, m: usize, m0: usize, alpha: f64) -> f64 {
    if m == 0 {
        return e;
    }
    let r = m0 as f64 / m as f64;
    (1.0 - r) * e + r * (1.0 - alpha) * e
}

pub fn score_streamline(
    projector: &Projector,
    eye: &Vec3,
    scene: &OcclusionScene,
    s: &Streamline,
    mode: ScoreMode,
) -> EntropyScore {
    let mut projs = project_points(projector, &s.points);
    apply_occlusion(eye, scene, &s.points, &mut projs);
    let m = projs.len();
    let m0 = projs.iter().filter(|p| p.occluded).count();
    let base = entropy_unweighted(&projs, m);
    let entropy = match mode {
        ScoreMode::Coarse => base,
        ScoreMode::PerSegment => entropy_per_segment(&projs, m),
    };
    EntropyScore {
        streamline_id: s.id,
        entropy,
        entropy_coarse: entropy_coarse(base, m, m0, scene.max_opacity()),
        m,
        m0,
        mode,
        from_critical: s.from_critical,
    }
}

/// Scores every candidate in input order.
pub fn score_all(
    cam: &Camera,
    candidates: &[Streamline],
    meshes: &[IsosurfaceMesh],
    mode: ScoreMode,
) -> Result<Vec<EntropyScore>> {
    let projector = cam.projector()?;
    let scene = OcclusionScene::new(meshes);
    Ok(score_with_scene(&projector, &cam.eye, &scene, candidates, mode))
}

pub fn score_with_scene(
    projector: &Projector,
    eye: &Vec3,
    scene: &OcclusionScene,
    candidates: &[Streamline],
    mode: ScoreMode,
) -> Vec<EntropyScore> {
    candidates
        .par_iter()
        .map(|s| score_streamline(projector, eye, scene, s, mode))
        .collect()
}
