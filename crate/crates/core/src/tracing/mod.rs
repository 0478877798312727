//! Candidate streamlines: uniform and critical-point seeding, bidirectional
//! fixed-step RK4 integration.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::topology::{CriticalKind, CriticalPoint};
use crate::volume::{VectorField, VolumeGrid};
use crate::{Error, Result, Vec3};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum SeedProvenance {
    Uniform,
    Critical { cp_id: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Seed {
    pub position: Vec3,
    pub provenance: SeedProvenance,
    /// Stream index of the generator that produced this seed.
    pub rng_index: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Streamline {
    pub id: usize,
    pub seed: Seed,
    /// Backward trace (reversed), the seed, then the forward trace.
    pub points: Vec<Vec3>,
    /// 3D length of each segment between consecutive points.
    pub segment_lengths: Vec<f64>,
    pub total_length: f64,
    pub from_critical: Option<usize>,
}

impl Streamline {
    /// Wraps an existing polyline; the seed is taken as its first point.
    pub fn from_points(id: usize, points: Vec<Vec3>, from_critical: Option<usize>) -> Self {
        let segment_lengths: Vec<f64> = points.windows(2).map(|w| (w[1] - w[0]).norm()).collect();
        let provenance = match from_critical {
            Some(cp_id) => SeedProvenance::Critical { cp_id },
            None => SeedProvenance::Uniform,
        };
        Streamline {
            id,
            seed: Seed { position: points.first().copied().unwrap_or_else(Vec3::zeros), provenance, rng_index: 0 },
            total_length: segment_lengths.iter().sum(),
            points,
            segment_lengths,
            from_critical,
        }
    }

    pub fn segment_count(&self) -> usize {
        self.segment_lengths.len()
    }
}

/// Export form: `{id, from_critical, points}`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct StreamlineRecord {
    pub id: usize,
    pub from_critical: Option<usize>,
    pub points: Vec<Vec3>,
}

impl From<&Streamline> for StreamlineRecord {
    fn from(s: &Streamline) -> Self {
        StreamlineRecord { id: s.id, from_critical: s.from_critical, points: s.points.clone() }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TraceConfig {
    /// RK4 step in world units.
    pub step_size: f64,
    /// Step limit per direction.
    pub max_steps: usize,
    pub min_speed: f64,
    pub min_points: usize,
    pub vicinity_radius: f64,
    pub seeds_per_cp: usize,
    pub uniform_seed_count: usize,
    pub rng_seed: u64,
}

pub const DEFAULT_UNIFORM_SEEDS: usize = 500;

impl TraceConfig {
    /// Resolution-scaled defaults for `field` on `grid`.
    pub fn for_grid(grid: &VolumeGrid, field: &str) -> Result<Self> {
        let v = grid.vector(field)?;
        let spacing = grid.spacing();
        Ok(TraceConfig {
            step_size: 0.25 * spacing.min(),
            max_steps: 1000,
            min_speed: 1e-6 * v.rms_magnitude(),
            min_points: 8,
            vicinity_radius: 1.5 * spacing.max(),
            seeds_per_cp: 8,
            uniform_seed_count: DEFAULT_UNIFORM_SEEDS,
            rng_seed: 0,
        })
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.step_size.is_finite() && self.step_size > 0.0) {
            return Err(Error::InvalidArgument("step_size must be positive".into()));
        }
        if self.max_steps < 1 {
            return Err(Error::InvalidArgument("max_steps must be at least 1".into()));
        }
        if !(self.vicinity_radius.is_finite() && self.vicinity_radius > 0.0) {
            return Err(Error::InvalidArgument("vicinity_radius must be positive".into()));
        }
        if !(self.min_speed.is_finite() && self.min_speed >= 0.0) {
            return Err(Error::InvalidArgument("min_speed must be non-negative".into()));
        }
        Ok(())
    }
}

/// Partial [`TraceConfig`]; unset fields fall back to [`TraceConfig::for_grid`].
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TraceOverrides {
    pub step_size: Option<f64>,
    pub max_steps: Option<usize>,
    pub min_speed: Option<f64>,
    pub min_points: Option<usize>,
    pub vicinity_radius: Option<f64>,
    pub seeds_per_cp: Option<usize>,
    pub uniform_seed_count: Option<usize>,
    pub rng_seed: Option<u64>,
}

impl TraceOverrides {
    pub fn resolve(&self, grid: &VolumeGrid, field: &str) -> Result<TraceConfig> {
        let d = TraceConfig::for_grid(grid, field)?;
        let cfg = TraceConfig {
            step_size: self.step_size.unwrap_or(d.step_size),
            max_steps: self.max_steps.unwrap_or(d.max_steps),
            min_speed: self.min_speed.unwrap_or(d.min_speed),
            min_points: self.min_points.unwrap_or(d.min_points),
            vicinity_radius: self.vicinity_radius.unwrap_or(d.vicinity_radius),
            seeds_per_cp: self.seeds_per_cp.unwrap_or(d.seeds_per_cp),
            uniform_seed_count: self.uniform_seed_count.unwrap_or(d.uniform_seed_count),
            rng_seed: self.rng_seed.unwrap_or(d.rng_seed),
        };
        cfg.validate()?;
        Ok(cfg)
    }
}

/// Independent generator for one seed: ChaCha8 keyed by `rng_seed`, stream
/// selected by the seed's index.
fn seed_rng(rng_seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
    rng.set_stream(index);
    rng
}

/// `uniform_seed_count` seeds uniform over the domain, then `seeds_per_cp`
/// seeds uniform in the ball of `vicinity_radius` around every vector zero
/// in `cps` (clamped to the domain). Other critical point kinds are ignored.
pub fn make_seeds(grid: &VolumeGrid, cps: &[CriticalPoint], cfg: &TraceConfig) -> Vec<Seed> {
    let (lo, hi) = grid.bounds();
    let n = cfg.uniform_seed_count as u64;
    let mut seeds: Vec<Seed> = (0..n)
        .map(|index| {
            let mut rng = seed_rng(cfg.rng_seed, index);
            let u = Vec3::from_fn(|_, _| rng.random::<f64>());
            Seed {
                position: lo + u.component_mul(&(hi - lo)),
                provenance: SeedProvenance::Uniform,
                rng_index: index,
            }
        })
        .collect();

    let mut index = n;
    for cp in cps.iter().filter(|cp| cp.kind == CriticalKind::VectorZero) {
        for _ in 0..cfg.seeds_per_cp {
            let mut rng = seed_rng(cfg.rng_seed, index);
            let offset = loop {
                let d = Vec3::from_fn(|_, _| rng.random_range(-1.0..=1.0));
                if d.norm_squared() <= 1.0 {
                    break d;
                }
            };
            let p = cp.position + offset * cfg.vicinity_radius;
            seeds.push(Seed {
                position: Vec3::from_fn(|a, _| p[a].clamp(lo[a], hi[a])),
                provenance: SeedProvenance::Critical { cp_id: cp.id },
                rng_index: index,
            });
            index += 1;
        }
    }
    seeds
}

fn trace_direction(v: &VectorField<'_>, start: Vec3, sign: f64, cfg: &TraceConfig) -> Vec<Vec3> {
    let grid = v.grid();
    let h = cfg.step_size;
    let f = |p: Vec3| v.sample(&p).map(|w| w * sign);
    let mut out = Vec::new();
    let mut p = start;
    for _ in 0..cfg.max_steps {
        let Some(k1) = f(p) else { break };
        let speed = k1.norm();
        if speed == 0.0 || speed < cfg.min_speed {
            break;
        }
        let Some(k2) = f(p + k1 * (0.5 * h)) else { break };
        let Some(k3) = f(p + k2 * (0.5 * h)) else { break };
        let Some(k4) = f(p + k3 * h) else { break };
        let next = p + (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (h / 6.0);
        if next == p || !grid.contains(&next) {
            break;
        }
        out.push(next);
        p = next;
    }
    out
}

/// Traces forward and backward from `seed`. Returns `None` when fewer than
/// `min_points` points survive.
pub fn integrate_streamline(
    grid: &VolumeGrid,
    field: &str,
    seed: &Seed,
    cfg: &TraceConfig,
) -> Result<Option<Streamline>> {
    let v = grid.vector(field)?;
    cfg.validate()?;
    Ok(integrate_with(&v, seed, cfg))
}

fn integrate_with(v: &VectorField<'_>, seed: &Seed, cfg: &TraceConfig) -> Option<Streamline> {
    if !v.grid().contains(&seed.position) {
        return None;
    }
    let backward = trace_direction(v, seed.position, -1.0, cfg);
    let forward = trace_direction(v, seed.position, 1.0, cfg);
    let mut points = Vec::with_capacity(backward.len() + forward.len() + 1);
    points.extend(backward.into_iter().rev());
    points.push(seed.position);
    points.extend(forward);
    if points.len() < cfg.min_points.max(2) {
        return None;
    }
    let segment_lengths: Vec<f64> = points.windows(2).map(|w| (w[1] - w[0]).norm()).collect();
    let total_length = segment_lengths.iter().sum();
    let from_critical = match seed.provenance {
        SeedProvenance::Critical { cp_id } => Some(cp_id),
        SeedProvenance::Uniform => None,
    };
    Some(Streamline { id: 0, seed: *seed, points, segment_lengths, total_length, from_critical })
}

/// Seeds and integrates every candidate; ids are dense in seed order.
pub fn build_candidates(
    grid: &VolumeGrid,
    field: &str,
    cps: &[CriticalPoint],
    cfg: &TraceConfig,
) -> Result<Vec<Streamline>> {
    let v = grid.vector(field)?;
    cfg.validate()?;
    let seeds = make_seeds(grid, cps, cfg);
    let traced: Vec<Option<Streamline>> = seeds.par_iter().map(|s| integrate_with(&v, s, cfg)).collect();
    Ok(traced
        .into_iter()
        .flatten()
        .enumerate()
        .map(|(id, mut s)| {
            s.id = id;
            s
        })
        .collect())
}
