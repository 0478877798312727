//! Critical points of scalar fields (strict edge-neighbour extrema) and of
//! vector fields (zeros of the piecewise-linear field over a tetrahedral
//! split of every cell).

mod tet;

use std::collections::HashMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::volume::VolumeGrid;
use crate::{Result, Vec3};

pub use tet::{
    decompose_cell_tets, find_vector_zero_in_tet, find_vector_zero_in_tet_with, BarycentricSolution,
    TetCell, TetZero, DEFAULT_INSIDE_EPS, DEFAULT_SINGULAR_DET,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CriticalKind {
    ScalarMax,
    ScalarMin,
    VectorZero,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CriticalPoint {
    pub id: usize,
    pub position: Vec3,
    pub kind: CriticalKind,
    pub field: String,
    /// Scalar value at the point; zero for vector zeros.
    pub value: f64,
    /// Owning cell.
    pub cell: [usize; 3],
}

/// Grid points whose value is strictly above (or below) every axis-edge
/// neighbour. Maxima come first by descending value, then minima by
/// ascending value; ties keep grid order.
pub fn extract_scalar_extrema(
    grid: &VolumeGrid,
    field: &str,
    include_boundary: bool,
) -> Result<Vec<CriticalPoint>> {
    let s = grid.scalar(field)?;
    let [nx, ny, nz] = grid.dims();
    let mut maxima = Vec::new();
    let mut minima = Vec::new();
    for k in 0..nz {
        for j in 0..ny {
            for i in 0..nx {
                let idx = [i, j, k];
                let on_boundary = (0..3).any(|a| idx[a] == 0 || idx[a] == grid.dims()[a] - 1);
                if on_boundary && !include_boundary {
                    continue;
                }
                let v = s.value(i, j, k);
                let (mut above, mut below) = (true, true);
                for a in 0..3 {
                    for step in [-1i64, 1] {
                        let n = idx[a] as i64 + step;
                        if n < 0 || n >= grid.dims()[a] as i64 {
                            continue;
                        }
                        let mut nb = idx;
                        nb[a] = n as usize;
                        let w = s.value(nb[0], nb[1], nb[2]);
                        above &= v > w;
                        below &= v < w;
                    }
                }
                if above {
                    maxima.push((idx, v));
                } else if below {
                    minima.push((idx, v));
                }
            }
        }
    }
    maxima.sort_by(|a, b| b.1.total_cmp(&a.1));
    minima.sort_by(|a, b| a.1.total_cmp(&b.1));

    let cells = grid.cell_dims();
    let out = maxima
        .into_iter()
        .map(|m| (m, CriticalKind::ScalarMax))
        .chain(minima.into_iter().map(|m| (m, CriticalKind::ScalarMin)))
        .enumerate()
        .map(|(id, ((idx, value), kind))| CriticalPoint {
            id,
            position: grid.point_position(idx[0], idx[1], idx[2]),
            kind,
            field: field.to_string(),
            value,
            cell: [0, 1, 2].map(|a| idx[a].min(cells[a] - 1)),
        })
        .collect();
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VectorZeroOptions {
    /// Slack on the barycentric feasibility constraints.
    pub inside_eps: f64,
    /// Zeros closer than this (world units) are merged.
    pub merge_radius: f64,
    pub singular_det: f64,
}

impl Default for VectorZeroOptions {
    fn default() -> Self {
        VectorZeroOptions {
            inside_eps: DEFAULT_INSIDE_EPS,
            merge_radius: 1e-6,
            singular_det: DEFAULT_SINGULAR_DET,
        }
    }
}

pub fn extract_vector_critical_points(grid: &VolumeGrid, field: &str) -> Result<Vec<CriticalPoint>> {
    extract_vector_critical_points_with(grid, field, &VectorZeroOptions::default())
}

/// Zeros of the vector field over every cell's six tetrahedra, merged within
/// `merge_radius` and reported in cell order.
pub fn extract_vector_critical_points_with(
    grid: &VolumeGrid,
    field: &str,
    opts: &VectorZeroOptions,
) -> Result<Vec<CriticalPoint>> {
    let v = grid.vector(field)?;
    let [cx, cy, cz] = grid.cell_dims();
    let found: Vec<([usize; 3], Vec3)> = (0..cx * cy * cz)
        .into_par_iter()
        .flat_map_iter(|n| {
            let cell = [n % cx, (n / cx) % cy, n / (cx * cy)];
            decompose_cell_tets(&v, cell)
                .into_iter()
                .filter(may_contain_zero)
                .filter_map(|t| {
                    find_vector_zero_in_tet_with(&t, opts.inside_eps, opts.singular_det).position()
                })
                .map(move |p| (cell, p))
                .collect::<Vec<_>>()
        })
        .collect();

    let r = opts.merge_radius.max(f64::MIN_POSITIVE);
    let bucket = |p: &Vec3| p.map(|c| (c / r).floor() as i64);
    let mut buckets: HashMap<[i64; 3], Vec<usize>> = HashMap::new();
    let mut out: Vec<CriticalPoint> = Vec::new();
    for (cell, p) in found {
        let b = bucket(&p);
        let mut duplicate = false;
        'search: for dx in -1..=1 {
            for dy in -1..=1 {
                for dz in -1..=1 {
                    if let Some(ids) = buckets.get(&[b.x + dx, b.y + dy, b.z + dz]) {
                        if ids.iter().any(|&id| (out[id].position - p).norm() <= opts.merge_radius) {
                            duplicate = true;
                            break 'search;
                        }
                    }
                }
            }
        }
        if duplicate {
            continue;
        }
        let id = out.len();
        buckets.entry([b.x, b.y, b.z]).or_default().push(id);
        out.push(CriticalPoint {
            id,
            position: p,
            kind: CriticalKind::VectorZero,
            field: field.to_string(),
            value: 0.0,
            cell,
        });
    }
    Ok(out)
}

/// Scalar extrema followed by vector zeros, with ids renumbered to be
/// unique across both lists.
pub fn extract_critical_points(
    grid: &VolumeGrid,
    scalar_field: &str,
    vector_field: &str,
    include_boundary: bool,
) -> Result<Vec<CriticalPoint>> {
    let mut cps = extract_scalar_extrema(grid, scalar_field, include_boundary)?;
    cps.extend(extract_vector_critical_points(grid, vector_field)?);
    for (id, cp) in cps.iter_mut().enumerate() {
        cp.id = id;
    }
    Ok(cps)
}

/// Number of critical points of each kind.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CriticalCounts {
    pub scalar_max: usize,
    pub scalar_min: usize,
    pub vector_zero: usize,
}

impl CriticalCounts {
    pub fn of(cps: &[CriticalPoint]) -> Self {
        let mut c = CriticalCounts::default();
        for cp in cps {
            match cp.kind {
                CriticalKind::ScalarMax => c.scalar_max += 1,
                CriticalKind::ScalarMin => c.scalar_min += 1,
                CriticalKind::VectorZero => c.vector_zero += 1,
            }
        }
        c
    }
}

/// A linear field over a tet stays inside the convex hull of its vertex
/// values, so one strictly one-signed component rules out a zero.
fn may_contain_zero(tet: &TetCell) -> bool {
    (0..3).all(|c| {
        let pos = tet.values.iter().all(|v| v[c] > 0.0);
        let neg = tet.values.iter().all(|v| v[c] < 0.0);
        !(pos || neg)
    })
}
