//! Semitransparent isosurfaces by marching cubes.

mod export;
mod tables;

use std::collections::HashMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::topology::{CriticalKind, CriticalPoint};
use crate::volume::VolumeGrid;
use crate::{Error, Result, Vec3};

pub use export::{meshes_to_mtl, meshes_to_obj};
pub use tables::{EDGE_TABLE, TRIANGLE_TABLE};

pub const DEFAULT_OPACITY: f64 = 0.4;
pub const DEFAULT_OFFSET_FRACTION: f64 = 0.05;
pub const WELD_RADIUS: f64 = 1e-9;

const PALETTE: [[f32; 3]; 6] = [
    [0.25, 0.45, 0.85],
    [0.30, 0.70, 0.35],
    [0.85, 0.55, 0.20],
    [0.60, 0.35, 0.75],
    [0.20, 0.70, 0.70],
    [0.80, 0.30, 0.35],
];

/// Display colour for the `k`-th surface.
pub fn palette_color(surface_index: usize) -> [f32; 3] {
    PALETTE[surface_index % PALETTE.len()]
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IsosurfaceMesh {
    /// Creation order; identifies the surface during occlusion weighting.
    pub surface_index: usize,
    pub isovalue: f64,
    pub opacity: f64,
    pub color: [f32; 3],
    pub vertices: Vec<Vec3>,
    pub triangles: Vec<[u32; 3]>,
}

impl IsosurfaceMesh {
    pub fn empty(surface_index: usize, isovalue: f64, opacity: f64) -> Self {
        IsosurfaceMesh {
            surface_index,
            isovalue,
            opacity,
            color: palette_color(surface_index),
            vertices: Vec::new(),
            triangles: Vec::new(),
        }
    }

    pub fn with_index(mut self, surface_index: usize) -> Self {
        self.surface_index = surface_index;
        self.color = palette_color(surface_index);
        self
    }

    pub fn triangle(&self, t: usize) -> [Vec3; 3] {
        self.triangles[t].map(|i| self.vertices[i as usize])
    }

    /// Merges vertices closer than `radius` and drops triangles that
    /// collapse as a result.
    pub fn weld(&self, radius: f64) -> IsosurfaceMesh {
        let r = radius.max(f64::MIN_POSITIVE);
        let mut buckets: HashMap<[i64; 3], Vec<u32>> = HashMap::new();
        let mut vertices: Vec<Vec3> = Vec::new();
        let mut remap = Vec::with_capacity(self.vertices.len());
        for p in &self.vertices {
            let b = p.map(|c| (c / r).floor() as i64);
            let mut hit = None;
            'search: for dx in -1..=1 {
                for dy in -1..=1 {
                    for dz in -1..=1 {
                        if let Some(ids) = buckets.get(&[b.x + dx, b.y + dy, b.z + dz]) {
                            if let Some(&id) = ids.iter().find(|&&id| (vertices[id as usize] - p).norm() <= radius) {
                                hit = Some(id);
                                break 'search;
                            }
                        }
                    }
                }
            }
            let id = hit.unwrap_or_else(|| {
                let id = vertices.len() as u32;
                vertices.push(*p);
                buckets.entry([b.x, b.y, b.z]).or_default().push(id);
                id
            });
            remap.push(id);
        }
        let triangles = self
            .triangles
            .iter()
            .map(|t| t.map(|i| remap[i as usize]))
            .filter(|[a, b, c]| a != b && b != c && a != c)
            .collect();
        IsosurfaceMesh { vertices, triangles, ..self.clone() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeshStats {
    pub triangle_count: usize,
    pub area: f64,
    /// Every undirected edge has exactly two incident triangles.
    pub closed: bool,
    /// `[min, max]`, absent for meshes without vertices.
    pub bbox: Option<[[f64; 3]; 2]>,
}

pub fn mesh_stats(mesh: &IsosurfaceMesh) -> MeshStats {
    let area = (0..mesh.triangles.len())
        .map(|t| {
            let [a, b, c] = mesh.triangle(t);
            0.5 * (b - a).cross(&(c - a)).norm()
        })
        .sum();
    let mut edges: HashMap<(u32, u32), u32> = HashMap::new();
    for t in &mesh.triangles {
        for e in 0..3 {
            let (a, b) = (t[e], t[(e + 1) % 3]);
            *edges.entry((a.min(b), a.max(b))).or_default() += 1;
        }
    }
    let bbox = mesh.vertices.iter().fold(None, |acc: Option<[[f64; 3]; 2]>, p| {
        let [mut lo, mut hi] = acc.unwrap_or([[f64::INFINITY; 3], [f64::NEG_INFINITY; 3]]);
        for a in 0..3 {
            lo[a] = lo[a].min(p[a]);
            hi[a] = hi[a].max(p[a]);
        }
        Some([lo, hi])
    });
    MeshStats {
        triangle_count: mesh.triangles.len(),
        area,
        closed: edges.values().all(|&n| n == 2),
        bbox,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IsovalueSuggestion {
    pub critical_point_id: usize,
    pub suggested_isovalue: f64,
    pub offset: f64,
}

/// One isovalue per scalar extremum, nudged toward the interior of the
/// extremum's basin by `offset_fraction` of the field range.
pub fn suggest_isovalues(
    cps: &[CriticalPoint],
    offset_fraction: f64,
    field_range: (f64, f64),
) -> Result<Vec<IsovalueSuggestion>> {
    if !(offset_fraction > 0.0 && offset_fraction < 1.0) {
        return Err(Error::InvalidArgument(format!("offset fraction {offset_fraction} not in (0, 1)")));
    }
    let offset = offset_fraction * (field_range.1 - field_range.0);
    cps.iter()
        .map(|cp| {
            let suggested_isovalue = match cp.kind {
                CriticalKind::ScalarMax => cp.value - offset,
                CriticalKind::ScalarMin => cp.value + offset,
                CriticalKind::VectorZero => {
                    return Err(Error::InvalidArgument(format!(
                        "critical point {} is a vector zero, not a scalar extremum",
                        cp.id
                    )))
                }
            };
            Ok(IsovalueSuggestion { critical_point_id: cp.id, suggested_isovalue, offset })
        })
        .collect()
}

const CORNERS: [[usize; 3]; 8] = [
    [0, 0, 0],
    [1, 0, 0],
    [1, 1, 0],
    [0, 1, 0],
    [0, 0, 1],
    [1, 0, 1],
    [1, 1, 1],
    [0, 1, 1],
];

const EDGES: [[usize; 2]; 12] = [
    [0, 1],
    [1, 2],
    [2, 3],
    [3, 0],
    [4, 5],
    [5, 6],
    [6, 7],
    [7, 4],
    [0, 4],
    [1, 5],
    [2, 6],
    [3, 7],
];

/// Marching cubes over every cell. Vertices are interpolated linearly along
/// crossed edges, always from the edge's lower corner so neighbouring cells
/// produce bit-identical positions; they are not shared across cells (see
/// [`IsosurfaceMesh::weld`]). Triangle normals point toward increasing
/// scalar values. An isovalue outside the field range yields an empty mesh.
pub fn polygonize(grid: &VolumeGrid, field: &str, isovalue: f64, opacity: f64) -> Result<IsosurfaceMesh> {
    let s = grid.scalar(field)?;
    if !(0.0..=1.0).contains(&opacity) {
        return Err(Error::InvalidArgument(format!("opacity {opacity} not in [0, 1]")));
    }
    if !isovalue.is_finite() {
        return Err(Error::InvalidArgument("isovalue must be finite".into()));
    }
    let mut mesh = IsosurfaceMesh::empty(0, isovalue, opacity);
    let [cx, cy, cz] = grid.cell_dims();

    let slabs: Vec<(Vec<Vec3>, Vec<[u32; 3]>)> = (0..cz)
        .into_par_iter()
        .map(|k| {
            let mut verts = Vec::new();
            let mut tris = Vec::new();
            for j in 0..cy {
                for i in 0..cx {
                    let vals = CORNERS.map(|[dx, dy, dz]| s.value(i + dx, j + dy, k + dz));
                    let case = vals
                        .iter()
                        .enumerate()
                        .fold(0usize, |acc, (n, &v)| if v < isovalue { acc | 1 << n } else { acc });
                    let crossed = EDGE_TABLE[case];
                    if crossed == 0 {
                        continue;
                    }
                    let mut local = [u32::MAX; 12];
                    for (e, [a, b]) in EDGES.iter().enumerate() {
                        if crossed & (1 << e) == 0 {
                            continue;
                        }
                        // lower corner first: offsets compare lexicographically by (z, y, x)
                        let (a, b) = if (CORNERS[*a][2], CORNERS[*a][1], CORNERS[*a][0])
                            < (CORNERS[*b][2], CORNERS[*b][1], CORNERS[*b][0])
                        {
                            (*a, *b)
                        } else {
                            (*b, *a)
                        };
                        let pa = grid.point_position(i + CORNERS[a][0], j + CORNERS[a][1], k + CORNERS[a][2]);
                        let pb = grid.point_position(i + CORNERS[b][0], j + CORNERS[b][1], k + CORNERS[b][2]);
                        let (fa, fb) = (vals[a], vals[b]);
                        let mu = if fb == fa { 0.5 } else { (isovalue - fa) / (fb - fa) };
                        local[e] = verts.len() as u32;
                        verts.push(pa + (pb - pa) * mu);
                    }
                    for tri in TRIANGLE_TABLE[case].chunks_exact(3).take_while(|t| t[0] >= 0) {
                        // table winding faces the low side; flip toward increasing values
                        tris.push([local[tri[0] as usize], local[tri[2] as usize], local[tri[1] as usize]]);
                    }
                }
            }
            (verts, tris)
        })
        .collect();

    for (verts, tris) in slabs {
        let base = mesh.vertices.len() as u32;
        mesh.vertices.extend(verts);
        mesh.triangles.extend(tris.into_iter().map(|t| t.map(|i| i + base)));
    }
    Ok(mesh)
}
