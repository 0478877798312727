//! Tetrahedral split of hexahedral cells and the per-tetrahedron linear
//! solve for a vanishing vector value.

use nalgebra::Matrix3;

use crate::volume::VectorField;
use crate::Vec3;

/// Four vertices and the vector value at each.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TetCell {
    pub vertices: [Vec3; 4],
    pub values: [Vec3; 4],
}

impl TetCell {
    /// Signed volume; positive for the orientation produced by
    /// [`decompose_cell_tets`].
    pub fn volume(&self) -> f64 {
        let [p0, p1, p2, p3] = self.vertices;
        (p1 - p0).cross(&(p2 - p0)).dot(&(p3 - p0)) / 6.0
    }
}

/// Barycentric weights of `P0`, `P1`, `P2` (and `s` for `P3`).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BarycentricSolution {
    pub p: f64,
    pub q: f64,
    pub r: f64,
    pub s: f64,
    pub inside: bool,
}

impl BarycentricSolution {
    pub fn new(p: f64, q: f64, r: f64, eps: f64) -> Self {
        let s = 1.0 - p - q - r;
        let inside = p >= -eps && q >= -eps && r >= -eps && s >= -eps;
        BarycentricSolution { p, q, r, s, inside }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TetZero {
    /// `|det M_v|` fell below the singularity threshold; no isolated zero.
    Singular { det: f64 },
    Outside(BarycentricSolution),
    Inside { bary: BarycentricSolution, position: Vec3 },
}

impl TetZero {
    pub fn position(&self) -> Option<Vec3> {
        match self {
            TetZero::Inside { position, .. } => Some(*position),
            _ => None,
        }
    }

    pub fn solution(&self) -> Option<BarycentricSolution> {
        match *self {
            TetZero::Singular { .. } => None,
            TetZero::Outside(b) | TetZero::Inside { bary: b, .. } => Some(b),
        }
    }

    pub fn is_degenerate(&self) -> bool {
        matches!(self, TetZero::Singular { .. })
    }
}

pub const DEFAULT_INSIDE_EPS: f64 = 1e-9;
pub const DEFAULT_SINGULAR_DET: f64 = 1e-12;

/// Solves `M_v (p, q, r)ᵀ = -value_3` where the columns of `M_v` are
/// `value_i - value_3`.
pub fn find_vector_zero_in_tet(tet: &TetCell) -> TetZero {
    find_vector_zero_in_tet_with(tet, DEFAULT_INSIDE_EPS, DEFAULT_SINGULAR_DET)
}

pub fn find_vector_zero_in_tet_with(tet: &TetCell, inside_eps: f64, singular_det: f64) -> TetZero {
    let [v0, v1, v2, v3] = tet.values;
    let m = Matrix3::from_columns(&[v0 - v3, v1 - v3, v2 - v3]);
    let det = m.determinant();
    if det.is_nan() || det.abs() < singular_det {
        return TetZero::Singular { det };
    }
    let Some(x) = m.lu().solve(&(-v3)) else {
        return TetZero::Singular { det };
    };
    let bary = BarycentricSolution::new(x[0], x[1], x[2], inside_eps);
    if !bary.inside {
        return TetZero::Outside(bary);
    }
    let [p0, p1, p2, p3] = tet.vertices;
    let position = p0 * bary.p + p1 * bary.q + p2 * bary.r + p3 * bary.s;
    TetZero::Inside { bary, position }
}

/// Corner offsets of the six tetrahedra. Every tet runs from corner
/// `(0,0,0)` to `(1,1,1)` along one monotone edge path; odd permutations
/// swap the middle vertices to keep volumes positive.
const TET_CORNERS: [[[usize; 3]; 4]; 6] = [
    // x, y, z
    [[0, 0, 0], [1, 0, 0], [1, 1, 0], [1, 1, 1]],
    // y, z, x
    [[0, 0, 0], [0, 1, 0], [0, 1, 1], [1, 1, 1]],
    // z, x, y
    [[0, 0, 0], [0, 0, 1], [1, 0, 1], [1, 1, 1]],
    // x, z, y (odd)
    [[0, 0, 0], [1, 0, 1], [1, 0, 0], [1, 1, 1]],
    // y, x, z (odd)
    [[0, 0, 0], [1, 1, 0], [0, 1, 0], [1, 1, 1]],
    // z, y, x (odd)
    [[0, 0, 0], [0, 1, 1], [0, 0, 1], [1, 1, 1]],
];

/// Six tetrahedra tiling cell `cell` around its main diagonal.
pub fn decompose_cell_tets(field: &VectorField<'_>, cell: [usize; 3]) -> [TetCell; 6] {
    let grid = field.grid();
    let [i, j, k] = cell;
    TET_CORNERS.map(|corners| {
        let mut vertices = [Vec3::zeros(); 4];
        let mut values = [Vec3::zeros(); 4];
        for (n, [dx, dy, dz]) in corners.into_iter().enumerate() {
            vertices[n] = grid.point_position(i + dx, j + dy, k + dz);
            values[n] = field.value(i + dx, j + dy, k + dz);
        }
        TetCell { vertices, values }
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::volume::{Field, VolumeGrid};
    use std::collections::HashMap;

    fn grid_with_zero_field(spacing: Vec3) -> VolumeGrid {
        VolumeGrid::new([2, 2, 2], Vec3::zeros(), spacing)
            .unwrap()
            .with_field(Field::vector("v", vec![0.0; 24]))
            .unwrap()
    }

    #[test]
    fn unit_cube_volumes() {
        let g = grid_with_zero_field(Vec3::repeat(1.0));
        for tet in decompose_cell_tets(&g.vector("v").unwrap(), [0, 0, 0]) {
            assert!((tet.volume() - 1.0 / 6.0).abs() < 1e-15);
        }
    }

    #[test]
    fn anisotropic_volume_sum() {
        let g = grid_with_zero_field(Vec3::new(2.0, 3.0, 5.0));
        let tets = decompose_cell_tets(&g.vector("v").unwrap(), [0, 0, 0]);
        assert!(tets.iter().all(|t| t.volume() > 0.0));
        let total: f64 = tets.iter().map(TetCell::volume).sum();
        assert!((total - 30.0).abs() < 30.0 * 1e-12);
    }

    #[test]
    fn tets_do_not_overlap() {
        let g = grid_with_zero_field(Vec3::repeat(1.0));
        let tets = decompose_cell_tets(&g.vector("v").unwrap(), [0, 0, 0]);
        let bary_of = |t: &TetCell, x: Vec3| {
            let [p0, p1, p2, p3] = t.vertices;
            let m = Matrix3::from_columns(&[p0 - p3, p1 - p3, p2 - p3]);
            let w = m.lu().solve(&(x - p3)).unwrap();
            [w[0], w[1], w[2], 1.0 - w.sum()]
        };
        for (a, ta) in tets.iter().enumerate() {
            let centroid = ta.vertices.iter().sum::<Vec3>() / 4.0;
            for (b, tb) in tets.iter().enumerate() {
                let inside = bary_of(tb, centroid).iter().all(|&w| w > 1e-12);
                assert_eq!(inside, a == b, "centroid of {a} vs tet {b}");
            }
        }
    }

    #[test]
    fn faces_split_along_min_to_max_diagonal() {
        let g = grid_with_zero_field(Vec3::repeat(1.0));
        let tets = decompose_cell_tets(&g.vector("v").unwrap(), [0, 0, 0]);
        // (axis, side) -> triangles lying in that cube face
        let mut faces: HashMap<(usize, i64), Vec<[[i64; 3]; 3]>> = HashMap::new();
        for t in &tets {
            let v: Vec<[i64; 3]> = t.vertices.iter().map(|p| [p.x as i64, p.y as i64, p.z as i64]).collect();
            for skip in 0..4 {
                let tri: Vec<[i64; 3]> = (0..4).filter(|&n| n != skip).map(|n| v[n]).collect();
                for axis in 0..3 {
                    let side = tri[0][axis];
                    if tri.iter().all(|p| p[axis] == side) {
                        faces.entry((axis, side)).or_default().push([tri[0], tri[1], tri[2]]);
                    }
                }
            }
        }
        assert_eq!(faces.len(), 6);
        for ((axis, side), tris) in &faces {
            assert_eq!(tris.len(), 2, "face {axis}/{side}");
            // shared edge of the two triangles must be the face's min->max diagonal
            let shared: Vec<[i64; 3]> =
                tris[0].iter().filter(|p| tris[1].contains(p)).cloned().collect();
            assert_eq!(shared.len(), 2);
            let mut lo = [0i64; 3];
            let mut hi = [1i64; 3];
            lo[*axis] = *side;
            hi[*axis] = *side;
            assert!(shared.contains(&lo) && shared.contains(&hi), "face {axis}/{side}: {shared:?}");
        }
    }

    fn unit_tet(values: [Vec3; 4]) -> TetCell {
        TetCell {
            vertices: [Vec3::new(1.0, 0.0, 0.0), Vec3::new(0.0, 1.0, 0.0), Vec3::new(0.0, 0.0, 1.0), Vec3::zeros()],
            values,
        }
    }

    #[test]
    fn zero_at_vertex() {
        let tet = unit_tet([Vec3::x(), Vec3::y(), Vec3::z(), Vec3::zeros()]);
        match find_vector_zero_in_tet(&tet) {
            TetZero::Inside { bary, position } => {
                assert_eq!((bary.p, bary.q, bary.r), (0.0, 0.0, 0.0));
                assert_eq!(position, tet.vertices[3]);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn constant_is_singular() {
        let c = Vec3::new(1.0, 2.0, 3.0);
        let z = find_vector_zero_in_tet(&unit_tet([c; 4]));
        assert!(z.is_degenerate());
        assert!(z.position().is_none() && z.solution().is_none());
    }

    #[test]
    fn linear_field_zero_inside() {
        let vertices = [
            Vec3::new(0.1, 0.0, 0.0),
            Vec3::new(0.9, 0.2, 0.1),
            Vec3::new(0.3, 0.8, 0.2),
            Vec3::new(0.4, 0.3, 0.9),
        ];
        let c = vertices.iter().sum::<Vec3>() / 4.0 + Vec3::new(0.01, -0.02, 0.015);
        let a = Matrix3::new(1.0, 0.5, 0.0, -0.3, 2.0, 0.1, 0.0, 0.2, 0.7);
        let tet = TetCell { vertices, values: vertices.map(|p| a * (p - c)) };
        let pos = find_vector_zero_in_tet(&tet).position().expect("inside");
        assert!((pos - c).norm() < 1e-9);
        // direct substitution: barycentric interpolation of values vanishes
        let b = find_vector_zero_in_tet(&tet).solution().unwrap();
        let v = tet.values[0] * b.p + tet.values[1] * b.q + tet.values[2] * b.r + tet.values[3] * b.s;
        assert!(v.norm() < 1e-12);
    }

    #[test]
    fn zero_outside_tet_reported_outside() {
        let tet = unit_tet([Vec3::x(), Vec3::y(), Vec3::z(), Vec3::zeros()].map(|v| v - Vec3::repeat(2.0)));
        assert!(matches!(find_vector_zero_in_tet(&tet), TetZero::Outside(_)));
    }
}
