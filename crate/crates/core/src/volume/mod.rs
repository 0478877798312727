//! Regular-grid volume holding named scalar and vector fields.
//!
//! All positions are world coordinates. Grid-index coordinates only appear
//! inside [`VolumeGrid::locate`] and the polygonizer.

mod svf;
mod synthetic;

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::{Error, Result, Vec3};

pub use svf::{encode_svf, load_svf, parse_svf, save_svf, SVF_MAGIC};
pub use synthetic::{generate_synthetic, SyntheticKind, SyntheticParams, SyntheticSpec};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FieldKind {
    Scalar,
    Vector3,
}

impl FieldKind {
    /// Number of `f32` components stored per grid point.
    pub fn components(self) -> usize {
        match self {
            FieldKind::Scalar => 1,
            FieldKind::Vector3 => 3,
        }
    }
}

impl fmt::Display for FieldKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            FieldKind::Scalar => "scalar",
            FieldKind::Vector3 => "vector3",
        })
    }
}

/// A named field. Samples are stored x-fastest, then y, then z; vector
/// fields interleave the three components per grid point.
#[derive(Debug, Clone, PartialEq)]
pub struct Field {
    pub name: String,
    pub kind: FieldKind,
    pub data: Vec<f32>,
}

impl Field {
    pub fn scalar(name: impl Into<String>, data: Vec<f32>) -> Self {
        Field { name: name.into(), kind: FieldKind::Scalar, data }
    }

    pub fn vector(name: impl Into<String>, data: Vec<f32>) -> Self {
        Field { name: name.into(), kind: FieldKind::Vector3, data }
    }
}

/// Result of a bounds query.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SamplePoint {
    pub position: Vec3,
    pub inside: bool,
}

/// Cell index plus fractional offsets inside that cell, each in `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CellCoord {
    pub cell: [usize; 3],
    pub frac: [f64; 3],
}

#[derive(Debug, Clone, PartialEq)]
pub struct VolumeGrid {
    dims: [usize; 3],
    origin: Vec3,
    spacing: Vec3,
    fields: Vec<Field>,
}

impl VolumeGrid {
    pub fn new(dims: [usize; 3], origin: Vec3, spacing: Vec3) -> Result<Self> {
        for (axis, &n) in ["nx", "ny", "nz"].iter().zip(&dims) {
            if n < 2 {
                return Err(Error::InvalidGrid(format!("{axis} = {n}, need at least 2")));
            }
        }
        if dims.iter().try_fold(1usize, |acc, &n| acc.checked_mul(n)).is_none() {
            return Err(Error::InvalidGrid("grid point count overflows".into()));
        }
        if !origin.iter().all(|v| v.is_finite()) {
            return Err(Error::InvalidGrid("origin must be finite".into()));
        }
        if !spacing.iter().all(|&s| s.is_finite() && s > 0.0) {
            return Err(Error::InvalidGrid("spacing must be finite and positive".into()));
        }
        Ok(VolumeGrid { dims, origin, spacing, fields: Vec::new() })
    }

    /// Grid spanning `[lo, hi]` with the given point counts.
    pub fn spanning(dims: [usize; 3], lo: Vec3, hi: Vec3) -> Result<Self> {
        let mut spacing = Vec3::zeros();
        for a in 0..3 {
            if dims[a] < 2 {
                return Err(Error::InvalidGrid(format!("axis {a} has {} points", dims[a])));
            }
            spacing[a] = (hi[a] - lo[a]) / (dims[a] - 1) as f64;
        }
        Self::new(dims, lo, spacing)
    }

    pub fn add_field(&mut self, field: Field) -> Result<()> {
        if self.fields.iter().any(|f| f.name == field.name) {
            return Err(Error::InvalidGrid(format!("duplicate field name `{}`", field.name)));
        }
        let expected = self.point_count() * field.kind.components();
        if field.data.len() != expected {
            return Err(Error::InvalidGrid(format!(
                "field `{}` has {} values, expected {expected}",
                field.name,
                field.data.len()
            )));
        }
        if let Some(index) = field.data.iter().position(|v| !v.is_finite()) {
            return Err(Error::Data { field: field.name, index });
        }
        self.fields.push(field);
        Ok(())
    }

    pub fn with_field(mut self, field: Field) -> Result<Self> {
        self.add_field(field)?;
        Ok(self)
    }

    pub fn dims(&self) -> [usize; 3] {
        self.dims
    }

    pub fn origin(&self) -> Vec3 {
        self.origin
    }

    pub fn spacing(&self) -> Vec3 {
        self.spacing
    }

    pub fn fields(&self) -> &[Field] {
        &self.fields
    }

    pub fn point_count(&self) -> usize {
        self.dims[0] * self.dims[1] * self.dims[2]
    }

    pub fn cell_dims(&self) -> [usize; 3] {
        [self.dims[0] - 1, self.dims[1] - 1, self.dims[2] - 1]
    }

    #[inline]
    pub fn linear_index(&self, i: usize, j: usize, k: usize) -> usize {
        i + self.dims[0] * (j + self.dims[1] * k)
    }

    #[inline]
    pub fn point_position(&self, i: usize, j: usize, k: usize) -> Vec3 {
        self.origin + Vec3::new(i as f64, j as f64, k as f64).component_mul(&self.spacing)
    }

    /// Lower and upper corners of the domain.
    pub fn bounds(&self) -> (Vec3, Vec3) {
        let n = Vec3::new(
            (self.dims[0] - 1) as f64,
            (self.dims[1] - 1) as f64,
            (self.dims[2] - 1) as f64,
        );
        (self.origin, self.origin + n.component_mul(&self.spacing))
    }

    pub fn contains(&self, p: &Vec3) -> bool {
        let (lo, hi) = self.bounds();
        (0..3).all(|a| p[a] >= lo[a] && p[a] <= hi[a])
    }

    pub fn sample_point(&self, p: Vec3) -> SamplePoint {
        SamplePoint { position: p, inside: self.contains(&p) }
    }

    /// Cell containing `p` and the fractional position inside it. Points on
    /// the upper boundary belong to the last cell along that axis.
    pub fn locate(&self, p: &Vec3) -> Option<CellCoord> {
        if !self.contains(p) {
            return None;
        }
        let mut cell = [0usize; 3];
        let mut frac = [0.0f64; 3];
        for a in 0..3 {
            let last = (self.dims[a] - 2) as f64;
            let mut t = ((p[a] - self.origin[a]) / self.spacing[a]).max(0.0);
            // grid points must reproduce stored values exactly
            let r = t.round();
            if (t - r).abs() < 1e-9 {
                t = r;
            }
            let c = t.floor().min(last);
            cell[a] = c as usize;
            frac[a] = (t - c).clamp(0.0, 1.0);
        }
        Some(CellCoord { cell, frac })
    }

    pub fn field(&self, name: &str) -> Result<&Field> {
        self.fields
            .iter()
            .find(|f| f.name == name)
            .ok_or_else(|| Error::UnknownField(name.to_string()))
    }

    fn field_of_kind(&self, name: &str, kind: FieldKind) -> Result<&Field> {
        let field = self.field(name)?;
        if field.kind != kind {
            return Err(Error::FieldKind { field: name.to_string(), expected: kind });
        }
        Ok(field)
    }

    pub fn scalar(&self, name: &str) -> Result<ScalarField<'_>> {
        let field = self.field_of_kind(name, FieldKind::Scalar)?;
        Ok(ScalarField { grid: self, data: &field.data })
    }

    pub fn vector(&self, name: &str) -> Result<VectorField<'_>> {
        let field = self.field_of_kind(name, FieldKind::Vector3)?;
        Ok(VectorField { grid: self, data: &field.data })
    }

    /// Trilinear interpolation of a scalar field at a world position.
    pub fn sample_scalar(&self, name: &str, p: Vec3) -> Result<f64> {
        self.scalar(name)?.sample(&p).ok_or(Error::OutOfBounds(p.into()))
    }

    /// Componentwise trilinear interpolation of a vector field.
    pub fn sample_vector(&self, name: &str, p: Vec3) -> Result<Vec3> {
        self.vector(name)?.sample(&p).ok_or(Error::OutOfBounds(p.into()))
    }
}

#[inline]
fn trilinear_weights(frac: [f64; 3]) -> [f64; 8] {
    let [fx, fy, fz] = frac;
    let (gx, gy, gz) = (1.0 - fx, 1.0 - fy, 1.0 - fz);
    [
        gx * gy * gz,
        fx * gy * gz,
        gx * fy * gz,
        fx * fy * gz,
        gx * gy * fz,
        fx * gy * fz,
        gx * fy * fz,
        fx * fy * fz,
    ]
}

/// Borrowed view of a scalar field.
#[derive(Debug, Clone, Copy)]
pub struct ScalarField<'a> {
    grid: &'a VolumeGrid,
    data: &'a [f32],
}

impl<'a> ScalarField<'a> {
    pub fn grid(&self) -> &'a VolumeGrid {
        self.grid
    }

    pub fn data(&self) -> &'a [f32] {
        self.data
    }

    #[inline]
    pub fn value(&self, i: usize, j: usize, k: usize) -> f64 {
        self.data[self.grid.linear_index(i, j, k)] as f64
    }

    /// `(min, max)` over all samples.
    pub fn range(&self) -> (f64, f64) {
        self.data.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| {
            (lo.min(v as f64), hi.max(v as f64))
        })
    }

    pub fn sample(&self, p: &Vec3) -> Option<f64> {
        let CellCoord { cell: [i, j, k], frac } = self.grid.locate(p)?;
        let w = trilinear_weights(frac);
        let mut acc = 0.0;
        for (c, wc) in w.iter().enumerate() {
            acc += wc * self.value(i + (c & 1), j + ((c >> 1) & 1), k + (c >> 2));
        }
        Some(acc)
    }
}

/// Borrowed view of a vector field.
#[derive(Debug, Clone, Copy)]
pub struct VectorField<'a> {
    grid: &'a VolumeGrid,
    data: &'a [f32],
}

impl<'a> VectorField<'a> {
    pub fn grid(&self) -> &'a VolumeGrid {
        self.grid
    }

    #[inline]
    pub fn value(&self, i: usize, j: usize, k: usize) -> Vec3 {
        let n = 3 * self.grid.linear_index(i, j, k);
        Vec3::new(self.data[n] as f64, self.data[n + 1] as f64, self.data[n + 2] as f64)
    }

    /// Root-mean-square magnitude over all grid points.
    pub fn rms_magnitude(&self) -> f64 {
        let sum: f64 = self.data.iter().map(|&v| (v as f64) * (v as f64)).sum();
        (sum / self.grid.point_count() as f64).sqrt()
    }

    pub fn sample(&self, p: &Vec3) -> Option<Vec3> {
        let CellCoord { cell: [i, j, k], frac } = self.grid.locate(p)?;
        let w = trilinear_weights(frac);
        let mut acc = Vec3::zeros();
        for (c, wc) in w.iter().enumerate() {
            acc += *wc * self.value(i + (c & 1), j + ((c >> 1) & 1), k + (c >> 2));
        }
        Some(acc)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn affine_grid() -> VolumeGrid {
        // f = 2x + 3y - z, v = (-y, x, 0) on an anisotropic grid
        let grid = VolumeGrid::new([5, 6, 4], Vec3::new(-0.5, -0.25, 0.1), Vec3::new(0.25, 0.2, 0.3))
            .unwrap();
        let mut s = Vec::new();
        let mut v = Vec::new();
        for k in 0..4 {
            for j in 0..6 {
                for i in 0..5 {
                    let p = grid.point_position(i, j, k);
                    s.push((2.0 * p.x + 3.0 * p.y - p.z) as f32);
                    v.extend([-p.y as f32, p.x as f32, 0.0]);
                }
            }
        }
        grid.with_field(Field::scalar("s", s)).unwrap().with_field(Field::vector("v", v)).unwrap()
    }

    fn random_inside(grid: &VolumeGrid, rng: &mut impl Rng) -> Vec3 {
        let (lo, hi) = grid.bounds();
        Vec3::from_fn(|a, _| lo[a] + rng.random::<f64>() * (hi[a] - lo[a]))
    }

    #[test]
    fn rejects_thin_axis() {
        let err = VolumeGrid::new([3, 1, 2], Vec3::zeros(), Vec3::repeat(1.0)).unwrap_err();
        assert!(matches!(err, Error::InvalidGrid(_)));
    }

    #[test]
    fn rejects_bad_field_length_and_nan() {
        let g = VolumeGrid::new([2, 2, 2], Vec3::zeros(), Vec3::repeat(1.0)).unwrap();
        assert!(g.clone().with_field(Field::scalar("a", vec![0.0; 7])).is_err());
        let mut data = vec![0.0; 8];
        data[5] = f32::NAN;
        match g.with_field(Field::scalar("a", data)) {
            Err(Error::Data { field, index }) => assert_eq!((field.as_str(), index), ("a", 5)),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn grid_point_identity() {
        let g = affine_grid();
        let s = g.scalar("s").unwrap();
        for k in 0..4 {
            for j in 0..6 {
                for i in 0..5 {
                    assert_eq!(s.sample(&g.point_position(i, j, k)).unwrap(), s.value(i, j, k));
                }
            }
        }
    }

    #[test]
    fn affine_exactness() {
        let g = affine_grid();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let mut worst = 0.0f64;
        for _ in 0..1000 {
            let p = random_inside(&g, &mut rng);
            let f = g.sample_scalar("s", p).unwrap();
            worst = worst.max((f - (2.0 * p.x + 3.0 * p.y - p.z)).abs());
            let v = g.sample_vector("v", p).unwrap();
            worst = worst.max((v - Vec3::new(-p.y, p.x, 0.0)).amax());
        }
        assert!(worst < 1e-5, "max error {worst}");
    }

    #[test]
    fn rotation_sample_value() {
        let g = affine_grid();
        let v = g.sample_vector("v", Vec3::new(0.25, 0.5, 0.1)).unwrap();
        assert!((v - Vec3::new(-0.5, 0.25, 0.0)).norm() < 1e-5);
    }

    #[test]
    fn continuous_across_faces() {
        let g = affine_grid();
        // non-affine field to make the check meaningful
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let data: Vec<f32> = (0..g.point_count()).map(|_| rng.random::<f32>()).collect();
        let g = g.with_field(Field::scalar("noise", data)).unwrap();
        let s = g.scalar("noise").unwrap();
        let [cx, _, _] = g.cell_dims();
        for _ in 0..1000 {
            let mut p = random_inside(&g, &mut rng);
            let face = rng.random_range(1..cx);
            p.x = g.origin().x + face as f64 * g.spacing().x;
            let below = s.sample(&(p - Vec3::x() * 1e-9)).unwrap();
            let above = s.sample(&(p + Vec3::x() * 1e-9)).unwrap();
            assert!((below - above).abs() < 1e-5);
        }
    }

    #[test]
    fn sampling_errors() {
        let g = affine_grid();
        assert!(matches!(
            g.sample_scalar("s", Vec3::new(10.0, 0.0, 0.2)),
            Err(Error::OutOfBounds(_))
        ));
        assert!(matches!(g.sample_scalar("nope", g.origin()), Err(Error::UnknownField(_))));
        assert!(matches!(g.sample_scalar("v", g.origin()), Err(Error::FieldKind { .. })));
        assert!(!g.sample_point(Vec3::new(10.0, 0.0, 0.0)).inside);
        assert!(g.sample_point(g.bounds().1).inside);
    }
}
