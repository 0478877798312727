//! Analytic test fields with known critical structure.

use std::str::FromStr;

use nalgebra::Matrix3;
use serde::{Deserialize, Serialize};

use super::{Field, VolumeGrid};
use crate::{Error, Result, Vec3};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SyntheticKind {
    /// Scalar `value`, vector `vector`.
    Constant,
    /// Scalar `gradient · x`, vector `A (x - c)`.
    Linear,
    /// Scalar `|x - c|`, vector `(-(y - cy), x - cx, 0)`.
    Rotation,
    /// Scalar `-|x - c|²`, vector `x - c`.
    Radial,
    /// Two Gaussian bumps; vector is the sum of Gaussian-weighted sources.
    DoubleSource,
}

impl FromStr for SyntheticKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "constant" => SyntheticKind::Constant,
            "linear" => SyntheticKind::Linear,
            "rotation" => SyntheticKind::Rotation,
            "radial" => SyntheticKind::Radial,
            "double-source" => SyntheticKind::DoubleSource,
            other => return Err(Error::Spec(format!("unknown field kind `{other}`"))),
        })
    }
}

/// Optional knobs; anything unset takes a domain-relative default.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SyntheticParams {
    pub value: Option<f64>,
    pub vector: Option<[f64; 3]>,
    /// Row-major `A` for the linear vector field.
    pub matrix: Option<[[f64; 3]; 3]>,
    pub center: Option<[f64; 3]>,
    pub gradient: Option<[f64; 3]>,
    pub centers: Option<[[f64; 3]; 2]>,
    pub sigma: Option<f64>,
    pub scalar_name: Option<String>,
    pub vector_name: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SyntheticSpec {
    pub kind: SyntheticKind,
    pub dims: [usize; 3],
    #[serde(default)]
    pub origin: [f64; 3],
    /// Defaults to spanning the unit cube from `origin`.
    #[serde(default)]
    pub spacing: Option<[f64; 3]>,
    #[serde(default)]
    pub params: SyntheticParams,
}

impl SyntheticSpec {
    pub fn new(kind: SyntheticKind, dims: [usize; 3]) -> Self {
        SyntheticSpec { kind, dims, origin: [0.0; 3], spacing: None, params: SyntheticParams::default() }
    }
}

pub const DEFAULT_SCALAR_NAME: &str = "scalar";
pub const DEFAULT_VECTOR_NAME: &str = "velocity";

/// Builds a grid holding one scalar and one vector field sampled from the
/// analytic field named by `spec.kind`.
pub fn generate_synthetic(spec: &SyntheticSpec) -> Result<VolumeGrid> {
    let spacing = match spec.spacing {
        Some(s) => Vec3::from(s),
        None => {
            let mut s = Vec3::zeros();
            for a in 0..3 {
                if spec.dims[a] < 2 {
                    return Err(Error::InvalidGrid(format!("axis {a} has {} points", spec.dims[a])));
                }
                s[a] = 1.0 / (spec.dims[a] - 1) as f64;
            }
            s
        }
    };
    let grid = VolumeGrid::new(spec.dims, Vec3::from(spec.origin), spacing)?;
    let (lo, hi) = grid.bounds();
    let p = &spec.params;
    let center = p.center.map(Vec3::from).unwrap_or((lo + hi) * 0.5);

    let scalar: Box<dyn Fn(Vec3) -> f64> = match spec.kind {
        SyntheticKind::Constant => {
            let c = p.value.unwrap_or(0.0);
            Box::new(move |_| c)
        }
        SyntheticKind::Linear => {
            let g = Vec3::from(p.gradient.unwrap_or([1.0, 0.0, 0.0]));
            Box::new(move |x| g.dot(&x))
        }
        SyntheticKind::Rotation => Box::new(move |x| (x - center).norm()),
        SyntheticKind::Radial => Box::new(move |x| -(x - center).norm_squared()),
        SyntheticKind::DoubleSource => {
            let (c0, c1, s2) = double_source_params(p, lo, hi)?;
            Box::new(move |x| {
                (-(x - c0).norm_squared() / s2).exp() + (-(x - c1).norm_squared() / s2).exp()
            })
        }
    };

    let vector: Box<dyn Fn(Vec3) -> Vec3> = match spec.kind {
        SyntheticKind::Constant => {
            let v = Vec3::from(p.vector.unwrap_or([1.0, 0.0, 0.0]));
            Box::new(move |_| v)
        }
        SyntheticKind::Linear => {
            let a = p.matrix.map(|m| Matrix3::from_fn(|r, c| m[r][c])).unwrap_or_else(Matrix3::identity);
            Box::new(move |x| a * (x - center))
        }
        SyntheticKind::Rotation => {
            Box::new(move |x| Vec3::new(-(x.y - center.y), x.x - center.x, 0.0))
        }
        SyntheticKind::Radial => Box::new(move |x| x - center),
        SyntheticKind::DoubleSource => {
            let (c0, c1, s2) = double_source_params(p, lo, hi)?;
            Box::new(move |x| {
                (x - c0) * (-(x - c0).norm_squared() / s2).exp()
                    + (x - c1) * (-(x - c1).norm_squared() / s2).exp()
            })
        }
    };

    let [nx, ny, nz] = spec.dims;
    let mut s = Vec::with_capacity(grid.point_count());
    let mut v = Vec::with_capacity(3 * grid.point_count());
    for k in 0..nz {
        for j in 0..ny {
            for i in 0..nx {
                let x = grid.point_position(i, j, k);
                s.push(scalar(x) as f32);
                let w = vector(x);
                v.extend([w.x as f32, w.y as f32, w.z as f32]);
            }
        }
    }
    let scalar_name = p.scalar_name.clone().unwrap_or_else(|| DEFAULT_SCALAR_NAME.into());
    let vector_name = p.vector_name.clone().unwrap_or_else(|| DEFAULT_VECTOR_NAME.into());
    grid.with_field(Field::scalar(scalar_name, s))?.with_field(Field::vector(vector_name, v))
}

fn double_source_params(p: &SyntheticParams, lo: Vec3, hi: Vec3) -> Result<(Vec3, Vec3, f64)> {
    let ext = hi - lo;
    let [c0, c1] = p.centers.map(|c| c.map(Vec3::from)).unwrap_or([
        lo + ext.component_mul(&Vec3::new(0.3, 0.5, 0.5)),
        lo + ext.component_mul(&Vec3::new(0.7, 0.5, 0.5)),
    ]);
    let sigma = p.sigma.unwrap_or(0.2 * ext.max());
    if !(sigma.is_finite() && sigma > 0.0) {
        return Err(Error::Spec("sigma must be positive".into()));
    }
    Ok((c0, c1, sigma * sigma))
}
