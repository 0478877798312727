use nalgebra::{Isometry3, Perspective3, Point3};
use serde::{Deserialize, Serialize};

use crate::{Error, Result, Vec3};

/// Right-handed look-at pinhole camera. Pixel origin is top-left, y down.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Camera {
    pub eye: Vec3,
    pub target: Vec3,
    pub up: Vec3,
    /// Vertical field of view in radians.
    pub fov_y: f64,
    /// `[width, height]` in pixels.
    pub viewport: [u32; 2],
    pub near: f64,
    pub far: f64,
}

impl Camera {
    pub fn look_at(eye: Vec3, target: Vec3, up: Vec3) -> Self {
        Camera {
            eye,
            target,
            up,
            fov_y: std::f64::consts::FRAC_PI_3,
            viewport: [800, 600],
            near: 0.01,
            far: 1000.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let finite = |v: &Vec3| v.iter().all(|c| c.is_finite());
        if !(finite(&self.eye) && finite(&self.target) && finite(&self.up)) {
            return Err(Error::Camera("non-finite vector".into()));
        }
        let dir = self.target - self.eye;
        if dir.norm() == 0.0 {
            return Err(Error::Camera("eye and target coincide".into()));
        }
        if self.up.cross(&dir).norm() <= 1e-12 * self.up.norm() * dir.norm() {
            return Err(Error::Camera("up is parallel to the view direction".into()));
        }
        if !(self.fov_y > 0.0 && self.fov_y < std::f64::consts::PI) {
            return Err(Error::Camera(format!("fov_y {} not in (0, pi)", self.fov_y)));
        }
        if !(self.near > 0.0 && self.far > self.near && self.far.is_finite()) {
            return Err(Error::Camera("need 0 < near < far".into()));
        }
        if self.viewport[0] == 0 || self.viewport[1] == 0 {
            return Err(Error::Camera("empty viewport".into()));
        }
        Ok(())
    }

    pub fn projector(&self) -> Result<Projector> {
        self.validate()?;
        let [w, h] = self.viewport.map(f64::from);
        Ok(Projector {
            view: Isometry3::look_at_rh(&Point3::from(self.eye), &Point3::from(self.target), &self.up),
            perspective: Perspective3::new(w / h, self.fov_y, self.near, self.far),
            width: w,
            height: h,
            near: self.near,
            far: self.far,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Projected {
    Visible { pixel: [f64; 2], depth: f64 },
    Clipped,
}

impl Projected {
    pub fn pixel(&self) -> Option<[f64; 2]> {
        match self {
            Projected::Visible { pixel, .. } => Some(*pixel),
            Projected::Clipped => None,
        }
    }
}

/// Precomputed view and projection transforms of a validated [`Camera`].
#[derive(Debug, Clone, Copy)]
pub struct Projector {
    view: Isometry3<f64>,
    perspective: Perspective3<f64>,
    width: f64,
    height: f64,
    near: f64,
    far: f64,
}

impl Projector {
    /// Pixel position and eye-space depth, or `Clipped` for points outside
    /// the view frustum.
    pub fn project(&self, p: &Vec3) -> Projected {
        let q = self.view.transform_point(&Point3::from(*p));
        let depth = -q.z;
        if !(depth >= self.near && depth <= self.far) {
            return Projected::Clipped;
        }
        let ndc = self.perspective.project_point(&q);
        if ndc.x.abs() > 1.0 || ndc.y.abs() > 1.0 {
            return Projected::Clipped;
        }
        Projected::Visible {
            pixel: [(ndc.x + 1.0) * 0.5 * self.width, (1.0 - ndc.y) * 0.5 * self.height],
            depth,
        }
    }
}

pub fn project_point(cam: &Camera, p: Vec3) -> Result<Projected> {
    Ok(cam.projector()?.project(&p))
}
