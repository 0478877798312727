use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use isostream_core::isosurface::DEFAULT_OPACITY;
use isostream_core::scoring::Camera;
use isostream_core::selection::SelectionConfig;
use isostream_core::tracing::TraceOverrides;
use isostream_core::volume::VolumeGrid;
use isostream_core::Vec3;

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IsosurfaceSpec {
    pub isovalue: f64,
    #[serde(default = "default_opacity")]
    pub opacity: f64,
}

fn default_opacity() -> f64 {
    DEFAULT_OPACITY
}

fn default_scalar() -> String {
    "scalar".into()
}

fn default_vector() -> String {
    "velocity".into()
}

fn default_outputs() -> PathBuf {
    PathBuf::from("out")
}

/// One reproducible run. Relative paths are resolved against the directory
/// of the config file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub input: PathBuf,
    #[serde(default = "default_scalar")]
    pub scalar_field: String,
    #[serde(default = "default_vector")]
    pub vector_field: String,
    #[serde(default)]
    pub isosurfaces: Vec<IsosurfaceSpec>,
    #[serde(default)]
    pub trace: TraceOverrides,
    #[serde(default)]
    pub selection: SelectionConfig,
    /// Defaults to a view framing the whole grid.
    #[serde(default)]
    pub camera: Option<Camera>,
    #[serde(default = "default_outputs")]
    pub outputs: PathBuf,
}

impl RunConfig {
    pub fn new(input: impl Into<PathBuf>) -> Self {
        RunConfig {
            input: input.into(),
            scalar_field: default_scalar(),
            vector_field: default_vector(),
            isosurfaces: Vec::new(),
            trace: TraceOverrides::default(),
            selection: SelectionConfig::default(),
            camera: None,
            outputs: default_outputs(),
        }
    }

    pub fn from_json(text: &str) -> Result<Self, CliError> {
        serde_json::from_str(text).map_err(|e| CliError::Data(format!("config: {e}")))
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Data(format!("reading {}: {e}", path.display())))?;
        let mut cfg = Self::from_json(&text)?;
        let base = path.parent().unwrap_or(Path::new(""));
        cfg.input = base.join(&cfg.input);
        cfg.outputs = base.join(&cfg.outputs);
        Ok(cfg)
    }

    pub fn camera_for(&self, grid: &VolumeGrid) -> Camera {
        self.camera.unwrap_or_else(|| framing_camera(grid))
    }
}

/// Oblique view with the grid's bounding sphere filling the frame.
pub fn framing_camera(grid: &VolumeGrid) -> Camera {
    let (lo, hi) = grid.bounds();
    let center = (lo + hi) * 0.5;
    let radius = ((hi - lo).norm() * 0.5).max(1e-6);
    let mut cam = Camera::look_at(center, center, Vec3::z());
    let dist = radius / (cam.fov_y * 0.5).sin() * 1.05;
    cam.eye = center + Vec3::new(1.0, -2.0, 1.2).normalize() * dist;
    cam.near = dist * 1e-3;
    cam.far = dist + 2.0 * radius;
    cam
}
