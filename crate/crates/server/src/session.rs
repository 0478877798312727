use std::sync::Mutex;

use serde::Serialize;

use isostream_core::isosurface::{polygonize, IsosurfaceMesh, WELD_RADIUS};
use isostream_core::scoring::{score_with_scene, Camera, OcclusionScene};
use isostream_core::selection::{select_streamlines, SelectionConfig, SelectionResult};
use isostream_core::topology::{extract_critical_points, CriticalPoint};
use isostream_core::tracing::{build_candidates, Streamline, TraceOverrides};
use isostream_core::volume::VolumeGrid;

use crate::ApiError;

#[derive(Debug, Clone, Copy, Serialize)]
pub struct MeshSummary {
    pub surface_index: usize,
    pub triangle_count: usize,
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct CandidateSummary {
    pub candidate_count: usize,
    pub critical_candidate_count: usize,
}

/// One loaded dataset with its derived geometry.
#[derive(Debug)]
pub struct Session {
    pub id: String,
    pub grid: VolumeGrid,
    pub scalar_field: String,
    pub vector_field: String,
    pub critical_points: Vec<CriticalPoint>,
    pub meshes: Vec<IsosurfaceMesh>,
    pub candidates: Vec<Streamline>,
    scene: OcclusionScene,
    last_selection: Mutex<Option<SelectionResult>>,
}

impl Session {
    /// Validates the field names and extracts critical points.
    pub fn new(id: String, grid: VolumeGrid, scalar_field: String, vector_field: String) -> Result<Self, ApiError> {
        let critical_points = extract_critical_points(&grid, &scalar_field, &vector_field, false)?;
        Ok(Session {
            id,
            grid,
            scalar_field,
            vector_field,
            critical_points,
            meshes: Vec::new(),
            candidates: Vec::new(),
            scene: OcclusionScene::default(),
            last_selection: Mutex::new(None),
        })
    }

    pub fn add_isosurface(&mut self, isovalue: f64, opacity: f64) -> Result<MeshSummary, ApiError> {
        if !isovalue.is_finite() {
            return Err(ApiError::bad_request("invalid_argument", "isovalue must be finite"));
        }
        let surface_index = self.meshes.len();
        let mesh = polygonize(&self.grid, &self.scalar_field, isovalue, opacity)?
            .weld(WELD_RADIUS)
            .with_index(surface_index);
        let triangle_count = mesh.triangles.len();
        self.meshes.push(mesh);
        self.scene = OcclusionScene::new(&self.meshes);
        Ok(MeshSummary { surface_index, triangle_count })
    }

    pub fn build_candidates(&mut self, overrides: &TraceOverrides) -> Result<CandidateSummary, ApiError> {
        let cfg = overrides.resolve(&self.grid, &self.vector_field)?;
        self.candidates = build_candidates(&self.grid, &self.vector_field, &self.critical_points, &cfg)?;
        Ok(CandidateSummary {
            candidate_count: self.candidates.len(),
            critical_candidate_count: self.candidates.iter().filter(|c| c.from_critical.is_some()).count(),
        })
    }

    /// Scores the candidates for `camera` and selects; the result is cached.
    pub fn select(&self, camera: &Camera, cfg: &SelectionConfig) -> Result<SelectionResult, ApiError> {
        let projector = camera.projector()?;
        cfg.validate()?;
        if self.candidates.is_empty() {
            return Err(ApiError::conflict("no candidates; build candidates first"));
        }
        let scores = score_with_scene(&projector, &camera.eye, &self.scene, &self.candidates, cfg.mode);
        let result = select_streamlines(&self.candidates, &scores, &self.grid, cfg, camera)?;
        *self.last_selection.lock().unwrap_or_else(|p| p.into_inner()) = Some(result.clone());
        Ok(result)
    }

    pub fn last_selection(&self) -> Option<SelectionResult> {
        self.last_selection.lock().unwrap_or_else(|p| p.into_inner()).clone()
    }
}
