use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;

use isostream_core::isosurface::{meshes_to_mtl, meshes_to_obj, polygonize, IsosurfaceMesh, WELD_RADIUS};
use isostream_core::scoring::{score_all, score_report, EntropyScore};
use isostream_core::selection::{select_streamlines, SelectionResult};
use isostream_core::topology::{extract_critical_points, CriticalPoint};
use isostream_core::tracing::{build_candidates, Streamline, StreamlineRecord};
use isostream_core::volume::{load_svf, VolumeGrid};

use crate::{CliError, RunConfig};

pub const OUTPUT_FILES: [&str; 5] =
    ["meshes.obj", "meshes.mtl", "streamlines_all.json", "selection.json", "scores.json"];

/// Everything a run computes before anything is written.
#[derive(Debug)]
pub struct RunProducts {
    pub grid: VolumeGrid,
    pub critical_points: Vec<CriticalPoint>,
    pub meshes: Vec<IsosurfaceMesh>,
    pub candidates: Vec<Streamline>,
    pub scores: Vec<EntropyScore>,
    pub selection: SelectionResult,
}

#[derive(Debug, Serialize)]
pub struct RunSummary {
    pub candidate_count: usize,
    pub critical_candidate_count: usize,
    pub chosen: usize,
    pub outputs: PathBuf,
}

pub fn load_candidates(cfg: &RunConfig) -> Result<(VolumeGrid, Vec<CriticalPoint>, Vec<Streamline>), CliError> {
    let grid = load_svf(&cfg.input)?;
    let cps = extract_critical_points(&grid, &cfg.scalar_field, &cfg.vector_field, false)?;
    let trace = cfg.trace.resolve(&grid, &cfg.vector_field)?;
    let candidates = build_candidates(&grid, &cfg.vector_field, &cps, &trace)?;
    Ok((grid, cps, candidates))
}

pub fn compute(cfg: &RunConfig) -> Result<RunProducts, CliError> {
    let (grid, critical_points, candidates) = load_candidates(cfg)?;
    let meshes = cfg
        .isosurfaces
        .iter()
        .enumerate()
        .map(|(k, iso)| {
            Ok(polygonize(&grid, &cfg.scalar_field, iso.isovalue, iso.opacity)?
                .weld(WELD_RADIUS)
                .with_index(k))
        })
        .collect::<Result<Vec<_>, CliError>>()?;
    let camera = cfg.camera_for(&grid);
    let scores = score_all(&camera, &candidates, &meshes, cfg.selection.mode)?;
    let selection = select_streamlines(&candidates, &scores, &grid, &cfg.selection, &camera)?;
    Ok(RunProducts { grid, critical_points, meshes, candidates, scores, selection })
}

fn json_bytes<T: Serialize + ?Sized>(value: &T, pretty: bool) -> Result<Vec<u8>, CliError> {
    let mut bytes = if pretty { serde_json::to_vec_pretty(value) } else { serde_json::to_vec(value) }
        .map_err(|e| CliError::Internal(e.to_string()))?;
    bytes.push(b'\n');
    Ok(bytes)
}

pub fn records(candidates: &[Streamline]) -> Vec<StreamlineRecord> {
    candidates.iter().map(StreamlineRecord::from).collect()
}

/// Writes all output files, or none: files written before a failure are
/// removed again.
pub fn write_outputs(products: &RunProducts, dir: &Path) -> Result<(), CliError> {
    let contents = [
        meshes_to_obj(&products.meshes, Some("meshes.mtl")).into_bytes(),
        meshes_to_mtl(&products.meshes).into_bytes(),
        json_bytes(&records(&products.candidates), false)?,
        json_bytes(&products.selection, true)?,
        json_bytes(&score_report(&products.scores), true)?,
    ];
    let io = |path: &Path, e: std::io::Error| CliError::Output(format!("{}: {e}", path.display()));
    fs::create_dir_all(dir).map_err(|e| io(dir, e))?;
    let mut written = Vec::new();
    for (name, bytes) in OUTPUT_FILES.iter().zip(&contents) {
        let path = dir.join(name);
        if let Err(e) = fs::write(&path, bytes) {
            remove_all(&written);
            let _ = fs::remove_file(&path);
            return Err(io(&path, e));
        }
        written.push(path);
    }
    Ok(())
}

fn remove_all(paths: &[PathBuf]) {
    for p in paths {
        if let Err(e) = fs::remove_file(p) {
            log::warn!("could not remove partial output {}: {e}", p.display());
        }
    }
}

/// Runs the full pipeline for `cfg` and writes its outputs.
pub fn run_select(cfg: &RunConfig) -> Result<RunSummary, CliError> {
    let products = compute(cfg)?;
    write_outputs(&products, &cfg.outputs)?;
    Ok(RunSummary {
        candidate_count: products.candidates.len(),
        critical_candidate_count: products.candidates.iter().filter(|c| c.from_critical.is_some()).count(),
        chosen: products.selection.chosen.len(),
        outputs: cfg.outputs.clone(),
    })
}
