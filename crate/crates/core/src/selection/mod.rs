//! Budgeted streamline selection by descending entropy, with optional
//! critical-point coverage and cell-exclusive density control.

use std::collections::{BTreeMap, BTreeSet, HashSet};

use serde::{Deserialize, Serialize};

use crate::scoring::{Camera, EntropyScore, ScoreMode};
use crate::tracing::Streamline;
use crate::volume::VolumeGrid;
use crate::{Error, Result};

pub const DEFAULT_K: usize = 20;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SelectionConfig {
    pub k: usize,
    pub guarantee_critical: bool,
    pub density_control: bool,
    pub cell_stride: usize,
    pub mode: ScoreMode,
}

impl Default for SelectionConfig {
    fn default() -> Self {
        SelectionConfig {
            k: DEFAULT_K,
            guarantee_critical: true,
            density_control: true,
            cell_stride: 1,
            mode: ScoreMode::PerSegment,
        }
    }
}

impl SelectionConfig {
    pub fn validate(&self) -> Result<()> {
        if self.cell_stride == 0 {
            return Err(Error::InvalidArgument("cell_stride must be at least 1".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SelectionReason {
    Entropy,
    CriticalGuarantee,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChosenStreamline {
    pub streamline_id: usize,
    #[serde(rename = "E")]
    pub entropy: f64,
    pub from_critical: Option<usize>,
    pub reason: SelectionReason,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SelectionResult {
    pub chosen: Vec<ChosenStreamline>,
    pub rejected_density: Vec<usize>,
    pub camera: Camera,
}

impl SelectionResult {
    pub fn ids(&self) -> Vec<usize> {
        self.chosen.iter().map(|c| c.streamline_id).collect()
    }
}

/// Coarse cells (cell index divided by `stride`) containing the points of `s`.
/// Points outside the grid are ignored.
pub fn cell_footprint(grid: &VolumeGrid, s: &Streamline, stride: usize) -> BTreeSet<[usize; 3]> {
    let stride = stride.max(1);
    s.points
        .iter()
        .filter_map(|p| grid.locate(p))
        .map(|c| c.cell.map(|i| i / stride))
        .collect()
}

struct Picker<'a> {
    scores: &'a [EntropyScore],
    footprints: Option<Vec<BTreeSet<[usize; 3]>>>,
    occupied: HashSet<[usize; 3]>,
    taken: Vec<bool>,
    rejected: Vec<usize>,
    rejected_seen: Vec<bool>,
    chosen: Vec<ChosenStreamline>,
}

impl Picker<'_> {
    fn feasible(&mut self, i: usize) -> bool {
        let Some(fps) = &self.footprints else { return true };
        if fps[i].iter().any(|c| self.occupied.contains(c)) {
            if !self.rejected_seen[i] {
                self.rejected_seen[i] = true;
                self.rejected.push(self.scores[i].streamline_id);
            }
            return false;
        }
        true
    }

    fn take(&mut self, i: usize, reason: SelectionReason) {
        if let Some(fps) = &self.footprints {
            self.occupied.extend(fps[i].iter().copied());
        }
        self.taken[i] = true;
        let s = &self.scores[i];
        self.chosen.push(ChosenStreamline {
            streamline_id: s.streamline_id,
            entropy: s.key(),
            from_critical: s.from_critical,
            reason,
        });
    }
}

/// Picks up to `cfg.k` streamlines. Scores must be aligned with candidates.
pub fn select_streamlines(
    candidates: &[Streamline],
    scores: &[EntropyScore],
    grid: &VolumeGrid,
    cfg: &SelectionConfig,
    camera: &Camera,
) -> Result<SelectionResult> {
    cfg.validate()?;
    if candidates.len() != scores.len()
        || candidates.iter().zip(scores).any(|(c, s)| c.id != s.streamline_id)
    {
        return Err(Error::InvalidArgument("scores are not aligned with candidates".into()));
    }
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| {
        scores[b]
            .key()
            .total_cmp(&scores[a].key())
            .then(scores[a].streamline_id.cmp(&scores[b].streamline_id))
    });

    let n = scores.len();
    let mut picker = Picker {
        scores,
        footprints: cfg
            .density_control
            .then(|| candidates.iter().map(|c| cell_footprint(grid, c, cfg.cell_stride)).collect()),
        occupied: HashSet::new(),
        taken: vec![false; n],
        rejected: Vec::new(),
        rejected_seen: vec![false; n],
        chosen: Vec::new(),
    };

    if cfg.guarantee_critical {
        // groups appear in the rank order of their best candidate
        let mut group_of: BTreeMap<usize, usize> = BTreeMap::new();
        let mut groups: Vec<Vec<usize>> = Vec::new();
        for &i in &order {
            if let Some(cp) = scores[i].from_critical {
                let g = *group_of.entry(cp).or_insert_with(|| {
                    groups.push(Vec::new());
                    groups.len() - 1
                });
                groups[g].push(i);
            }
        }
        for group in groups {
            if picker.chosen.len() >= cfg.k {
                break;
            }
            if let Some(i) = group.into_iter().find(|&i| picker.feasible(i)) {
                picker.take(i, SelectionReason::CriticalGuarantee);
            }
        }
    }

    for &i in &order {
        if picker.chosen.len() >= cfg.k {
            break;
        }
        if !picker.taken[i] && picker.feasible(i) {
            picker.take(i, SelectionReason::Entropy);
        }
    }

    Ok(SelectionResult { chosen: picker.chosen, rejected_density: picker.rejected, camera: *camera })
}
