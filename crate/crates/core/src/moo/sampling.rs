//! The subdivision–sampling loop for multi-objective minimization.
//!
//! Each round: every box splits in half along its cycling coordinate;
//! each box is probed at its center plus shifted-Halton points; all
//! successful objective vectors enter the global archive; finally a box
//! survives if it still touches the nondominated frontier — through one
//! of its own samples or an archive member lying inside it. Archive
//! membership is queried only after *all* insertions, so survival does
//! not depend on evaluation order.
//!
//! Evaluation failures skip the point and are counted; a box whose every
//! probe failed survives (with a warning) rather than being silently
//! discarded.

use rayon::prelude::*;

use crate::error::Result;
use crate::num::Real;
use crate::seed;

use super::archive::ParetoArchive;
use super::boxes::{BoxTree, DecisionBox};
use super::lowdisc::HaltonSampler;

/// Knobs of the subdivision–sampling loop.
#[derive(Debug, Clone, serde::Serialize, serde::Deserialize)]
pub struct SamplingConfig {
    /// Subdivision rounds to run.
    pub iterations: usize,
    /// Probes per box and round (center plus Halton points).
    pub samples_per_box: usize,
    /// Master seed for the per-box samplers.
    pub seed: u64,
}

impl Default for SamplingConfig {
    fn default() -> Self {
        Self {
            iterations: 12,
            samples_per_box: 20,
            seed: 0,
        }
    }
}

/// Diagnostics of one subdivision round.
#[derive(Debug, Clone, serde::Serialize, serde::Deserialize)]
pub struct IterationRecord<T> {
    /// Round number, starting at 1.
    pub iteration: usize,
    /// Boxes after subdivision, before the survival test.
    pub boxes_subdivided: usize,
    /// Boxes surviving the round.
    pub boxes_surviving: usize,
    /// Archive size after the round.
    pub archive_size: usize,
    /// Evaluation failures in the round.
    pub failed_evaluations: usize,
    /// Boxes kept alive although every probe failed.
    pub all_failed_boxes: usize,
    /// Side lengths of this generation's boxes.
    pub box_widths: Vec<T>,
}

/// Result of the full loop: the surviving covering, the archive, and
/// per-round diagnostics.
#[derive(Debug, Clone, serde::Serialize, serde::Deserialize)]
pub struct SamplingOutcome<T: Real> {
    /// Surviving boxes of the final generation.
    pub tree: BoxTree<T>,
    /// Global nondominated archive.
    pub archive: ParetoArchive<T>,
    /// One record per round.
    pub history: Vec<IterationRecord<T>>,
}

impl<T: Real> SamplingOutcome<T> {
    /// The archived front, sorted by the first objective.
    #[must_use]
    pub fn front(&self) -> Vec<super::archive::ArchiveEntry<T>> {
        self.archive.sorted_by_first()
    }
}

/// Samples evaluated inside one box during a round.
struct BoxProbe<T> {
    decisions: Vec<Vec<T>>,
    objectives: Vec<Vec<T>>,
    failed: usize,
}

/// Probes one box: center plus shifted-Halton points.
fn probe_box<T: Real>(
    b: &DecisionBox<T>,
    evaluate: &(impl Fn(&[T]) -> Result<Vec<T>> + Sync),
    n_objectives: usize,
    samples_per_box: usize,
    sampler_seed: u64,
) -> BoxProbe<T> {
    let mut sampler = HaltonSampler::new(b.dim(), sampler_seed);
    let mut decisions = vec![b.center()];
    for _ in 1..samples_per_box {
        decisions.push(b.map_unit(&sampler.next_point()));
    }
    let mut kept = Vec::with_capacity(decisions.len());
    let mut objectives = Vec::with_capacity(decisions.len());
    let mut failed = 0;
    for x in decisions {
        match evaluate(&x) {
            Ok(f) if f.len() == n_objectives && f.iter().all(|v| !v.as_f64().is_nan()) => {
                objectives.push(f);
                kept.push(x);
            }
            _ => failed += 1,
        }
    }
    BoxProbe {
        decisions: kept,
        objectives,
        failed,
    }
}

/// Runs one subdivision round in place, returning its record.
pub fn sampling_step<T: Real>(
    tree: &mut BoxTree<T>,
    archive: &mut ParetoArchive<T>,
    evaluate: &(impl Fn(&[T]) -> Result<Vec<T>> + Sync),
    config: &SamplingConfig,
) -> IterationRecord<T> {
    tree.subdivide_all();
    let generation = tree.generation() as u64;
    let probes: Vec<BoxProbe<T>> = tree
        .boxes()
        .par_iter()
        .enumerate()
        .map(|(i, b)| {
            let s = seed::derive(
                config.seed,
                seed::stream::BOX_SAMPLING,
                (generation << 32) | i as u64,
            );
            probe_box(b, evaluate, archive.n_objectives(), config.samples_per_box, s)
        })
        .collect();
    for p in &probes {
        for (f, x) in p.objectives.iter().zip(&p.decisions) {
            archive.insert(f.clone(), x.clone());
        }
    }
    let mut all_failed = 0;
    let survives: Vec<bool> = tree
        .boxes()
        .iter()
        .zip(&probes)
        .map(|(b, p)| {
            if p.objectives.is_empty() && !archive.entries_in_box(b).is_empty() {
                return true;
            }
            if p.objectives.is_empty() {
                all_failed += 1;
                log::warn!(
                    "every probe of box around {:?} failed; keeping it conservatively",
                    b.center().iter().map(|v| v.as_f64()).collect::<Vec<_>>()
                );
                return true;
            }
            p.objectives.iter().any(|f| !archive.is_dominated(f))
                || !archive.entries_in_box(b).is_empty()
        })
        .collect();
    let boxes_subdivided = tree.len();
    let failed_evaluations = probes.iter().map(|p| p.failed).sum();
    tree.retain(&survives);
    IterationRecord {
        iteration: tree.generation(),
        boxes_subdivided,
        boxes_surviving: tree.len(),
        archive_size: archive.len(),
        failed_evaluations,
        all_failed_boxes: all_failed,
        box_widths: tree.current_widths(),
    }
}

/// Runs the full loop from a root box.
pub fn sampling_algorithm<T: Real>(
    root: DecisionBox<T>,
    n_objectives: usize,
    evaluate: &(impl Fn(&[T]) -> Result<Vec<T>> + Sync),
    config: &SamplingConfig,
) -> SamplingOutcome<T> {
    let mut tree = BoxTree::new(root);
    let mut archive = ParetoArchive::new(n_objectives);
    let mut history = Vec::with_capacity(config.iterations);
    for _ in 0..config.iterations {
        history.push(sampling_step(&mut tree, &mut archive, evaluate, config));
    }
    SamplingOutcome {
        tree,
        archive,
        history,
    }
}
