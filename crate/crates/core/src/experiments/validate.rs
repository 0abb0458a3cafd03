//! Monte Carlo validation of surrogate Pareto fronts against ground-truth
//! simulators.
//!
//! Test points are classified two ways: whether the covering boxes contain
//! them, and whether the surrogate front dominates their *simulator*
//! objective estimate. Because the simulator estimates carry Monte Carlo
//! noise, dominance is confidence-inflated: a front point only counts as
//! dominating after the test point's objectives are shrunk by their CI
//! halfwidths, so a classification error requires the front to clear the
//! noise band, not merely to touch it.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::abm::normal_quantile;
use crate::moo::{ArchiveEntry, DecisionBox};

/// One validated control point.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TestPointRecord {
    /// The probed control.
    pub control: Vec<f64>,
    /// Simulator objective estimates (closed-form components exact).
    pub abm_objectives: Vec<f64>,
    /// CI halfwidth per objective (zero for closed-form components).
    pub ci_halfwidth: Vec<f64>,
    /// The surrogate's objective values at the same control.
    pub surrogate_objectives: Vec<f64>,
    /// Whether a covering box contains the control.
    pub covered: bool,
    /// Whether the surrogate front dominates the simulator estimate
    /// under CI inflation.
    pub dominated: bool,
}

/// Validation outcome over all test points.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ValidationReport {
    /// Confidence level of the halfwidths (e.g. 0.999).
    pub confidence: f64,
    /// The two-sided normal quantile used.
    pub z: f64,
    /// Per-point records.
    pub points: Vec<TestPointRecord>,
}

impl ValidationReport {
    /// Points inside the covering.
    #[must_use]
    pub fn covered(&self) -> Vec<&TestPointRecord> {
        self.points.iter().filter(|p| p.covered).collect()
    }

    /// Points outside the covering.
    #[must_use]
    pub fn uncovered(&self) -> Vec<&TestPointRecord> {
        self.points.iter().filter(|p| !p.covered).collect()
    }

    /// Covered points flagged as dominated — ideally none.
    #[must_use]
    pub fn covered_but_dominated(&self) -> usize {
        self.points.iter().filter(|p| p.covered && p.dominated).count()
    }

    /// Fraction of uncovered points the front dominates; `None` when
    /// every point is covered.
    #[must_use]
    pub fn uncovered_dominated_fraction(&self) -> Option<f64> {
        let outside = self.uncovered();
        if outside.is_empty() {
            return None;
        }
        let dominated = outside.iter().filter(|p| p.dominated).count();
        Some(dominated as f64 / outside.len() as f64)
    }
}

/// Confidence-inflated dominance: `g` dominates the estimate `p ± h` only
/// if `g_i ≤ p_i − h_i` in every component, strictly in at least one.
#[must_use]
pub fn ci_dominates(g: &[f64], p: &[f64], h: &[f64]) -> bool {
    assert_eq!(g.len(), p.len());
    assert_eq!(h.len(), p.len());
    let mut strict = false;
    for i in 0..g.len() {
        let shrunk = p[i] - h[i];
        if g[i] > shrunk {
            return false;
        }
        if g[i] < shrunk {
            strict = true;
        }
    }
    strict
}

/// Whether any front entry dominates the estimate under CI inflation.
#[must_use]
pub fn dominated_by_front(front: &[ArchiveEntry<f64>], p: &[f64], h: &[f64]) -> bool {
    front.iter().any(|e| ci_dominates(&e.objectives, p, h))
}

/// Whether any box contains the control.
#[must_use]
pub fn covered_by_boxes(boxes: &[DecisionBox<f64>], u: &[f64]) -> bool {
    boxes.iter().any(|b| b.contains(u))
}

/// Draws validation controls: half uniform over `region`, half uniform
/// inside covering boxes (so both classes are populated). With no boxes
/// all points are uniform.
#[must_use]
pub fn test_points(
    region: &DecisionBox<f64>,
    boxes: &[DecisionBox<f64>],
    n: usize,
    seed: u64,
) -> Vec<Vec<f64>> {
    fn draw_in(rng: &mut ChaCha8Rng, b: &DecisionBox<f64>) -> Vec<f64> {
        (0..b.dim())
            .map(|i| b.lower()[i] + rng.gen::<f64>() * (b.upper()[i] - b.lower()[i]))
            .collect()
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut points = Vec::with_capacity(n);
    for k in 0..n {
        if k % 2 == 0 || boxes.is_empty() {
            points.push(draw_in(&mut rng, region));
        } else {
            let which = rng.gen_range(0..boxes.len());
            points.push(draw_in(&mut rng, &boxes[which]));
        }
    }
    points
}

/// The halfwidth of a two-sided CI at `confidence` for a mean with the
/// given standard error.
#[must_use]
pub fn ci_halfwidth(se: f64, confidence: f64) -> f64 {
    normal_quantile(confidence) * se
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn inflation_blocks_marginal_dominance() {
        // Without noise (1.0, 1.0) dominates (1.2, 1.2); with halfwidth
        // 0.3 the shrunk point (0.9, 0.9) escapes.
        assert!(ci_dominates(&[1.0, 1.0], &[1.2, 1.2], &[0.0, 0.0]));
        assert!(!ci_dominates(&[1.0, 1.0], &[1.2, 1.2], &[0.3, 0.3]));
        // Equality after shrinking in one component still dominates if
        // the other is strict.
        assert!(ci_dominates(&[1.0, 1.0], &[1.1, 1.5], &[0.1, 0.1]));
        assert!(!ci_dominates(&[1.0, 1.0], &[1.1, 1.1], &[0.1, 0.1]));
    }

    #[test]
    fn test_points_split_between_region_and_boxes() {
        let region = DecisionBox::new(vec![0.0, 0.0], vec![4.0, 4.0]).unwrap();
        let boxes = vec![DecisionBox::new(vec![1.0, 1.0], vec![1.5, 1.5]).unwrap()];
        let pts = test_points(&region, &boxes, 40, 7);
        assert_eq!(pts.len(), 40);
        let inside = pts.iter().filter(|p| boxes[0].contains(p)).count();
        // The odd draws land in the box; a few even draws may too.
        assert!(inside >= 20, "{inside} of 40 inside");
        assert!(pts.iter().all(|p| region.contains(p)));
        // Seeded draws are reproducible.
        assert_eq!(pts, test_points(&region, &boxes, 40, 7));
    }

    #[test]
    fn halfwidth_matches_the_normal_quantile() {
        let h = ci_halfwidth(2.0, 0.999);
        assert!((h / 2.0 - 3.29).abs() < 0.01, "z = {}", h / 2.0);
    }
}
