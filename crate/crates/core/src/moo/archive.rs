//! Pareto dominance and the global nondominance archive.
//!
//! The archive keeps every objective vector seen so far that no other
//! vector dominates, together with its decision point. Membership queries
//! drive both box survival and the final front. For two objectives the
//! archive maintains a staircase — entries sorted by the first objective
//! with the second strictly decreasing — so queries and insertions are
//! logarithmic plus eviction; other objective counts fall back to linear
//! scans.

use serde::{Deserialize, Serialize};

use crate::num::Real;

/// Pareto dominance: `a` dominates `b` when `a ≤ b` componentwise and
/// `a ≠ b`. Infinite components behave naturally — a finite vector
/// dominates its +∞ counterpart.
#[must_use]
pub fn dominates<T: Real>(a: &[T], b: &[T]) -> bool {
    debug_assert_eq!(a.len(), b.len());
    let mut strict = false;
    for (&ai, &bi) in a.iter().zip(b) {
        if ai > bi {
            return false;
        }
        if ai < bi {
            strict = true;
        }
    }
    strict
}

/// One nondominated point: objectives with the decision that attained
/// them.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArchiveEntry<T> {
    /// Objective vector.
    pub objectives: Vec<T>,
    /// Decision-space point.
    pub decision: Vec<T>,
}

/// Global archive of mutually nondominated points.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ParetoArchive<T> {
    n_objectives: usize,
    entries: Vec<ArchiveEntry<T>>,
}

impl<T: Real> ParetoArchive<T> {
    /// An empty archive for `n_objectives`-dimensional objective vectors.
    #[must_use]
    pub fn new(n_objectives: usize) -> Self {
        assert!(n_objectives >= 1, "need at least one objective");
        Self {
            n_objectives,
            entries: Vec::new(),
        }
    }

    /// Objective-space dimension.
    #[must_use]
    pub fn n_objectives(&self) -> usize {
        self.n_objectives
    }

    /// Number of archived points.
    #[must_use]
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    /// `true` when nothing is archived yet.
    #[must_use]
    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Archived entries. For two objectives these are sorted by the first
    /// objective ascending (second descending).
    #[must_use]
    pub fn entries(&self) -> &[ArchiveEntry<T>] {
        &self.entries
    }

    /// `true` when some archived point dominates `f`.
    #[must_use]
    pub fn is_dominated(&self, f: &[T]) -> bool {
        debug_assert_eq!(f.len(), self.n_objectives);
        if self.n_objectives == 2 {
            // Only the staircase entry with the largest f₀ ≤ f[0] can
            // dominate: it has the smallest f₁ among those candidates.
            let i = self.entries.partition_point(|e| e.objectives[0] <= f[0]);
            if i == 0 {
                return false;
            }
            dominates(&self.entries[i - 1].objectives, f)
        } else {
            self.entries.iter().any(|e| dominates(&e.objectives, f))
        }
    }

    /// Offers a point to the archive. Inserts it — evicting everything it
    /// dominates — unless it is dominated by or identical to an archived
    /// point. Returns whether the point was inserted.
    pub fn insert(&mut self, objectives: Vec<T>, decision: Vec<T>) -> bool {
        debug_assert_eq!(objectives.len(), self.n_objectives);
        if self.n_objectives == 2 {
            self.insert_staircase(objectives, decision)
        } else {
            self.insert_generic(objectives, decision)
        }
    }

    fn insert_staircase(&mut self, f: Vec<T>, decision: Vec<T>) -> bool {
        let pos = self.entries.partition_point(|e| e.objectives[0] < f[0]);
        // A dominating or identical entry must have f₀ ≤ f[0]; by the
        // staircase invariant only the immediate predecessor — or an entry
        // tied in f₀ at `pos` — can qualify.
        if pos > 0 {
            let prev = &self.entries[pos - 1].objectives;
            if dominates(prev, &f) || prev == &f {
                return false;
            }
        }
        if pos < self.entries.len() {
            let here = &self.entries[pos].objectives;
            if dominates(here, &f) || here == &f {
                return false;
            }
        }
        // Evict the contiguous run of entries the new point dominates:
        // from `pos` on, f₀ ≥ f[0] while f₁ decreases, so dominated
        // entries (f₁ ≥ f[1]) form a prefix of the tail.
        let mut end = pos;
        while end < self.entries.len() && self.entries[end].objectives[1] >= f[1] {
            debug_assert!(dominates(&f, &self.entries[end].objectives));
            end += 1;
        }
        self.entries.splice(pos..end, [ArchiveEntry {
            objectives: f,
            decision,
        }]);
        true
    }

    fn insert_generic(&mut self, f: Vec<T>, decision: Vec<T>) -> bool {
        if self
            .entries
            .iter()
            .any(|e| dominates(&e.objectives, &f) || e.objectives == f)
        {
            return false;
        }
        self.entries.retain(|e| !dominates(&f, &e.objectives));
        self.entries.push(ArchiveEntry {
            objectives: f,
            decision,
        });
        true
    }

    /// Entries sorted by the first objective (already the storage order
    /// for two objectives).
    #[must_use]
    pub fn sorted_by_first(&self) -> Vec<ArchiveEntry<T>> {
        let mut out = self.entries.clone();
        out.sort_by(|a, b| {
            a.objectives[0]
                .partial_cmp(&b.objectives[0])
                .expect("archived objectives are never NaN")
        });
        out
    }

    /// Archived entries whose decision lies inside the closed box.
    #[must_use]
    pub fn entries_in_box(&self, b: &crate::moo::DecisionBox<T>) -> Vec<usize> {
        self.entries
            .iter()
            .enumerate()
            .filter(|(_, e)| b.contains(&e.decision))
            .map(|(i, _)| i)
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn dominance_is_strict_and_partial() {
        assert!(dominates(&[1.0, 2.0], &[1.0, 3.0]));
        assert!(dominates(&[0.0, 0.0], &[1.0, 1.0]));
        assert!(!dominates(&[1.0, 2.0], &[1.0, 2.0]), "no self-dominance");
        assert!(!dominates(&[0.0, 3.0], &[1.0, 2.0]), "incomparable");
        assert!(!dominates(&[1.0, 3.0], &[1.0, 2.0]));
    }

    #[test]
    fn infinities_are_dominated_by_finite_vectors() {
        assert!(dominates(&[1.0, 5.0], &[1.0, f64::INFINITY]));
        assert!(dominates(
            &[f64::INFINITY, 1.0],
            &[f64::INFINITY, 2.0]
        ));
        assert!(!dominates(&[f64::INFINITY, f64::INFINITY], &[1.0, 1.0]));
    }

    #[test]
    fn staircase_keeps_nondominated_set() {
        let mut a = ParetoArchive::new(2);
        assert!(a.insert(vec![2.0, 2.0], vec![0.0]));
        assert!(a.insert(vec![1.0, 3.0], vec![1.0]));
        assert!(a.insert(vec![3.0, 1.0], vec![2.0]));
        assert_eq!(a.len(), 3);
        // Dominated by (2,2):
        assert!(!a.insert(vec![2.5, 2.5], vec![3.0]));
        assert!(a.is_dominated(&[2.0, 2.1]));
        assert!(!a.is_dominated(&[0.5, 10.0]));
        // A sweeping point evicts the middle of the staircase.
        assert!(a.insert(vec![0.5, 1.5], vec![4.0]));
        assert_eq!(a.len(), 2);
        let firsts: Vec<f64> = a.entries().iter().map(|e| e.objectives[0]).collect();
        assert_eq!(firsts, vec![0.5, 3.0]);
    }

    #[test]
    fn duplicates_are_rejected() {
        let mut a = ParetoArchive::new(2);
        assert!(a.insert(vec![1.0, 1.0], vec![0.0]));
        assert!(!a.insert(vec![1.0, 1.0], vec![9.0]));
        assert_eq!(a.len(), 1);
        assert_eq!(a.entries()[0].decision, vec![0.0]);
    }

    #[test]
    fn archive_members_are_never_dominated_queries() {
        let mut a = ParetoArchive::new(2);
        a.insert(vec![1.0, 4.0], vec![0.0]);
        a.insert(vec![2.0, 3.0], vec![1.0]);
        // A member's own objectives are not dominated (dominance is
        // strict), which keeps freshly archived samples alive in the
        // survival test.
        assert!(!a.is_dominated(&[1.0, 4.0]));
        assert!(!a.is_dominated(&[2.0, 3.0]));
    }

    #[test]
    fn generic_path_handles_three_objectives() {
        let mut a = ParetoArchive::new(3);
        assert!(a.insert(vec![1.0, 2.0, 3.0], vec![0.0]));
        assert!(a.insert(vec![3.0, 2.0, 1.0], vec![1.0]));
        assert!(!a.insert(vec![3.0, 2.0, 1.5], vec![2.0]));
        assert!(a.insert(vec![0.5, 1.5, 2.5], vec![3.0]));
        assert_eq!(a.len(), 2);
    }

    /// Brute-force reference archive.
    fn naive_front(points: &[Vec<f64>]) -> Vec<Vec<f64>> {
        let mut front: Vec<Vec<f64>> = Vec::new();
        for p in points {
            if front.iter().any(|q| dominates(q, p) || q == p) {
                continue;
            }
            front.retain(|q| !dominates(p, q));
            front.push(p.clone());
        }
        front.sort_by(|a, b| a[0].total_cmp(&b[0]));
        front
    }

    proptest! {
        /// The staircase fast path must agree exactly with the naive
        /// quadratic archive on arbitrary insertion streams.
        #[test]
        fn staircase_matches_naive_reference(
            points in proptest::collection::vec(
                (0u32..20, 0u32..20).prop_map(|(a, b)| vec![f64::from(a), f64::from(b)]),
                1..60,
            )
        ) {
            let mut archive = ParetoArchive::new(2);
            for (i, p) in points.iter().enumerate() {
                archive.insert(p.clone(), vec![i as f64]);
            }
            let got: Vec<Vec<f64>> =
                archive.entries().iter().map(|e| e.objectives.clone()).collect();
            let want = naive_front(&points);
            prop_assert_eq!(got, want);
        }

        /// Staircase invariant: first objective strictly increasing,
        /// second strictly decreasing.
        #[test]
        fn staircase_invariant_holds(
            points in proptest::collection::vec(
                (0.0f64..1.0, 0.0f64..1.0).prop_map(|(a, b)| vec![a, b]),
                1..60,
            )
        ) {
            let mut archive = ParetoArchive::new(2);
            for p in &points {
                archive.insert(p.clone(), vec![0.0]);
            }
            for w in archive.entries().windows(2) {
                prop_assert!(w[0].objectives[0] < w[1].objectives[0]);
                prop_assert!(w[0].objectives[1] > w[1].objectives[1]);
            }
        }

        /// Dominance is transitive.
        #[test]
        fn dominance_is_transitive(
            a in proptest::collection::vec(0u8..6, 3),
            b in proptest::collection::vec(0u8..6, 3),
            c in proptest::collection::vec(0u8..6, 3),
        ) {
            let f = |v: &[u8]| -> Vec<f64> { v.iter().map(|&x| f64::from(x)).collect() };
            let (a, b, c) = (f(&a), f(&b), f(&c));
            if dominates(&a, &b) && dominates(&b, &c) {
                prop_assert!(dominates(&a, &c));
            }
        }
    }
}
