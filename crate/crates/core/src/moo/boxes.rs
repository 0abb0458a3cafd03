//! Axis-aligned decision boxes and their dyadic subdivision.
//!
//! The set-oriented optimizer maintains a covering of candidate optima by
//! boxes. Each round every box splits in half along one coordinate — the
//! coordinate cycles with subdivision depth, so after `n` rounds every
//! side has halved once — and dominated halves are discarded.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::num::Real;

/// Axis-aligned box in decision space.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecisionBox<T> {
    lower: Vec<T>,
    upper: Vec<T>,
    depth: usize,
}

impl<T: Real> DecisionBox<T> {
    /// A root box with the given corner vectors (zero depth).
    pub fn new(lower: Vec<T>, upper: Vec<T>) -> Result<Self> {
        if lower.len() != upper.len() {
            return Err(Error::Dimension {
                expected: lower.len(),
                got: upper.len(),
            });
        }
        if lower.is_empty() {
            return Err(Error::Config("decision box needs at least one coordinate".into()));
        }
        if lower.iter().zip(&upper).any(|(&l, &u)| l >= u) {
            return Err(Error::Config(
                "every lower bound must lie strictly below its upper bound".into(),
            ));
        }
        Ok(Self {
            lower,
            upper,
            depth: 0,
        })
    }

    /// Decision-space dimension.
    #[must_use]
    pub fn dim(&self) -> usize {
        self.lower.len()
    }

    /// Lower corner.
    #[must_use]
    pub fn lower(&self) -> &[T] {
        &self.lower
    }

    /// Upper corner.
    #[must_use]
    pub fn upper(&self) -> &[T] {
        &self.upper
    }

    /// Number of splits this box has been through.
    #[must_use]
    pub fn depth(&self) -> usize {
        self.depth
    }

    /// Side length along coordinate `i`.
    #[must_use]
    pub fn width(&self, i: usize) -> T {
        self.upper[i] - self.lower[i]
    }

    /// Largest side length.
    #[must_use]
    pub fn max_width(&self) -> T {
        (0..self.dim())
            .map(|i| self.width(i))
            .fold(T::zero(), |m, w| m.max(w))
    }

    /// Box volume.
    #[must_use]
    pub fn volume(&self) -> T {
        (0..self.dim()).fold(T::one(), |v, i| v * self.width(i))
    }

    /// Center point.
    #[must_use]
    pub fn center(&self) -> Vec<T> {
        let half = T::of(0.5);
        self.lower
            .iter()
            .zip(&self.upper)
            .map(|(&l, &u)| l + half * (u - l))
            .collect()
    }

    /// `true` when `x` lies in the closed box.
    #[must_use]
    pub fn contains(&self, x: &[T]) -> bool {
        x.len() == self.dim()
            && x.iter()
                .zip(self.lower.iter().zip(&self.upper))
                .all(|(&v, (&l, &u))| l <= v && v <= u)
    }

    /// Maps a unit-cube point into the box.
    #[must_use]
    pub fn map_unit(&self, unit: &[f64]) -> Vec<T> {
        self.lower
            .iter()
            .zip(&self.upper)
            .zip(unit)
            .map(|((&l, &u), &w)| l + (u - l) * T::of(w))
            .collect()
    }

    /// Coordinate the next split cuts: cycles with depth.
    #[must_use]
    pub fn split_coordinate(&self) -> usize {
        self.depth % self.dim()
    }

    /// Splits the box in half along [`Self::split_coordinate`].
    #[must_use]
    pub fn subdivide(&self) -> [Self; 2] {
        let i = self.split_coordinate();
        let mid = self.lower[i] + T::of(0.5) * (self.upper[i] - self.lower[i]);
        let mut left = self.clone();
        let mut right = self.clone();
        left.upper[i] = mid;
        right.lower[i] = mid;
        left.depth += 1;
        right.depth += 1;
        [left, right]
    }
}

/// The current generation of boxes covering the candidate set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoxTree<T> {
    boxes: Vec<DecisionBox<T>>,
    root_widths: Vec<T>,
    generation: usize,
}

impl<T: Real> BoxTree<T> {
    /// A tree holding just the root box.
    #[must_use]
    pub fn new(root: DecisionBox<T>) -> Self {
        let root_widths = (0..root.dim()).map(|i| root.width(i)).collect();
        Self {
            boxes: vec![root],
            root_widths,
            generation: 0,
        }
    }

    /// Live boxes of the current generation.
    #[must_use]
    pub fn boxes(&self) -> &[DecisionBox<T>] {
        &self.boxes
    }

    /// Number of live boxes.
    #[must_use]
    pub fn len(&self) -> usize {
        self.boxes.len()
    }

    /// `true` when the covering died out entirely.
    #[must_use]
    pub fn is_empty(&self) -> bool {
        self.boxes.is_empty()
    }

    /// Completed subdivision rounds.
    #[must_use]
    pub fn generation(&self) -> usize {
        self.generation
    }

    /// Side lengths a box of the current generation has, relative to the
    /// root: after `g` rounds, coordinate `i` has halved
    /// `ceil((g − i) / dim)` times.
    #[must_use]
    pub fn current_widths(&self) -> Vec<T> {
        let dim = self.root_widths.len();
        (0..dim)
            .map(|i| {
                let halvings = self.generation.saturating_sub(i).div_ceil(dim);
                self.root_widths[i] / T::of(f64::powi(2.0, halvings as i32))
            })
            .collect()
    }

    /// Splits every live box once (along its cycling coordinate).
    pub fn subdivide_all(&mut self) {
        let mut next = Vec::with_capacity(2 * self.boxes.len());
        for b in &self.boxes {
            let [l, r] = b.subdivide();
            next.push(l);
            next.push(r);
        }
        self.boxes = next;
        self.generation += 1;
    }

    /// Keeps only the boxes where `survives` is `true`.
    pub fn retain(&mut self, survives: &[bool]) {
        debug_assert_eq!(survives.len(), self.boxes.len());
        let mut keep = survives.iter().copied();
        self.boxes.retain(|_| keep.next().unwrap_or(false));
    }

    /// Boxes of the current generation containing `x`.
    #[must_use]
    pub fn covering_boxes(&self, x: &[T]) -> Vec<usize> {
        self.boxes
            .iter()
            .enumerate()
            .filter(|(_, b)| b.contains(x))
            .map(|(i, _)| i)
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn unit_box(dim: usize) -> DecisionBox<f64> {
        DecisionBox::new(vec![0.0; dim], vec![1.0; dim]).unwrap()
    }

    #[test]
    fn rejects_degenerate_bounds() {
        assert!(DecisionBox::new(vec![0.0], vec![0.0]).is_err());
        assert!(DecisionBox::new(vec![1.0], vec![0.0]).is_err());
        assert!(DecisionBox::new(vec![0.0, 0.0], vec![1.0]).is_err());
        assert!(DecisionBox::<f64>::new(vec![], vec![]).is_err());
    }

    #[test]
    fn subdivision_cycles_coordinates() {
        let root = unit_box(2);
        assert_eq!(root.split_coordinate(), 0);
        let [l, r] = root.subdivide();
        assert_eq!(l.split_coordinate(), 1);
        assert_eq!(l.upper(), &[0.5, 1.0]);
        assert_eq!(r.lower(), &[0.5, 0.0]);
        let [ll, _] = l.subdivide();
        assert_eq!(ll.split_coordinate(), 0);
        assert_eq!(ll.upper(), &[0.5, 0.5]);
    }

    #[test]
    fn subdivision_preserves_volume_exactly() {
        let b = DecisionBox::new(vec![-1.0, 5.0], vec![3.0, 13.0]).unwrap();
        let [l, r] = b.subdivide();
        // Dyadic midpoints of representable bounds stay exact.
        assert_eq!(l.volume() + r.volume(), b.volume());
        assert_eq!(l.volume(), r.volume());
    }

    #[test]
    fn center_and_mapping() {
        let b = DecisionBox::new(vec![-1.0, 0.0], vec![3.0, 2.0]).unwrap();
        assert_eq!(b.center(), vec![1.0, 1.0]);
        assert_eq!(b.map_unit(&[0.0, 1.0]), vec![-1.0, 2.0]);
        assert_eq!(b.map_unit(&[0.25, 0.5]), vec![0.0, 1.0]);
        assert!(b.contains(&[3.0, 0.0]));
        assert!(!b.contains(&[3.1, 0.0]));
    }

    #[test]
    fn tree_tracks_generation_widths() {
        let mut tree = BoxTree::new(DecisionBox::new(vec![0.0, 0.0], vec![4.0, 8.0]).unwrap());
        assert_eq!(tree.current_widths(), vec![4.0, 8.0]);
        tree.subdivide_all();
        assert_eq!(tree.len(), 2);
        assert_eq!(tree.current_widths(), vec![2.0, 8.0]);
        tree.subdivide_all();
        assert_eq!(tree.len(), 4);
        assert_eq!(tree.current_widths(), vec![2.0, 4.0]);
        tree.subdivide_all();
        assert_eq!(tree.current_widths(), vec![1.0, 4.0]);
        // Every box of the generation reports exactly these widths.
        for b in tree.boxes() {
            assert_relative_eq!(b.width(0), 1.0);
            assert_relative_eq!(b.width(1), 4.0);
        }
    }

    #[test]
    fn retain_drops_marked_boxes() {
        let mut tree = BoxTree::new(unit_box(1));
        tree.subdivide_all();
        tree.subdivide_all();
        assert_eq!(tree.len(), 4);
        tree.retain(&[true, false, false, true]);
        assert_eq!(tree.len(), 2);
        assert_eq!(tree.boxes()[0].lower(), &[0.0]);
        assert_eq!(tree.boxes()[1].lower(), &[0.75]);
    }

    #[test]
    fn covering_boxes_finds_shared_faces() {
        let mut tree = BoxTree::new(unit_box(1));
        tree.subdivide_all();
        // The midpoint sits on the closed faces of both children.
        assert_eq!(tree.covering_boxes(&[0.5]), vec![0, 1]);
        assert_eq!(tree.covering_boxes(&[0.1]), vec![0]);
        assert_eq!(tree.covering_boxes(&[2.0]), Vec::<usize>::new());
    }

    proptest! {
        /// Subdivision tiles the parent: every point of the parent lies in
        /// at least one child, and child bounds stay inside the parent.
        #[test]
        fn subdivision_tiles_parent(
            x in 0.0f64..1.0,
            y in 0.0f64..1.0,
            depth in 0usize..4,
        ) {
            let mut b = unit_box(2);
            b.depth = depth;
            let [l, r] = b.subdivide();
            let p = [x, y];
            prop_assert!(l.contains(&p) || r.contains(&p));
            prop_assert!(b.contains(l.lower()) && b.contains(l.upper()));
            prop_assert!(b.contains(r.lower()) && b.contains(r.upper()));
        }
    }
}
