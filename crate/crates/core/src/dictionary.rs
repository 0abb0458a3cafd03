//! Dictionaries of monomial observables.
//!
//! A [`Dictionary`] is a finite, ordered set of monomials
//! `ψ_k(x) = ∏_i x_i^{e_ki}` over a `d`-dimensional state. It knows how to
//! evaluate every basis function, its gradient and its Hessian at a point,
//! and from those the pointwise action of the generator of an SDE
//! `dX = b(X) dt + σ(X) dW`:
//!
//! ```text
//! (L ψ)(x) = Σ_i b_i(x) ∂ψ/∂x_i (x) + ½ Σ_ij a_ij(x) ∂²ψ/∂x_i∂x_j (x),
//! a = σ σᵀ.
//! ```
//!
//! Basis functions are kept in degree-lexicographic order: ascending total
//! degree, and within a degree block descending exponent tuple, so that for
//! two variables the order reads `1, x₁, x₂, x₁², x₁x₂, x₂², …`. Every
//! dictionary contains the constant and all coordinate observables; drift
//! and diffusion identification rely on both.

use std::collections::BTreeMap;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg;
use crate::num::Real;

/// Ordered monomial dictionary over a fixed state dimension.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Dictionary {
    dim: usize,
    exponents: Vec<Vec<u32>>,
    index: BTreeMap<Vec<u32>, usize>,
    coord: Vec<usize>,
    constant: usize,
    max_degree: Option<u32>,
}

/// Serializable description of a [`Dictionary`].
///
/// Complete total-degree dictionaries round-trip through `dimension` and
/// `max_degree` alone; explicitly constructed ones carry their basis.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DictionarySpec {
    /// State dimension.
    pub dimension: usize,
    /// Maximum total degree for complete monomial dictionaries.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub max_degree: Option<u32>,
    /// Basis ordering; always `"degree-lex"`.
    pub ordering: String,
    /// Explicit exponent multi-indices for non-complete dictionaries.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub basis: Option<Vec<Vec<u32>>>,
}

/// Degree-lexicographic comparison: total degree first, then descending
/// exponent tuple (so `x₁²` precedes `x₁x₂` precedes `x₂²`).
fn degree_lex(a: &[u32], b: &[u32]) -> std::cmp::Ordering {
    let da: u32 = a.iter().sum();
    let db: u32 = b.iter().sum();
    da.cmp(&db).then_with(|| b.cmp(a))
}

/// Recursively enumerates all exponent tuples with total degree ≤ `budget`.
fn enumerate_upto(out: &mut Vec<Vec<u32>>, current: &mut Vec<u32>, pos: usize, budget: u32) {
    if pos == current.len() {
        out.push(current.clone());
        return;
    }
    for p in 0..=budget {
        current[pos] = p;
        enumerate_upto(out, current, pos + 1, budget - p);
    }
    current[pos] = 0;
}

impl Dictionary {
    /// Complete dictionary of all monomials with total degree at most
    /// `max_degree` in `dim` variables, containing
    /// `C(dim + max_degree, max_degree)` basis functions.
    ///
    /// # Panics
    ///
    /// Panics if `dim == 0` or `max_degree == 0`.
    #[must_use]
    pub fn monomials(dim: usize, max_degree: u32) -> Self {
        assert!(dim >= 1, "dictionary dimension must be at least 1");
        assert!(max_degree >= 1, "dictionary degree must be at least 1");
        let mut exps = Vec::new();
        let mut current = vec![0u32; dim];
        enumerate_upto(&mut exps, &mut current, 0, max_degree);
        Self::from_parts(dim, exps, Some(max_degree))
            .expect("complete monomial dictionaries always satisfy the basis invariants")
    }

    /// Dictionary from an explicit list of exponent multi-indices.
    ///
    /// The list must contain the constant (all-zero index) and every
    /// coordinate observable exactly once; duplicates are rejected. The
    /// basis is stored in degree-lexicographic order regardless of the
    /// order given.
    pub fn from_multi_indices(dim: usize, indices: Vec<Vec<u32>>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::Config("dictionary dimension must be at least 1".into()));
        }
        Self::from_parts(dim, indices, None)
    }

    fn from_parts(dim: usize, mut exps: Vec<Vec<u32>>, max_degree: Option<u32>) -> Result<Self> {
        for e in &exps {
            if e.len() != dim {
                return Err(Error::Dimension {
                    expected: dim,
                    got: e.len(),
                });
            }
        }
        exps.sort_by(|a, b| degree_lex(a, b));
        let mut index = BTreeMap::new();
        for (k, e) in exps.iter().enumerate() {
            if index.insert(e.clone(), k).is_some() {
                return Err(Error::Config(format!(
                    "duplicate basis multi-index {e:?}"
                )));
            }
        }
        let constant = *index
            .get(&vec![0u32; dim])
            .ok_or_else(|| Error::Config("dictionary must contain the constant observable".into()))?;
        let mut coord = Vec::with_capacity(dim);
        for i in 0..dim {
            let mut e = vec![0u32; dim];
            e[i] = 1;
            let k = *index.get(&e).ok_or_else(|| {
                Error::Config(format!("dictionary must contain the coordinate observable x{i}"))
            })?;
            coord.push(k);
        }
        Ok(Self {
            dim,
            exponents: exps,
            index,
            coord,
            constant,
            max_degree,
        })
    }

    /// Number of basis functions ℓ.
    #[must_use]
    pub fn len(&self) -> usize {
        self.exponents.len()
    }

    /// `true` if the dictionary has no basis functions (never holds for a
    /// validated dictionary, which contains at least the constant).
    #[must_use]
    pub fn is_empty(&self) -> bool {
        self.exponents.is_empty()
    }

    /// State dimension `d`.
    #[must_use]
    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Exponent multi-index of basis function `k`.
    #[must_use]
    pub fn exponents(&self, k: usize) -> &[u32] {
        &self.exponents[k]
    }

    /// Total degree of basis function `k`.
    #[must_use]
    pub fn degree(&self, k: usize) -> u32 {
        self.exponents[k].iter().sum()
    }

    /// Largest total degree present in the basis.
    #[must_use]
    pub fn max_basis_degree(&self) -> u32 {
        (0..self.len()).map(|k| self.degree(k)).max().unwrap_or(0)
    }

    /// Index of the constant observable.
    #[must_use]
    pub fn constant_index(&self) -> usize {
        self.constant
    }

    /// Index of the coordinate observable `x_i`.
    #[must_use]
    pub fn coordinate_index(&self, i: usize) -> usize {
        self.coord[i]
    }

    /// Index of the basis function with the given multi-index, if present.
    #[must_use]
    pub fn index_of(&self, exponents: &[u32]) -> Option<usize> {
        self.index.get(exponents).copied()
    }

    /// Human-readable name of basis function `k`, e.g. `x1^2*x3`.
    #[must_use]
    pub fn name(&self, k: usize) -> String {
        let e = &self.exponents[k];
        if e.iter().all(|&p| p == 0) {
            return "1".into();
        }
        let mut parts = Vec::new();
        for (i, &p) in e.iter().enumerate() {
            match p {
                0 => {}
                1 => parts.push(format!("x{}", i + 1)),
                _ => parts.push(format!("x{}^{}", i + 1, p)),
            }
        }
        parts.join("*")
    }

    fn check_point<T: Real>(&self, x: &[T]) -> Result<()> {
        if x.len() != self.dim {
            return Err(Error::Dimension {
                expected: self.dim,
                got: x.len(),
            });
        }
        Ok(())
    }

    /// Evaluates all basis functions at `x`.
    pub fn eval_basis<T: Real>(&self, x: &[T]) -> Result<DVector<T>> {
        self.check_point(x)?;
        let pows = PowerTable::new(self, x);
        Ok(DVector::from_fn(self.len(), |k, _| pows.monomial(&self.exponents[k])))
    }

    /// Gradient `∇ψ_k(x)` of basis function `k`.
    pub fn gradient<T: Real>(&self, k: usize, x: &[T]) -> Result<DVector<T>> {
        self.check_point(x)?;
        let pows = PowerTable::new(self, x);
        let mut g = DVector::zeros(self.dim);
        for i in 0..self.dim {
            g[i] = pows.partial(&self.exponents[k], i);
        }
        Ok(g)
    }

    /// Hessian `∇²ψ_k(x)` of basis function `k`.
    pub fn hessian<T: Real>(&self, k: usize, x: &[T]) -> Result<DMatrix<T>> {
        self.check_point(x)?;
        let pows = PowerTable::new(self, x);
        let mut h = DMatrix::zeros(self.dim, self.dim);
        for i in 0..self.dim {
            for j in i..self.dim {
                let v = pows.second_partial(&self.exponents[k], i, j);
                h[(i, j)] = v;
                h[(j, i)] = v;
            }
        }
        Ok(h)
    }

    /// Pointwise generator action `(L ψ_k)(x)` for drift `b` and diffusion
    /// `a = σσᵀ` at `x`.
    ///
    /// `a` must be symmetric within `1e-12`(·scale); an asymmetric matrix is
    /// rejected with [`Error::NonSymmetricDiffusion`].
    pub fn apply_generator<T: Real>(
        &self,
        k: usize,
        b: &[T],
        a: &DMatrix<T>,
        x: &[T],
    ) -> Result<T> {
        let column = self.apply_generator_all(b, a, x)?;
        Ok(column[k])
    }

    /// Pointwise generator action on every basis function at once; returns
    /// the column `[(L ψ_1)(x), …, (L ψ_ℓ)(x)]ᵀ`.
    pub fn apply_generator_all<T: Real>(
        &self,
        b: &[T],
        a: &DMatrix<T>,
        x: &[T],
    ) -> Result<DVector<T>> {
        self.check_point(x)?;
        self.check_point(b)?;
        if a.nrows() != self.dim || a.ncols() != self.dim {
            return Err(Error::Dimension {
                expected: self.dim,
                got: a.nrows().max(a.ncols()),
            });
        }
        linalg::check_symmetric(a, T::of(1e-12))?;
        let pows = PowerTable::new(self, x);
        let half = T::of(0.5);
        let mut out = DVector::zeros(self.len());
        for (k, e) in self.exponents.iter().enumerate() {
            let mut acc = T::zero();
            for i in 0..self.dim {
                if e[i] == 0 {
                    continue;
                }
                acc += b[i] * pows.partial(e, i);
            }
            for i in 0..self.dim {
                if e[i] == 0 {
                    continue;
                }
                // Diagonal once, off-diagonal pairs via symmetry.
                let aii = a[(i, i)];
                if aii != T::zero() && e[i] >= 2 {
                    acc += half * aii * pows.second_partial(e, i, i);
                }
                for j in (i + 1)..self.dim {
                    if e[j] == 0 {
                        continue;
                    }
                    let aij = a[(i, j)];
                    if aij != T::zero() {
                        acc += aij * pows.second_partial(e, i, j);
                    }
                }
            }
            out[k] = acc;
        }
        Ok(out)
    }

    /// Serializable description of this dictionary.
    #[must_use]
    pub fn spec(&self) -> DictionarySpec {
        DictionarySpec {
            dimension: self.dim,
            max_degree: self.max_degree,
            ordering: "degree-lex".into(),
            basis: if self.max_degree.is_some() {
                None
            } else {
                Some(self.exponents.clone())
            },
        }
    }

    /// Rebuilds a dictionary from its serialized description.
    pub fn from_spec(spec: &DictionarySpec) -> Result<Self> {
        if spec.ordering != "degree-lex" {
            return Err(Error::Config(format!(
                "unsupported basis ordering {:?}",
                spec.ordering
            )));
        }
        match (&spec.basis, spec.max_degree) {
            (Some(basis), _) => Self::from_multi_indices(spec.dimension, basis.clone()),
            (None, Some(deg)) => Ok(Self::monomials(spec.dimension, deg)),
            (None, None) => Err(Error::Config(
                "dictionary spec needs either max_degree or an explicit basis".into(),
            )),
        }
    }
}

/// Per-point table of coordinate powers `x_i^p`, shared by evaluation,
/// gradients and Hessians.
struct PowerTable<T> {
    dim: usize,
    powers: Vec<T>,
    max_pow: usize,
}

impl<T: Real> PowerTable<T> {
    fn new(dict: &Dictionary, x: &[T]) -> Self {
        let max_pow = dict.max_basis_degree() as usize;
        let mut powers = vec![T::one(); dict.dim * (max_pow + 1)];
        for i in 0..dict.dim {
            let base = i * (max_pow + 1);
            for p in 1..=max_pow {
                powers[base + p] = powers[base + p - 1] * x[i];
            }
        }
        Self {
            dim: dict.dim,
            powers,
            max_pow,
        }
    }

    #[inline]
    fn pow(&self, i: usize, p: u32) -> T {
        self.powers[i * (self.max_pow + 1) + p as usize]
    }

    fn monomial(&self, e: &[u32]) -> T {
        let mut v = T::one();
        for i in 0..self.dim {
            if e[i] > 0 {
                v *= self.pow(i, e[i]);
            }
        }
        v
    }

    /// ∂/∂x_i of the monomial with exponents `e`.
    fn partial(&self, e: &[u32], i: usize) -> T {
        if e[i] == 0 {
            return T::zero();
        }
        let mut v = T::of(f64::from(e[i])) * self.pow(i, e[i] - 1);
        for j in 0..self.dim {
            if j != i && e[j] > 0 {
                v *= self.pow(j, e[j]);
            }
        }
        v
    }

    /// ∂²/∂x_i∂x_j of the monomial with exponents `e`.
    fn second_partial(&self, e: &[u32], i: usize, j: usize) -> T {
        if i == j {
            if e[i] < 2 {
                return T::zero();
            }
            let c = T::of(f64::from(e[i]) * f64::from(e[i] - 1));
            let mut v = c * self.pow(i, e[i] - 2);
            for k in 0..self.dim {
                if k != i && e[k] > 0 {
                    v *= self.pow(k, e[k]);
                }
            }
            v
        } else {
            if e[i] == 0 || e[j] == 0 {
                return T::zero();
            }
            let c = T::of(f64::from(e[i]) * f64::from(e[j]));
            let mut v = c * self.pow(i, e[i] - 1) * self.pow(j, e[j] - 1);
            for k in 0..self.dim {
                if k != i && k != j && e[k] > 0 {
                    v *= self.pow(k, e[k]);
                }
            }
            v
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use rand::Rng;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn monomial_count_matches_stars_and_bars() {
        assert_eq!(Dictionary::monomials(1, 2).len(), 3);
        assert_eq!(Dictionary::monomials(2, 2).len(), 6);
        // C(3 + 5, 5) = 56
        assert_eq!(Dictionary::monomials(3, 5).len(), 56);
        // C(6 + 4, 4) = 210
        assert_eq!(Dictionary::monomials(6, 4).len(), 210);
    }

    #[test]
    fn ordering_is_degree_then_descending_exponents() {
        let dict = Dictionary::monomials(2, 2);
        let names: Vec<String> = (0..dict.len()).map(|k| dict.name(k)).collect();
        assert_eq!(names, vec!["1", "x1", "x2", "x1^2", "x1*x2", "x2^2"]);
    }

    #[test]
    fn eval_basis_at_sample_point() {
        let dict = Dictionary::monomials(2, 2);
        let psi = dict.eval_basis(&[2.0, 3.0]).unwrap();
        assert_eq!(psi.as_slice(), &[1.0, 2.0, 3.0, 4.0, 6.0, 9.0]);
    }

    #[test]
    fn eval_basis_handles_zero_coordinates() {
        // 0^0 = 1 by the monomial convention: the constant stays 1 at the origin.
        let dict = Dictionary::monomials(2, 2);
        let psi = dict.eval_basis(&[0.0, 0.0]).unwrap();
        assert_eq!(psi.as_slice(), &[1.0, 0.0, 0.0, 0.0, 0.0, 0.0]);
    }

    #[test]
    fn explicit_basis_requires_constant_and_coordinates() {
        let missing_const = Dictionary::from_multi_indices(2, vec![vec![1, 0], vec![0, 1]]);
        assert!(missing_const.is_err());
        let missing_coord =
            Dictionary::from_multi_indices(2, vec![vec![0, 0], vec![1, 0], vec![2, 0]]);
        assert!(missing_coord.is_err());
        let dup = Dictionary::from_multi_indices(
            2,
            vec![vec![0, 0], vec![1, 0], vec![0, 1], vec![1, 0]],
        );
        assert!(dup.is_err());
    }

    #[test]
    fn explicit_basis_is_canonicalized() {
        let dict = Dictionary::from_multi_indices(
            2,
            vec![vec![2, 0], vec![0, 1], vec![0, 0], vec![1, 0]],
        )
        .unwrap();
        let names: Vec<String> = (0..dict.len()).map(|k| dict.name(k)).collect();
        assert_eq!(names, vec!["1", "x1", "x2", "x1^2"]);
        assert_eq!(dict.constant_index(), 0);
        assert_eq!(dict.coordinate_index(0), 1);
        assert_eq!(dict.coordinate_index(1), 2);
    }

    /// Central-difference oracle for gradients and Hessians.
    fn fd_gradient(dict: &Dictionary, k: usize, x: &[f64]) -> Vec<f64> {
        let mut g = vec![0.0; x.len()];
        for i in 0..x.len() {
            let h = 1e-5 * x[i].abs().max(1.0);
            let mut xp = x.to_vec();
            let mut xm = x.to_vec();
            xp[i] += h;
            xm[i] -= h;
            let fp = dict.eval_basis(&xp).unwrap()[k];
            let fm = dict.eval_basis(&xm).unwrap()[k];
            g[i] = (fp - fm) / (2.0 * h);
        }
        g
    }

    fn fd_hessian_entry(dict: &Dictionary, k: usize, x: &[f64], i: usize, j: usize) -> f64 {
        let hi = 1e-4 * x[i].abs().max(1.0);
        let hj = 1e-4 * x[j].abs().max(1.0);
        let eval = |di: f64, dj: f64| {
            let mut y = x.to_vec();
            y[i] += di;
            y[j] += dj;
            dict.eval_basis(&y).unwrap()[k]
        };
        if i == j {
            (eval(hi, 0.0) - 2.0 * eval(0.0, 0.0) + eval(-hi, 0.0)) / (hi * hi)
        } else {
            (eval(hi, hj) - eval(hi, -hj) - eval(-hi, hj) + eval(-hi, -hj)) / (4.0 * hi * hj)
        }
    }

    #[test]
    fn gradients_and_hessians_match_finite_differences() {
        let dict = Dictionary::monomials(3, 4);
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..20 {
            let x: Vec<f64> = (0..3).map(|_| rng.gen_range(-1.5..1.5)).collect();
            for k in 0..dict.len() {
                let g = dict.gradient(k, &x).unwrap();
                let g_fd = fd_gradient(&dict, k, &x);
                for i in 0..3 {
                    let scale = g_fd[i].abs().max(1.0);
                    assert!(
                        (g[i] - g_fd[i]).abs() <= 1e-6 * scale,
                        "grad mismatch at k={k} i={i}: {} vs {}",
                        g[i],
                        g_fd[i]
                    );
                }
                let h = dict.hessian(k, &x).unwrap();
                for i in 0..3 {
                    for j in 0..3 {
                        let o = fd_hessian_entry(&dict, k, &x, i, j);
                        let scale = o.abs().max(1.0);
                        assert!(
                            (h[(i, j)] - o).abs() <= 1e-5 * scale,
                            "hessian mismatch at k={k} ({i},{j}): {} vs {}",
                            h[(i, j)],
                            o
                        );
                    }
                }
            }
        }
    }

    #[test]
    fn generator_action_on_quadratic_observable() {
        // ψ = x₁², drift b₁ = γ·x₁ with γ = 0.3, no diffusion, at x₁ = 1:
        // (Lψ)(x) = b₁ · 2x₁ = 0.6.
        let dict = Dictionary::monomials(1, 2);
        let k = dict.index_of(&[2]).unwrap();
        let b = [0.3];
        let a = DMatrix::zeros(1, 1);
        let v = dict.apply_generator(k, &b, &a, &[1.0]).unwrap();
        assert_relative_eq!(v, 0.6, epsilon = 1e-14);
    }

    #[test]
    fn generator_action_of_pure_diffusion() {
        // Brownian motion (b = 0, a = I): Lψ = ½ Δψ, so L(x²) = 1 everywhere.
        let dict = Dictionary::monomials(1, 2);
        let k = dict.index_of(&[2]).unwrap();
        let a = DMatrix::from_element(1, 1, 1.0);
        for &x in &[0.0, -2.0, 5.5] {
            let v = dict.apply_generator(k, &[0.0], &a, &[x]).unwrap();
            assert_relative_eq!(v, 1.0, epsilon = 1e-14);
        }
    }

    #[test]
    fn generator_action_is_linear_in_drift_and_diffusion() {
        let dict = Dictionary::monomials(2, 3);
        let x = [0.7, -1.2];
        let b1 = [0.5, -0.25];
        let b2 = [-1.0, 2.0];
        let a1 = DMatrix::from_row_slice(2, 2, &[1.0, 0.3, 0.3, 2.0]);
        let a2 = DMatrix::from_row_slice(2, 2, &[0.5, -0.1, -0.1, 0.8]);
        let sum_b: Vec<f64> = b1.iter().zip(&b2).map(|(p, q)| p + q).collect();
        let sum_a = &a1 + &a2;
        let lhs = dict.apply_generator_all(&sum_b, &sum_a, &x).unwrap();
        let rhs = dict.apply_generator_all(&b1, &a1, &x).unwrap()
            + dict.apply_generator_all(&b2, &a2, &x).unwrap();
        for k in 0..dict.len() {
            assert_relative_eq!(lhs[k], rhs[k], epsilon = 1e-12, max_relative = 1e-12);
        }
    }

    #[test]
    fn generator_action_on_coordinates_returns_drift() {
        let dict = Dictionary::monomials(2, 3);
        let b = [0.4, -0.9];
        let a = DMatrix::from_row_slice(2, 2, &[1.0, 0.2, 0.2, 0.7]);
        let col = dict.apply_generator_all(&b, &a, &[1.3, 0.2]).unwrap();
        assert_relative_eq!(col[dict.coordinate_index(0)], 0.4, epsilon = 1e-14);
        assert_relative_eq!(col[dict.coordinate_index(1)], -0.9, epsilon = 1e-14);
        assert_relative_eq!(col[dict.constant_index()], 0.0, epsilon = 1e-14);
    }

    #[test]
    fn generator_action_on_pair_product_reveals_diffusion() {
        // For ψ = x_i x_j and b = 0: (Lψ)(x) = a_ij.
        let dict = Dictionary::monomials(2, 2);
        let a = DMatrix::from_row_slice(2, 2, &[2.0, 0.75, 0.75, 1.5]);
        let k = dict.index_of(&[1, 1]).unwrap();
        let v = dict.apply_generator(k, &[0.0, 0.0], &a, &[0.3, -2.0]).unwrap();
        assert_relative_eq!(v, 0.75, epsilon = 1e-14);
    }

    #[test]
    fn generator_rejects_asymmetric_diffusion() {
        let dict = Dictionary::monomials(2, 2);
        let a = DMatrix::from_row_slice(2, 2, &[1.0, 0.1, 0.2, 1.0]);
        match dict.apply_generator_all(&[0.0, 0.0], &a, &[0.0, 0.0]) {
            Err(Error::NonSymmetricDiffusion { .. }) => {}
            other => panic!("expected symmetry error, got {other:?}"),
        }
    }

    #[test]
    fn spec_round_trips_complete_and_explicit_dictionaries() {
        let full = Dictionary::monomials(3, 4);
        let spec = full.spec();
        assert_eq!(spec.max_degree, Some(4));
        assert!(spec.basis.is_none());
        assert_eq!(Dictionary::from_spec(&spec).unwrap(), full);

        let explicit = Dictionary::from_multi_indices(
            2,
            vec![vec![0, 0], vec![1, 0], vec![0, 1], vec![2, 0]],
        )
        .unwrap();
        let spec = explicit.spec();
        assert!(spec.basis.is_some());
        assert_eq!(Dictionary::from_spec(&spec).unwrap(), explicit);
    }

    #[test]
    fn f32_evaluation_works() {
        let dict = Dictionary::monomials(2, 2);
        let psi = dict.eval_basis(&[2.0f32, 3.0f32]).unwrap();
        assert_eq!(psi[3], 4.0f32);
    }
}
