//! Generator estimation from pointwise drift/diffusion data.
//!
//! Given samples `x_1, …, x_m` together with the drift `b(x_l)` and
//! diffusion `a(x_l) = σσᵀ(x_l)` at each point — exact, or estimated from
//! short simulation bursts — the generator of the SDE is approximated on a
//! monomial dictionary ψ by the least-squares problem
//!
//! ```text
//! min_M ‖ dΨ_X − M Ψ_X ‖_F,   Ψ_X[k,l] = ψ_k(x_l),   dΨ_X[k,l] = (L ψ_k)(x_l).
//! ```
//!
//! Row `k` of the minimizer `M` expands `L ψ_k` in the dictionary; its
//! transpose `L = Mᵀ` acts on coefficient vectors, so an observable
//! `f = cᵀψ` evolves as `E[f(X_t)] ≈ (e^{tL} c)ᵀ ψ(x_0)`.
//!
//! From `M` the drift and diffusion fields themselves are read off:
//! the expansion of `L x_i` is the drift component `b_i`, and
//! `L(x_i x_j) = b_i x_j + b_j x_i + a_ij` isolates each diffusion entry
//! once the drift products are subtracted. Both identifications are exact
//! when the underlying fields are representable in the dictionary.

use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;

use crate::dictionary::Dictionary;
use crate::error::{Error, Result};
use crate::linalg;
use crate::num::Real;

/// Coefficients this close to zero (relative to the largest in the same
/// expansion) are treated as numerically absent.
pub const NEGLIGIBLE_COEFFICIENT: f64 = 1e-12;

/// One training sample: a state together with the drift vector and
/// diffusion matrix at that state, optionally with standard errors from a
/// Monte Carlo estimator.
#[derive(Debug, Clone)]
pub struct SamplePoint<T: Real> {
    state: Vec<T>,
    drift: Vec<T>,
    diffusion: DMatrix<T>,
    drift_se: Option<Vec<T>>,
    diffusion_se: Option<DMatrix<T>>,
}

impl<T: Real> SamplePoint<T> {
    /// A sample with exactly known drift and diffusion.
    pub fn new(state: Vec<T>, drift: Vec<T>, diffusion: DMatrix<T>) -> Result<Self> {
        let d = state.len();
        if drift.len() != d {
            return Err(Error::Dimension {
                expected: d,
                got: drift.len(),
            });
        }
        if diffusion.nrows() != d || diffusion.ncols() != d {
            return Err(Error::Dimension {
                expected: d,
                got: diffusion.nrows().max(diffusion.ncols()),
            });
        }
        if !state.iter().chain(&drift).all(|v| v.finite())
            || !diffusion.iter().all(|v| v.finite())
        {
            return Err(Error::DegenerateData(
                "sample contains non-finite values".into(),
            ));
        }
        Ok(Self {
            state,
            drift,
            diffusion,
            drift_se: None,
            diffusion_se: None,
        })
    }

    /// Attaches entrywise standard errors of the drift and diffusion
    /// estimates.
    pub fn with_errors(mut self, drift_se: Vec<T>, diffusion_se: DMatrix<T>) -> Result<Self> {
        let d = self.state.len();
        if drift_se.len() != d || diffusion_se.nrows() != d || diffusion_se.ncols() != d {
            return Err(Error::Dimension {
                expected: d,
                got: drift_se.len(),
            });
        }
        self.drift_se = Some(drift_se);
        self.diffusion_se = Some(diffusion_se);
        Ok(self)
    }

    /// The sampled state.
    #[must_use]
    pub fn state(&self) -> &[T] {
        &self.state
    }

    /// Drift estimate at the state.
    #[must_use]
    pub fn drift(&self) -> &[T] {
        &self.drift
    }

    /// Diffusion estimate at the state.
    #[must_use]
    pub fn diffusion(&self) -> &DMatrix<T> {
        &self.diffusion
    }

    /// `true` when standard errors are attached.
    #[must_use]
    pub fn has_errors(&self) -> bool {
        self.drift_se.is_some() && self.diffusion_se.is_some()
    }
}

/// Builds samples by evaluating analytic drift and diffusion fields at the
/// given states.
pub fn exact_samples<T: Real>(
    states: &[Vec<T>],
    mut drift: impl FnMut(&[T]) -> Vec<T>,
    mut diffusion: impl FnMut(&[T]) -> DMatrix<T>,
) -> Result<Vec<SamplePoint<T>>> {
    states
        .iter()
        .map(|x| SamplePoint::new(x.clone(), drift(x), diffusion(x)))
        .collect()
}

/// The data matrices of the regression: `psi[k,l] = ψ_k(x_l)` and
/// `dpsi[k,l] = (L ψ_k)(x_l)`, each `ℓ × m`.
pub fn build_matrices<T: Real>(
    dict: &Dictionary,
    samples: &[SamplePoint<T>],
) -> Result<(DMatrix<T>, DMatrix<T>)> {
    let (psi, dpsi, _) = build_matrices_detailed(dict, samples, false)?;
    Ok((psi, dpsi))
}

/// As [`build_matrices`], optionally also propagating per-entry standard
/// errors of `dΨ` from the sample errors.
pub fn build_matrices_detailed<T: Real>(
    dict: &Dictionary,
    samples: &[SamplePoint<T>],
    with_errors: bool,
) -> Result<(DMatrix<T>, DMatrix<T>, Option<DMatrix<T>>)> {
    if samples.is_empty() {
        return Err(Error::DegenerateData("no training samples".into()));
    }
    if with_errors && !samples.iter().all(SamplePoint::has_errors) {
        return Err(Error::DegenerateData(
            "error propagation requested but some samples carry no standard errors".into(),
        ));
    }
    let columns: Vec<(DVector<T>, DVector<T>, Option<DVector<T>>)> = samples
        .par_iter()
        .map(|s| -> Result<_> {
            let psi = dict.eval_basis(&s.state)?;
            let dpsi = dict.apply_generator_all(&s.drift, &s.diffusion, &s.state)?;
            let se = if with_errors {
                Some(generator_column_se(dict, s)?)
            } else {
                None
            };
            Ok((psi, dpsi, se))
        })
        .collect::<Result<_>>()?;
    let psi_cols: Vec<_> = columns.iter().map(|(p, _, _)| p.clone()).collect();
    let dpsi_cols: Vec<_> = columns.iter().map(|(_, d, _)| d.clone()).collect();
    let psi = DMatrix::from_columns(&psi_cols);
    let dpsi = DMatrix::from_columns(&dpsi_cols);
    let se = if with_errors {
        let se_cols: Vec<_> = columns
            .into_iter()
            .map(|(_, _, s)| s.expect("errors requested"))
            .collect();
        Some(DMatrix::from_columns(&se_cols))
    } else {
        None
    };
    Ok((psi, dpsi, se))
}

/// Standard error of each `(L ψ_k)(x)` entry, treating the drift and
/// diffusion estimates at `x` as independent:
/// `se² = Σ_i (∂_i ψ_k)² se(b_i)² + Σ_{i≤j} w_ij² (∂²_ij ψ_k)² se(a_ij)²`
/// with `w_ii = ½` and `w_ij = 1` for `i < j` (the symmetric pair enters
/// the generator once).
fn generator_column_se<T: Real>(dict: &Dictionary, s: &SamplePoint<T>) -> Result<DVector<T>> {
    let d = s.state.len();
    let b_se = s.drift_se.as_ref().expect("checked by caller");
    let a_se = s.diffusion_se.as_ref().expect("checked by caller");
    let half = T::of(0.5);
    let mut out = DVector::zeros(dict.len());
    for k in 0..dict.len() {
        let grad = dict.gradient(k, &s.state)?;
        let hess = dict.hessian(k, &s.state)?;
        let mut var = T::zero();
        for i in 0..d {
            var += (grad[i] * b_se[i]) * (grad[i] * b_se[i]);
            let wii = half * hess[(i, i)] * a_se[(i, i)];
            var += wii * wii;
            for j in (i + 1)..d {
                let wij = hess[(i, j)] * a_se[(i, j)];
                var += wij * wij;
            }
        }
        out[k] = var.sqrt();
    }
    Ok(out)
}

/// Estimated generator matrix on a dictionary.
///
/// Stores `L = Mᵀ` (the coefficient-space action used by propagation) plus
/// optional entrywise standard errors.
#[derive(Debug, Clone)]
pub struct GeneratorMatrix<T: Real> {
    matrix: DMatrix<T>,
    dict: Arc<Dictionary>,
    n_samples: usize,
    standard_errors: Option<DMatrix<T>>,
}

/// Least-squares generator estimate. `ridge > 0` solves the regularized
/// normal equations; `ridge = 0` uses the SVD pseudo-inverse.
pub fn estimate_generator<T: Real>(
    dict: &Arc<Dictionary>,
    samples: &[SamplePoint<T>],
    ridge: T,
) -> Result<GeneratorMatrix<T>> {
    estimate(dict, samples, ridge, false)
}

/// As [`estimate_generator`], additionally propagating sample standard
/// errors to entrywise errors of the generator matrix. Every sample must
/// carry errors.
pub fn estimate_generator_with_errors<T: Real>(
    dict: &Arc<Dictionary>,
    samples: &[SamplePoint<T>],
    ridge: T,
) -> Result<GeneratorMatrix<T>> {
    estimate(dict, samples, ridge, true)
}

fn estimate<T: Real>(
    dict: &Arc<Dictionary>,
    samples: &[SamplePoint<T>],
    ridge: T,
    with_errors: bool,
) -> Result<GeneratorMatrix<T>> {
    let (psi, dpsi, dpsi_se) = build_matrices_detailed(dict, samples, with_errors)?;
    let design = linalg::least_squares_design(&psi, ridge)?;
    let m = &dpsi * &design;
    // Var(M_kj) = Σ_l design[l,j]² · se(dΨ_{k,l})²; independent columns.
    let se_l = dpsi_se.map(|se| {
        let se_sq = se.map(|v| v * v);
        let design_sq = design.map(|v| v * v);
        (se_sq * design_sq).map(|v| v.sqrt()).transpose()
    });
    Ok(GeneratorMatrix {
        matrix: m.transpose(),
        dict: Arc::clone(dict),
        n_samples: samples.len(),
        standard_errors: se_l,
    })
}

/// Sequentially thresholded least squares: alternate between zeroing
/// coefficients with `|M_kj| ≤ threshold` and refitting each row of `M` on
/// its retained support. A zero threshold returns the plain estimate; a row
/// whose support empties stays identically zero (with a warning).
pub fn estimate_generator_sparse<T: Real>(
    dict: &Arc<Dictionary>,
    samples: &[SamplePoint<T>],
    ridge: T,
    threshold: T,
) -> Result<GeneratorMatrix<T>> {
    if threshold < T::zero() {
        return Err(Error::Config("sparsification threshold must be non-negative".into()));
    }
    let base = estimate_generator(dict, samples, ridge)?;
    if threshold == T::zero() {
        return Ok(base);
    }
    let (psi, dpsi) = build_matrices(dict, samples)?;
    let ell = dict.len();
    let mut m = base.matrix.transpose();
    const MAX_SWEEPS: usize = 20;
    for _ in 0..MAX_SWEEPS {
        let mut changed = false;
        for k in 0..ell {
            let support: Vec<usize> = (0..ell).filter(|&j| m[(k, j)].abs() > threshold).collect();
            let previous: Vec<usize> = (0..ell).filter(|&j| m[(k, j)] != T::zero()).collect();
            if support == previous {
                continue;
            }
            changed = true;
            if support.is_empty() {
                log::warn!(
                    "sparsification emptied the expansion of L {}; row set to zero",
                    dict.name(k)
                );
                for j in 0..ell {
                    m[(k, j)] = T::zero();
                }
                continue;
            }
            // Refit row k on the surviving basis functions only.
            let psi_sub = DMatrix::from_fn(support.len(), psi.ncols(), |r, c| {
                psi[(support[r], c)]
            });
            let design = linalg::least_squares_design(&psi_sub, ridge)?;
            let row = dpsi.row(k) * design;
            for j in 0..ell {
                m[(k, j)] = T::zero();
            }
            for (r, &j) in support.iter().enumerate() {
                m[(k, j)] = row[r];
            }
        }
        if !changed {
            break;
        }
    }
    Ok(GeneratorMatrix {
        matrix: m.transpose(),
        dict: Arc::clone(dict),
        n_samples: samples.len(),
        standard_errors: None,
    })
}

impl<T: Real> GeneratorMatrix<T> {
    /// Wraps an explicitly known coefficient-space generator `L`.
    pub fn from_matrix(dict: Arc<Dictionary>, matrix: DMatrix<T>) -> Result<Self> {
        if matrix.nrows() != dict.len() || matrix.ncols() != dict.len() {
            return Err(Error::Dimension {
                expected: dict.len(),
                got: matrix.nrows().max(matrix.ncols()),
            });
        }
        Ok(Self {
            matrix,
            dict,
            n_samples: 0,
            standard_errors: None,
        })
    }

    /// Plain-data description for serialization.
    #[must_use]
    pub fn spec(&self) -> GeneratorMatrixSpec {
        GeneratorMatrixSpec {
            dictionary: self.dict.spec(),
            matrix: self
                .matrix
                .row_iter()
                .map(|r| r.iter().map(|v| v.as_f64()).collect())
                .collect(),
            n_samples: self.n_samples,
        }
    }

    /// Rebuilds a generator from its serialized description.
    pub fn from_spec(spec: &GeneratorMatrixSpec) -> Result<Self> {
        let dict = Arc::new(Dictionary::from_spec(&spec.dictionary)?);
        let ell = dict.len();
        if spec.matrix.len() != ell || spec.matrix.iter().any(|r| r.len() != ell) {
            return Err(Error::Config("generator matrix shape mismatch".into()));
        }
        let matrix =
            DMatrix::from_fn(ell, ell, |i, j| T::of(spec.matrix[i][j]));
        Ok(Self {
            matrix,
            dict,
            n_samples: spec.n_samples,
            standard_errors: None,
        })
    }

    /// The matrix `L = Mᵀ` acting on coefficient vectors.
    #[must_use]
    pub fn matrix(&self) -> &DMatrix<T> {
        &self.matrix
    }

    /// The dictionary the generator is expressed in.
    #[must_use]
    pub fn dictionary(&self) -> &Arc<Dictionary> {
        &self.dict
    }

    /// Number of samples behind the estimate (zero for analytic matrices).
    #[must_use]
    pub fn n_samples(&self) -> usize {
        self.n_samples
    }

    /// Entrywise standard errors of `L`, when propagated.
    #[must_use]
    pub fn standard_errors(&self) -> Option<&DMatrix<T>> {
        self.standard_errors.as_ref()
    }

    /// Expansion of `L ψ_k` in the dictionary (row `k` of `M`).
    #[must_use]
    pub fn expansion(&self, k: usize) -> DVector<T> {
        self.matrix.column(k).into_owned()
    }

    /// Drift coefficient matrix: column `i` expands `b_i` in the
    /// dictionary, read off as the expansion of `L x_i`.
    #[must_use]
    pub fn identify_drift(&self) -> DMatrix<T> {
        let d = self.dict.dim();
        let mut drift = DMatrix::zeros(self.dict.len(), d);
        for i in 0..d {
            drift.set_column(i, &self.matrix.column(self.dict.coordinate_index(i)));
        }
        drift
    }

    /// Identifies drift and diffusion fields, returning the SDE model.
    ///
    /// Requires every pair product `x_i x_j` in the dictionary
    /// ([`Error::MissingPairProduct`] otherwise). Drift-times-coordinate
    /// terms that leave the dictionary are dropped with a warning; their
    /// count is recorded on the model.
    pub fn identify(&self) -> Result<SdeModel<T>> {
        let d = self.dict.dim();
        let ell = self.dict.len();
        let drift = self.identify_drift();
        let mut diffusion = DMatrix::zeros(ell, d * d);
        let mut dropped = 0usize;
        for i in 0..d {
            for j in i..d {
                let mut pair = self.dict.exponents(self.dict.coordinate_index(i)).to_vec();
                pair[j] += 1;
                let pair_idx = self
                    .dict
                    .index_of(&pair)
                    .ok_or(Error::MissingPairProduct { i, j })?;
                let mut coeffs = self.expansion(pair_idx);
                // a_ij = L(x_i x_j) − b_i x_j − b_j x_i.
                dropped += subtract_shifted(&self.dict, &mut coeffs, &drift.column(i).into_owned(), j);
                dropped += subtract_shifted(&self.dict, &mut coeffs, &drift.column(j).into_owned(), i);
                diffusion.set_column(i * d + j, &coeffs);
                if i != j {
                    diffusion.set_column(j * d + i, &coeffs);
                }
            }
        }
        if dropped > 0 {
            log::warn!(
                "diffusion identification dropped {dropped} drift-product term(s) outside the dictionary; \
                 increase the dictionary degree to represent drift·coordinate products exactly"
            );
        }
        let mut model = SdeModel::new(Arc::clone(&self.dict), drift, diffusion)?;
        model.dropped_products = dropped;
        Ok(model)
    }
}

/// Subtracts the expansion of `coeffs(b) · x_shift` from `acc`, skipping
/// negligible coefficients; returns how many significant terms had no slot
/// in the dictionary.
fn subtract_shifted<T: Real>(
    dict: &Dictionary,
    acc: &mut DVector<T>,
    b: &DVector<T>,
    shift: usize,
) -> usize {
    let scale = b.iter().fold(T::zero(), |m, v| m.max(v.abs()));
    let floor = scale * T::of(NEGLIGIBLE_COEFFICIENT);
    let mut dropped = 0;
    for k in 0..dict.len() {
        if b[k].abs() <= floor {
            continue;
        }
        let mut target = dict.exponents(k).to_vec();
        target[shift] += 1;
        match dict.index_of(&target) {
            Some(t) => acc[t] -= b[k],
            None => dropped += 1,
        }
    }
    dropped
}

/// Identified SDE model `dX = b(X) dt + σ(X) dW` with polynomial drift and
/// diffusion fields expanded in a dictionary.
#[derive(Debug, Clone)]
pub struct SdeModel<T: Real> {
    dict: Arc<Dictionary>,
    /// `ℓ × d`; column `i` expands the drift component `b_i`.
    drift: DMatrix<T>,
    /// `ℓ × d²`; column `i·d + j` expands the diffusion entry `a_ij`.
    diffusion: DMatrix<T>,
    dropped_products: usize,
}

/// Serializable form of a [`GeneratorMatrix`] (entries as `f64`).
#[derive(Debug, Clone, serde::Serialize, serde::Deserialize)]
pub struct GeneratorMatrixSpec {
    /// Dictionary description.
    pub dictionary: crate::dictionary::DictionarySpec,
    /// The coefficient-space generator `L`, row-major.
    pub matrix: Vec<Vec<f64>>,
    /// Samples behind the estimate (zero for analytic constructions).
    pub n_samples: usize,
}

/// Serializable form of an [`SdeModel`] (coefficients as `f64`).
#[derive(Debug, Clone, serde::Serialize, serde::Deserialize)]
pub struct SdeModelSpec {
    /// Dictionary description.
    pub dictionary: crate::dictionary::DictionarySpec,
    /// Drift coefficients, column-major `d` columns of length `ℓ`.
    pub drift: Vec<Vec<f64>>,
    /// Diffusion coefficients, column-major `d²` columns of length `ℓ`.
    pub diffusion: Vec<Vec<f64>>,
}

impl<T: Real> SdeModel<T> {
    /// Builds a model from explicit coefficient matrices.
    pub fn new(dict: Arc<Dictionary>, drift: DMatrix<T>, diffusion: DMatrix<T>) -> Result<Self> {
        let d = dict.dim();
        let ell = dict.len();
        if drift.nrows() != ell || drift.ncols() != d {
            return Err(Error::Dimension {
                expected: ell,
                got: drift.nrows(),
            });
        }
        if diffusion.nrows() != ell || diffusion.ncols() != d * d {
            return Err(Error::Dimension {
                expected: d * d,
                got: diffusion.ncols(),
            });
        }
        Ok(Self {
            dict,
            drift,
            diffusion,
            dropped_products: 0,
        })
    }

    /// The dictionary the fields are expanded in.
    #[must_use]
    pub fn dictionary(&self) -> &Arc<Dictionary> {
        &self.dict
    }

    /// State dimension.
    #[must_use]
    pub fn dim(&self) -> usize {
        self.dict.dim()
    }

    /// Drift coefficient matrix (`ℓ × d`).
    #[must_use]
    pub fn drift_coefficients(&self) -> &DMatrix<T> {
        &self.drift
    }

    /// Diffusion coefficient matrix (`ℓ × d²`).
    #[must_use]
    pub fn diffusion_coefficients(&self) -> &DMatrix<T> {
        &self.diffusion
    }

    /// Significant drift-product terms dropped during identification.
    #[must_use]
    pub fn dropped_products(&self) -> usize {
        self.dropped_products
    }

    /// Drift vector `b(x)`.
    pub fn eval_drift(&self, x: &[T]) -> Result<DVector<T>> {
        let psi = self.dict.eval_basis(x)?;
        Ok(self.drift.transpose() * psi)
    }

    /// Diffusion matrix `a(x)`, symmetrized against roundoff.
    pub fn eval_diffusion(&self, x: &[T]) -> Result<DMatrix<T>> {
        let d = self.dim();
        let psi = self.dict.eval_basis(x)?;
        let flat = self.diffusion.transpose() * psi;
        let mut a = DMatrix::zeros(d, d);
        let half = T::of(0.5);
        for i in 0..d {
            a[(i, i)] = flat[i * d + i];
            for j in (i + 1)..d {
                let v = half * (flat[i * d + j] + flat[j * d + i]);
                a[(i, j)] = v;
                a[(j, i)] = v;
            }
        }
        Ok(a)
    }

    /// Pointwise noise factor: the lower-triangular `σ(x)` with
    /// `σσᵀ = a(x)`, via the semidefinite Cholesky factorization.
    /// Fails with [`Error::IndefiniteDiffusion`] when `a(x)` has a
    /// significantly negative eigenvalue.
    pub fn sigma_pointwise(&self, x: &[T]) -> Result<DMatrix<T>> {
        let a = self.eval_diffusion(x)?;
        linalg::psd_sqrt_lower(&a)
    }

    /// Largest total degree carried by a significant drift coefficient.
    #[must_use]
    pub fn drift_degree(&self) -> u32 {
        let scale = self.drift.iter().fold(T::zero(), |m, v| m.max(v.abs()));
        let floor = scale * T::of(NEGLIGIBLE_COEFFICIENT);
        let mut deg = 0;
        for i in 0..self.drift.ncols() {
            for k in 0..self.drift.nrows() {
                if self.drift[(k, i)].abs() > floor {
                    deg = deg.max(self.dict.degree(k));
                }
            }
        }
        deg
    }

    /// Serializable description with `f64` coefficients.
    #[must_use]
    pub fn spec(&self) -> SdeModelSpec {
        let col_to_f64 = |m: &DMatrix<T>, c: usize| -> Vec<f64> {
            m.column(c).iter().map(|v| v.as_f64()).collect()
        };
        SdeModelSpec {
            dictionary: self.dict.spec(),
            drift: (0..self.drift.ncols()).map(|c| col_to_f64(&self.drift, c)).collect(),
            diffusion: (0..self.diffusion.ncols())
                .map(|c| col_to_f64(&self.diffusion, c))
                .collect(),
        }
    }

    /// Rebuilds a model from its serialized description.
    pub fn from_spec(spec: &SdeModelSpec) -> Result<Self> {
        let dict = Arc::new(Dictionary::from_spec(&spec.dictionary)?);
        let ell = dict.len();
        let d = dict.dim();
        let to_matrix = |cols: &[Vec<f64>], want: usize| -> Result<DMatrix<T>> {
            if cols.len() != want || cols.iter().any(|c| c.len() != ell) {
                return Err(Error::Config("coefficient table shape mismatch".into()));
            }
            Ok(DMatrix::from_fn(ell, want, |k, c| T::of(cols[c][k])))
        };
        let drift = to_matrix(&spec.drift, d)?;
        let diffusion = to_matrix(&spec.diffusion, d * d)?;
        Self::new(dict, drift, diffusion)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn grid(n: usize, lo: f64, hi: f64) -> Vec<Vec<f64>> {
        (0..n)
            .map(|i| vec![lo + (hi - lo) * i as f64 / (n - 1) as f64])
            .collect()
    }

    /// Ornstein–Uhlenbeck ground truth: b = −x, a = 2.
    fn ou_samples() -> Vec<SamplePoint<f64>> {
        exact_samples(
            &grid(20, -2.0, 2.0),
            |x| vec![-x[0]],
            |_| DMatrix::from_element(1, 1, 2.0),
        )
        .unwrap()
    }

    #[test]
    fn recovers_ou_generator_exactly() {
        let dict = Arc::new(Dictionary::monomials(1, 2));
        let gen = estimate_generator(&dict, &ou_samples(), 0.0).unwrap();
        // L x = −x and L x² = 2 − 2x² in the basis {1, x, x²}.
        let expected_x = [0.0, -1.0, 0.0];
        let expected_x2 = [2.0, 0.0, -2.0];
        let col_x = gen.expansion(dict.index_of(&[1]).unwrap());
        let col_x2 = gen.expansion(dict.index_of(&[2]).unwrap());
        for k in 0..3 {
            assert_relative_eq!(col_x[k], expected_x[k], epsilon = 1e-10);
            assert_relative_eq!(col_x2[k], expected_x2[k], epsilon = 1e-10);
        }
    }

    #[test]
    fn identifies_ou_drift_and_diffusion() {
        let dict = Arc::new(Dictionary::monomials(1, 2));
        let gen = estimate_generator(&dict, &ou_samples(), 0.0).unwrap();
        let model = gen.identify().unwrap();
        assert_eq!(model.dropped_products(), 0);
        let b = model.eval_drift(&[0.7]).unwrap();
        assert_relative_eq!(b[0], -0.7, epsilon = 1e-10);
        let a = model.eval_diffusion(&[0.7]).unwrap();
        assert_relative_eq!(a[(0, 0)], 2.0, epsilon = 1e-10);
        let sigma = model.sigma_pointwise(&[-1.3]).unwrap();
        assert_relative_eq!(sigma[(0, 0)], 2.0f64.sqrt(), epsilon = 1e-10);
        assert_eq!(model.drift_degree(), 1);
    }

    #[test]
    fn ridge_matches_pseudoinverse_on_well_conditioned_data() {
        let dict = Arc::new(Dictionary::monomials(1, 2));
        let exact = estimate_generator(&dict, &ou_samples(), 0.0).unwrap();
        let ridged = estimate_generator(&dict, &ou_samples(), 1e-12).unwrap();
        let diff = crate::linalg::frobenius_distance(exact.matrix(), ridged.matrix());
        assert!(diff < 1e-8, "ridge 1e-12 drifted too far: {diff}");
    }

    /// Two-dimensional system with an invariant slow manifold x₂ = x₁²:
    /// ẋ₁ = γ x₁, ẋ₂ = δ(x₂ − x₁²), closed on the basis {1, x₁, x₂, x₁²}.
    #[test]
    fn custom_basis_closes_slow_manifold_system() {
        let gamma = 0.3;
        let delta = -1.0;
        let dict = Arc::new(
            Dictionary::from_multi_indices(
                2,
                vec![vec![0, 0], vec![1, 0], vec![0, 1], vec![2, 0]],
            )
            .unwrap(),
        );
        let mut states = Vec::new();
        for i in 0..5 {
            for j in 0..5 {
                states.push(vec![-1.0 + 0.5 * i as f64, -1.0 + 0.5 * j as f64]);
            }
        }
        let samples = exact_samples(
            &states,
            |x| vec![gamma * x[0], delta * (x[1] - x[0] * x[0])],
            |_| DMatrix::zeros(2, 2),
        )
        .unwrap();
        let gen = estimate_generator(&dict, &samples, 0.0).unwrap();
        let ix1 = dict.index_of(&[1, 0]).unwrap();
        let ix2 = dict.index_of(&[0, 1]).unwrap();
        let ix1sq = dict.index_of(&[2, 0]).unwrap();
        // L x₁ = γ x₁; L x₂ = δ x₂ − δ x₁²; L x₁² = 2γ x₁².
        let m = |row: usize, col: usize| gen.matrix()[(col, row)];
        assert_relative_eq!(m(ix1, ix1), gamma, epsilon = 1e-10);
        assert_relative_eq!(m(ix2, ix2), delta, epsilon = 1e-10);
        assert_relative_eq!(m(ix2, ix1sq), -delta, epsilon = 1e-10);
        assert_relative_eq!(m(ix1sq, ix1sq), 2.0 * gamma, epsilon = 1e-10);
        // No x₁x₂ product in the basis, so the diffusion read-off must
        // refuse rather than guess.
        match gen.identify() {
            Err(Error::MissingPairProduct { i: 0, j: 1 }) => {}
            other => panic!("expected missing pair product, got {other:?}"),
        }
    }

    #[test]
    fn drift_products_outside_dictionary_are_dropped_with_count() {
        // b = −x³ with dictionary degree 3: identification of a needs
        // b·x = −x⁴, which has no slot. The significant term must be
        // counted as dropped (twice: once per factor).
        let dict = Arc::new(Dictionary::monomials(1, 3));
        let samples = exact_samples(
            &grid(12, -1.5, 1.5),
            |x| vec![-x[0].powi(3)],
            |_| DMatrix::from_element(1, 1, 1.0),
        )
        .unwrap();
        let gen = estimate_generator(&dict, &samples, 0.0).unwrap();
        let model = gen.identify().unwrap();
        assert_eq!(model.dropped_products(), 2);
    }

    #[test]
    fn standard_errors_scale_linearly() {
        let dict = Arc::new(Dictionary::monomials(1, 2));
        let with_se = |scale: f64| -> DMatrix<f64> {
            let samples: Vec<_> = ou_samples()
                .into_iter()
                .map(|s| {
                    let se_b = vec![0.1 * scale];
                    let se_a = DMatrix::from_element(1, 1, 0.05 * scale);
                    s.with_errors(se_b, se_a).unwrap()
                })
                .collect();
            estimate_generator_with_errors(&dict, &samples, 0.0)
                .unwrap()
                .standard_errors()
                .unwrap()
                .clone()
        };
        let se1 = with_se(1.0);
        let se2 = with_se(2.0);
        // The constant observable has zero generator action and hence zero
        // error (column 0 of L); every other column must carry uncertainty.
        for col in 1..3 {
            for row in 0..3 {
                assert!(se1[(row, col)] > 0.0, "missing se at ({row},{col})");
            }
        }
        for k in 0..se1.len() {
            assert_relative_eq!(se2[k], 2.0 * se1[k], epsilon = 1e-12);
        }
    }

    #[test]
    fn error_propagation_requires_errors_on_every_sample() {
        let dict = Arc::new(Dictionary::monomials(1, 2));
        let mut samples = ou_samples();
        samples[0] = samples[0]
            .clone()
            .with_errors(vec![0.1], DMatrix::from_element(1, 1, 0.1))
            .unwrap();
        assert!(estimate_generator_with_errors(&dict, &samples, 0.0).is_err());
    }

    #[test]
    fn sparsification_prunes_perturbed_coefficients() {
        // Exact linear drift plus a small deterministic perturbation of the
        // drift samples excites spurious high-degree coefficients; the
        // thresholded refit must recover the clean support.
        let dict = Arc::new(Dictionary::monomials(1, 3));
        let states = grid(25, -2.0, 2.0);
        let samples: Vec<_> = states
            .iter()
            .enumerate()
            .map(|(i, x)| {
                let wobble = 0.01 * (3.0 * i as f64).sin();
                SamplePoint::new(x.clone(), vec![-x[0] + wobble], DMatrix::zeros(1, 1)).unwrap()
            })
            .collect();
        let dense = estimate_generator(&dict, &samples, 0.0).unwrap();
        let sparse = estimate_generator_sparse(&dict, &samples, 0.0, 0.05).unwrap();
        let ix = dict.index_of(&[1]).unwrap();
        // The dense fit leaks into x² and x³; the sparse one must not.
        let dense_col = dense.expansion(ix);
        let sparse_col = sparse.expansion(ix);
        assert!(dense_col[2].abs() > 0.0 || dense_col[3].abs() > 0.0);
        assert_eq!(sparse_col[0], 0.0);
        assert_eq!(sparse_col[2], 0.0);
        assert_eq!(sparse_col[3], 0.0);
        assert_relative_eq!(sparse_col[1], -1.0, epsilon = 5e-3);
    }

    #[test]
    fn zero_threshold_leaves_estimate_unchanged() {
        let dict = Arc::new(Dictionary::monomials(1, 2));
        let plain = estimate_generator(&dict, &ou_samples(), 0.0).unwrap();
        let sparse = estimate_generator_sparse(&dict, &ou_samples(), 0.0, 0.0).unwrap();
        assert_eq!(plain.matrix(), sparse.matrix());
    }

    #[test]
    fn oversized_threshold_zeroes_rows() {
        let dict = Arc::new(Dictionary::monomials(1, 2));
        let sparse = estimate_generator_sparse(&dict, &ou_samples(), 0.0, 1e6).unwrap();
        assert!(sparse.matrix().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn model_spec_round_trips() {
        let dict = Arc::new(Dictionary::monomials(1, 2));
        let gen = estimate_generator(&dict, &ou_samples(), 0.0).unwrap();
        let model = gen.identify().unwrap();
        let spec = model.spec();
        let text = serde_json::to_string(&spec).unwrap();
        let back: SdeModelSpec = serde_json::from_str(&text).unwrap();
        let rebuilt: SdeModel<f64> = SdeModel::from_spec(&back).unwrap();
        let x = [0.42];
        assert_relative_eq!(
            rebuilt.eval_drift(&x).unwrap()[0],
            model.eval_drift(&x).unwrap()[0],
            epsilon = 1e-15
        );
        assert_relative_eq!(
            rebuilt.eval_diffusion(&x).unwrap()[(0, 0)],
            model.eval_diffusion(&x).unwrap()[(0, 0)],
            epsilon = 1e-15
        );
    }

    #[test]
    fn rejects_empty_sample_set() {
        let dict = Arc::new(Dictionary::monomials(1, 2));
        let samples: Vec<SamplePoint<f64>> = Vec::new();
        assert!(estimate_generator(&dict, &samples, 0.0).is_err());
    }

    #[test]
    fn rejects_non_finite_samples() {
        assert!(SamplePoint::new(vec![f64::NAN], vec![0.0], DMatrix::zeros(1, 1)).is_err());
        assert!(SamplePoint::new(vec![0.0], vec![f64::INFINITY], DMatrix::zeros(1, 1)).is_err());
    }

    proptest! {
        /// Drift b(x) = c₀ + c₁x and constant diffusion a = s² are exactly
        /// representable on the degree-3 dictionary, so identification must
        /// reproduce them to numerical precision for any coefficients.
        #[test]
        fn identification_is_exact_for_representable_fields(
            c0 in -2.0f64..2.0,
            c1 in -2.0f64..2.0,
            s in 0.1f64..1.5,
        ) {
            let dict = Arc::new(Dictionary::monomials(1, 3));
            let samples = exact_samples(
                &grid(15, -2.0, 2.0),
                |x| vec![c0 + c1 * x[0]],
                |_| DMatrix::from_element(1, 1, s * s),
            )
            .unwrap();
            let model = estimate_generator(&dict, &samples, 0.0)
                .unwrap()
                .identify()
                .unwrap();
            prop_assert_eq!(model.dropped_products(), 0);
            for &x in &[-1.7, 0.0, 0.9] {
                let b = model.eval_drift(&[x]).unwrap()[0];
                let a = model.eval_diffusion(&[x]).unwrap()[(0, 0)];
                let scale = 1.0 + c0.abs() + c1.abs();
                prop_assert!((b - (c0 + c1 * x)).abs() < 1e-8 * scale);
                prop_assert!((a - s * s).abs() < 1e-8 * (1.0 + s * s));
            }
        }
    }
}
