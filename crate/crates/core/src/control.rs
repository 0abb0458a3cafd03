//! Generator models of controlled dynamics.
//!
//! Two complementary routes from per-control training data to a surrogate
//! valid on a whole control region:
//!
//! * **Affine interpolation** ([`AffineGeneratorFamily`]). When drift and
//!   diffusion depend affinely on the control,
//!   `L(u) = L₀ + Σ_i u_i A_i` holds exactly, and the channel matrices
//!   `A_i` follow from finitely many constant-control estimates:
//!   `A_i = (L(s·e_i) − L₀)/s`. Estimated generators inherit this affinity
//!   exactly when every constant-control estimate uses the *same* sample
//!   states, so interpolation introduces no additional error. For
//!   non-affine dependence the family records how badly held-out controls
//!   violate affinity.
//!
//! * **State augmentation** ([`AugmentedModel`]). The control is appended
//!   to the state, `z = (x, u)`, with its own (deterministic) dynamics
//!   `u̇` from a schedule, and a single generator is learned on a
//!   dictionary over `z`. Nonlinear control dependence is then just
//!   another polynomial in the augmented state. Freezing the control
//!   recovers an ordinary state-space model for comparison.

use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};

use crate::dictionary::Dictionary;
use crate::error::{Error, Result};
use crate::gedmd::{
    estimate_generator, GeneratorMatrix, SamplePoint, SdeModel, NEGLIGIBLE_COEFFICIENT,
};
use crate::linalg;
use crate::num::Real;

/// Affinity diagnostic for one held-out control: the Frobenius distance
/// between the interpolated and directly estimated generator, and the norm
/// of the direct estimate for scale.
#[derive(Debug, Clone)]
pub struct ConsistencyCheck<T: Real> {
    /// The held-out control vector.
    pub control: Vec<T>,
    /// `‖L_interp(u) − L_direct(u)‖_F`.
    pub defect: T,
    /// `‖L_direct(u)‖_F`.
    pub scale: T,
}

impl<T: Real> ConsistencyCheck<T> {
    /// Defect relative to the direct estimate's norm.
    #[must_use]
    pub fn relative_defect(&self) -> T {
        if self.scale > T::zero() {
            self.defect / self.scale
        } else {
            self.defect
        }
    }
}

/// Control-affine generator family `L(u) = L₀ + Σ_i u_i A_i`.
#[derive(Debug)]
pub struct AffineGeneratorFamily<T: Real> {
    base: GeneratorMatrix<T>,
    channels: Vec<DMatrix<T>>,
    checks: Vec<ConsistencyCheck<T>>,
    affinity_warned: AtomicBool,
}

/// Relative held-out defect above which the family warns that the
/// underlying dynamics are probably not control-affine.
pub const AFFINITY_WARN_THRESHOLD: f64 = 0.05;

impl<T: Real> AffineGeneratorFamily<T> {
    /// Learns the family from constant-control estimates.
    ///
    /// `sampler(u)` must produce training samples for the dynamics under
    /// the constant control `u` — at the *same* sample states for every
    /// call, or the estimated family loses the exact-affinity property.
    /// One estimate is made at `u = 0` and one at `u = scales[i]·e_i` per
    /// channel; each control in `held_out` adds a consistency diagnostic.
    pub fn learn(
        dict: &Arc<Dictionary>,
        scales: &[T],
        mut sampler: impl FnMut(&[T]) -> Result<Vec<SamplePoint<T>>>,
        ridge: T,
        held_out: &[Vec<T>],
    ) -> Result<Self> {
        let q = scales.len();
        if q == 0 {
            return Err(Error::Config("control dimension must be at least 1".into()));
        }
        if scales.iter().any(|&s| s <= T::zero()) {
            return Err(Error::Config("training control scales must be positive".into()));
        }
        let zero = vec![T::zero(); q];
        let base = estimate_generator(dict, &sampler(&zero)?, ridge)?;
        let mut channels = Vec::with_capacity(q);
        for (i, &s) in scales.iter().enumerate() {
            let mut u = vec![T::zero(); q];
            u[i] = s;
            let li = estimate_generator(dict, &sampler(&u)?, ridge)?;
            channels.push((li.matrix() - base.matrix()) / s);
        }
        let family = Self {
            base,
            channels,
            checks: Vec::new(),
            affinity_warned: AtomicBool::new(false),
        };
        let mut checks = Vec::with_capacity(held_out.len());
        for u in held_out {
            let direct = estimate_generator(dict, &sampler(u)?, ridge)?;
            let interp = family.interpolate(u)?;
            checks.push(ConsistencyCheck {
                control: u.clone(),
                defect: linalg::frobenius_distance(interp.matrix(), direct.matrix()),
                scale: direct.matrix().norm(),
            });
        }
        Ok(Self { checks, ..family })
    }

    /// Builds a family from explicitly known base and channel matrices.
    pub fn from_parts(base: GeneratorMatrix<T>, channels: Vec<DMatrix<T>>) -> Result<Self> {
        let ell = base.dictionary().len();
        for a in &channels {
            if a.nrows() != ell || a.ncols() != ell {
                return Err(Error::Dimension {
                    expected: ell,
                    got: a.nrows().max(a.ncols()),
                });
            }
        }
        Ok(Self {
            base,
            channels,
            checks: Vec::new(),
            affinity_warned: AtomicBool::new(false),
        })
    }

    /// Number of control channels.
    #[must_use]
    pub fn control_dim(&self) -> usize {
        self.channels.len()
    }

    /// The zero-control generator `L₀`.
    #[must_use]
    pub fn base(&self) -> &GeneratorMatrix<T> {
        &self.base
    }

    /// The channel matrix `A_i`.
    #[must_use]
    pub fn channel(&self, i: usize) -> &DMatrix<T> {
        &self.channels[i]
    }

    /// Held-out affinity diagnostics gathered during learning.
    #[must_use]
    pub fn consistency_checks(&self) -> &[ConsistencyCheck<T>] {
        &self.checks
    }

    /// Largest relative held-out defect, if any checks were made.
    #[must_use]
    pub fn max_relative_defect(&self) -> Option<T> {
        self.checks
            .iter()
            .map(ConsistencyCheck::relative_defect)
            .fold(None, |acc, v| Some(acc.map_or(v, |a: T| a.max(v))))
    }

    /// The interpolated generator `L(u) = L₀ + Σ_i u_i A_i`.
    ///
    /// Warns once per family when held-out diagnostics showed the dynamics
    /// violating control-affinity by more than [`AFFINITY_WARN_THRESHOLD`].
    pub fn interpolate(&self, u: &[T]) -> Result<GeneratorMatrix<T>> {
        if u.len() != self.channels.len() {
            return Err(Error::Dimension {
                expected: self.channels.len(),
                got: u.len(),
            });
        }
        if let Some(defect) = self.max_relative_defect() {
            if defect.as_f64() > AFFINITY_WARN_THRESHOLD
                && !self.affinity_warned.swap(true, Ordering::Relaxed)
            {
                log::warn!(
                    "held-out controls violate affinity by {:.2}% (relative); \
                     interpolated generators are unreliable — consider state augmentation",
                    100.0 * defect.as_f64()
                );
            }
        }
        let mut l = self.base.matrix().clone();
        for (ui, ai) in u.iter().zip(&self.channels) {
            l += ai * *ui;
        }
        GeneratorMatrix::from_matrix(Arc::clone(self.base.dictionary()), l)
    }
}

/// Serializable form of an [`AffineGeneratorFamily`] (entries as `f64`).
#[derive(Debug, Clone, serde::Serialize, serde::Deserialize)]
pub struct AffineFamilySpec {
    /// The zero-control generator.
    pub base: crate::gedmd::GeneratorMatrixSpec,
    /// Channel matrices, row-major.
    pub channels: Vec<Vec<Vec<f64>>>,
    /// Held-out diagnostics: `(control, defect, scale)` triples.
    pub checks: Vec<(Vec<f64>, f64, f64)>,
}

impl<T: Real> AffineGeneratorFamily<T> {
    /// Plain-data description for serialization.
    #[must_use]
    pub fn spec(&self) -> AffineFamilySpec {
        let rows = |m: &DMatrix<T>| -> Vec<Vec<f64>> {
            m.row_iter()
                .map(|r| r.iter().map(|v| v.as_f64()).collect())
                .collect()
        };
        AffineFamilySpec {
            base: self.base.spec(),
            channels: self.channels.iter().map(rows).collect(),
            checks: self
                .checks
                .iter()
                .map(|c| {
                    (
                        c.control.iter().map(|v| v.as_f64()).collect(),
                        c.defect.as_f64(),
                        c.scale.as_f64(),
                    )
                })
                .collect(),
        }
    }

    /// Rebuilds a family from its serialized description.
    pub fn from_spec(spec: &AffineFamilySpec) -> Result<Self> {
        let base = GeneratorMatrix::from_spec(&spec.base)?;
        let ell = base.dictionary().len();
        let mut channels = Vec::with_capacity(spec.channels.len());
        for rows in &spec.channels {
            if rows.len() != ell || rows.iter().any(|r| r.len() != ell) {
                return Err(Error::Config("channel matrix shape mismatch".into()));
            }
            channels.push(DMatrix::from_fn(ell, ell, |i, j| T::of(rows[i][j])));
        }
        Ok(Self {
            base,
            channels,
            checks: spec
                .checks
                .iter()
                .map(|(u, defect, scale)| ConsistencyCheck {
                    control: u.iter().copied().map(T::of).collect(),
                    defect: T::of(*defect),
                    scale: T::of(*scale),
                })
                .collect(),
            affinity_warned: AtomicBool::new(false),
        })
    }
}

/// Generator model over the control-augmented state `z = (x, u)`.
#[derive(Debug, Clone)]
pub struct AugmentedModel<T: Real> {
    model: SdeModel<T>,
    state_dim: usize,
    control_dim: usize,
}

/// Builds an augmented-space training sample: state `(x, u)`, drift
/// `(b, u̇)` and block-diagonal diffusion `diag(a, 0)` — the control
/// follows its schedule deterministically.
pub fn augmented_sample<T: Real>(
    x: &[T],
    u: &[T],
    b: &[T],
    udot: &[T],
    a: &DMatrix<T>,
) -> Result<SamplePoint<T>> {
    let (d, q) = (x.len(), u.len());
    if udot.len() != q {
        return Err(Error::Dimension {
            expected: q,
            got: udot.len(),
        });
    }
    if b.len() != d || a.nrows() != d || a.ncols() != d {
        return Err(Error::Dimension {
            expected: d,
            got: b.len(),
        });
    }
    let state: Vec<T> = x.iter().chain(u).copied().collect();
    let drift: Vec<T> = b.iter().chain(udot).copied().collect();
    let mut diffusion = DMatrix::zeros(d + q, d + q);
    diffusion.view_mut((0, 0), (d, d)).copy_from(a);
    SamplePoint::new(state, drift, diffusion)
}

/// As [`augmented_sample`] with standard errors on the physical blocks
/// (the scheduled control dynamics are exact, so their errors are zero).
pub fn augmented_sample_with_errors<T: Real>(
    x: &[T],
    u: &[T],
    b: &[T],
    udot: &[T],
    a: &DMatrix<T>,
    b_se: &[T],
    a_se: &DMatrix<T>,
) -> Result<SamplePoint<T>> {
    let (d, q) = (x.len(), u.len());
    let plain = augmented_sample(x, u, b, udot, a)?;
    let mut drift_se: Vec<T> = b_se.to_vec();
    drift_se.extend(std::iter::repeat(T::zero()).take(q));
    let mut diffusion_se = DMatrix::zeros(d + q, d + q);
    diffusion_se.view_mut((0, 0), (d, d)).copy_from(a_se);
    plain.with_errors(drift_se, diffusion_se)
}

impl<T: Real> AugmentedModel<T> {
    /// Learns an augmented model from samples over `(x, u)` and identifies
    /// drift and diffusion on the augmented dictionary.
    pub fn learn(
        dict: &Arc<Dictionary>,
        state_dim: usize,
        samples: &[SamplePoint<T>],
        ridge: T,
    ) -> Result<Self> {
        if state_dim == 0 || state_dim >= dict.dim() {
            return Err(Error::Config(format!(
                "state dimension {state_dim} must split a {}-dimensional augmented dictionary",
                dict.dim()
            )));
        }
        let generator = estimate_generator(dict, samples, ridge)?;
        let model = generator.identify()?;
        Ok(Self {
            model,
            state_dim,
            control_dim: dict.dim() - state_dim,
        })
    }

    /// Wraps an identified augmented-space model.
    pub fn from_model(model: SdeModel<T>, state_dim: usize) -> Result<Self> {
        if state_dim == 0 || state_dim >= model.dim() {
            return Err(Error::Config(format!(
                "state dimension {state_dim} must split a {}-dimensional model",
                model.dim()
            )));
        }
        let control_dim = model.dim() - state_dim;
        Ok(Self {
            model,
            state_dim,
            control_dim,
        })
    }

    /// The underlying augmented-space SDE model.
    #[must_use]
    pub fn model(&self) -> &SdeModel<T> {
        &self.model
    }

    /// Physical state dimension `d`.
    #[must_use]
    pub fn state_dim(&self) -> usize {
        self.state_dim
    }

    /// Control dimension `q`.
    #[must_use]
    pub fn control_dim(&self) -> usize {
        self.control_dim
    }

    /// Zeroes every diffusion expansion touching a control coordinate.
    ///
    /// The scheduled control is deterministic, so these blocks are pure
    /// estimation noise; dropping them keeps the pointwise diffusion
    /// factorization well-posed near the noise floor.
    pub fn zero_control_diffusion(&mut self) {
        let dim = self.model.dim();
        let dict = Arc::clone(self.model.dictionary());
        let drift = self.model.drift_coefficients().clone();
        let mut diffusion = self.model.diffusion_coefficients().clone();
        for i in 0..dim {
            for j in 0..dim {
                if i >= self.state_dim || j >= self.state_dim {
                    diffusion.set_column(i * dim + j, &DVector::zeros(dict.len()));
                }
            }
        }
        self.model = SdeModel::new(dict, drift, diffusion)
            .expect("reshaped coefficients keep their dimensions");
    }

    /// Freezes the control at `u`, producing an ordinary state-space model.
    ///
    /// Every augmented monomial `x^α u^β` collapses onto `x^α` with weight
    /// `u^β`; the restricted dictionary collects the distinct state parts.
    pub fn restrict(&self, u: &[T]) -> Result<SdeModel<T>> {
        if u.len() != self.control_dim {
            return Err(Error::Dimension {
                expected: self.control_dim,
                got: u.len(),
            });
        }
        let d = self.state_dim;
        let aug = self.model.dictionary();
        let mut state_parts: Vec<Vec<u32>> = Vec::new();
        for k in 0..aug.len() {
            let alpha = aug.exponents(k)[..d].to_vec();
            if !state_parts.contains(&alpha) {
                state_parts.push(alpha);
            }
        }
        let dict = Arc::new(Dictionary::from_multi_indices(d, state_parts)?);
        // u^β weights per augmented basis function.
        let weights: Vec<T> = (0..aug.len())
            .map(|k| {
                aug.exponents(k)[d..]
                    .iter()
                    .zip(u)
                    .fold(T::one(), |w, (&p, &ui)| w * ui.powi(p as i32))
            })
            .collect();
        let targets: Vec<usize> = (0..aug.len())
            .map(|k| {
                dict.index_of(&aug.exponents(k)[..d])
                    .expect("state part was collected above")
            })
            .collect();
        let collapse = |col: nalgebra::DVectorView<T>| -> DVector<T> {
            let mut out = DVector::zeros(dict.len());
            for k in 0..aug.len() {
                out[targets[k]] += weights[k] * col[k];
            }
            out
        };
        let mut drift = DMatrix::zeros(dict.len(), d);
        for i in 0..d {
            drift.set_column(i, &collapse(self.model.drift_coefficients().column(i)));
        }
        let mut diffusion = DMatrix::zeros(dict.len(), d * d);
        let dim = self.model.dim();
        for i in 0..d {
            for j in 0..d {
                diffusion.set_column(
                    i * d + j,
                    &collapse(self.model.diffusion_coefficients().column(i * dim + j)),
                );
            }
        }
        SdeModel::new(dict, drift, diffusion)
    }

    /// `true` when the learned control drift matches the scheduled one:
    /// the expansions of the control components should carry no significant
    /// dependence on the physical state.
    #[must_use]
    pub fn control_drift_is_autonomous(&self) -> bool {
        let d = self.state_dim;
        let dict = self.model.dictionary();
        let coeffs = self.model.drift_coefficients();
        let scale = coeffs.iter().fold(T::zero(), |m, v| m.max(v.abs()));
        let floor = scale * T::of(NEGLIGIBLE_COEFFICIENT.sqrt());
        for i in d..self.model.dim() {
            for k in 0..dict.len() {
                if coeffs[(k, i)].abs() > floor && dict.exponents(k)[..d].iter().any(|&p| p > 0) {
                    return false;
                }
            }
        }
        true
    }
}
