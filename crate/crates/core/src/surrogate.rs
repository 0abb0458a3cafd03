//! Trajectory prediction and objective evaluation through surrogates.
//!
//! A learned generator supports two prediction modes:
//!
//! * **Spectral propagation**: an observable `f = cᵀψ` has
//!   `E[f(X_t) | X_0 = x] ≈ (e^{tL} c)ᵀ ψ(x)` — a single matrix
//!   exponential, no trajectories.
//! * **Reduced SDE simulation**: the identified drift and diffusion
//!   fields define a cheap surrogate SDE integrated by Euler–Maruyama
//!   (noise off and one run = the mean-field ODE).
//!
//! On top of these, [`evaluate_objectives`] turns a control vector into an
//! objective vector — terminal observables and running-cost integrals on
//! the mean-field trajectory (trapezoid quadrature), plus closed-form
//! control costs — returning `+∞` components when the surrogate
//! trajectory leaves its domain of validity and diverges, so such
//! controls lose naturally in dominance comparisons.

use std::sync::Arc;

use nalgebra::DVector;
use rayon::prelude::*;

use crate::abm::TimeSeries;
use crate::control::{AffineGeneratorFamily, AugmentedModel};
use crate::error::{Error, Result};
use crate::gedmd::{GeneratorMatrix, SdeModel};
use crate::linalg;
use crate::num::Real;
use crate::seed;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

/// Largest allowed `spectral_abscissa(L) · t`; beyond this `e^{tL}`
/// overflows `f64` and propagation refuses.
pub const HORIZON_EXPONENT_LIMIT: f64 = 700.0;

/// Expected value of the observable `cᵀψ` at time `t`, started at `x0`,
/// via the matrix exponential of the generator.
pub fn propagate_observable<T: Real>(
    generator: &GeneratorMatrix<T>,
    coefficients: &DVector<T>,
    x0: &[T],
    t: T,
) -> Result<T> {
    Ok(propagate_observable_path(generator, coefficients, x0, &[t])?[0])
}

/// As [`propagate_observable`] at several times.
pub fn propagate_observable_path<T: Real>(
    generator: &GeneratorMatrix<T>,
    coefficients: &DVector<T>,
    x0: &[T],
    times: &[T],
) -> Result<Vec<T>> {
    let dict = generator.dictionary();
    if coefficients.len() != dict.len() {
        return Err(Error::Dimension {
            expected: dict.len(),
            got: coefficients.len(),
        });
    }
    let abscissa = linalg::spectral_abscissa(generator.matrix());
    let psi = dict.eval_basis(x0)?;
    times
        .iter()
        .map(|&t| {
            if t < T::zero() {
                return Err(Error::Config("propagation time must be non-negative".into()));
            }
            let exponent = (abscissa * t).as_f64();
            if exponent > HORIZON_EXPONENT_LIMIT {
                return Err(Error::Horizon(exponent));
            }
            let propagated = linalg::expm(&(generator.matrix() * t)) * coefficients;
            Ok(propagated.dot(&psi))
        })
        .collect()
}

/// One realization of the reduced SDE, plus how often the integrator had
/// to drop the noise because the diffusion matrix turned indefinite.
#[derive(Debug, Clone)]
pub struct ReducedTrajectory<T: Real> {
    /// The recorded path.
    pub series: TimeSeries<T>,
    /// Steps advanced with drift only.
    pub drift_only_steps: usize,
}

/// Integrates the reduced SDE `dX = b(X) dt + σ(X) dW` by Euler–Maruyama
/// with step `dt`, recording at `output_times`. With `noise` off this is
/// the mean-field Euler scheme. States where the identified diffusion is
/// (significantly) indefinite fall back to a drift-only step and are
/// counted; any coordinate diverging past `1/√ε` aborts with a stability
/// error.
pub fn simulate_reduced<T: Real>(
    model: &SdeModel<T>,
    x0: &[T],
    output_times: &[T],
    dt: T,
    noise: bool,
    seed: u64,
) -> Result<ReducedTrajectory<T>> {
    if output_times.is_empty() || output_times[0] <= T::zero() {
        return Err(Error::Config(
            "output times must be positive and non-empty".into(),
        ));
    }
    if dt <= T::zero() {
        return Err(Error::Config("integrator step must be positive".into()));
    }
    let d = model.dim();
    if x0.len() != d {
        return Err(Error::Dimension {
            expected: d,
            got: x0.len(),
        });
    }
    let blowup = T::of(1e8);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut x = x0.to_vec();
    let mut t = T::zero();
    let mut drift_only = 0usize;
    let mut states = Vec::with_capacity(output_times.len());
    for &t_out in output_times {
        // Uniform substeps per output interval: hits t_out exactly and
        // avoids accumulation-roundoff micro-steps.
        let span = t_out - t;
        let n_sub = ((span / dt).as_f64().ceil() as usize).max(1);
        let h = span / T::of_usize(n_sub);
        for _ in 0..n_sub {
            let b = model.eval_drift(&x)?;
            let mut step: Vec<T> = (0..d).map(|i| b[i] * h).collect();
            if noise {
                match model.sigma_pointwise(&x) {
                    Ok(sigma) => {
                        let xi = DVector::from_fn(d, |_, _| {
                            T::of(StandardNormal.sample(&mut rng))
                        });
                        let dw = sigma * xi * h.sqrt();
                        for i in 0..d {
                            step[i] += dw[i];
                        }
                    }
                    Err(Error::IndefiniteDiffusion { .. }) => drift_only += 1,
                    Err(e) => return Err(e),
                }
            }
            for i in 0..d {
                x[i] += step[i];
                if !x[i].finite() || x[i].abs() > blowup {
                    return Err(Error::Stability(format!(
                        "reduced trajectory diverged at t = {}",
                        t.as_f64()
                    )));
                }
            }
            t += h;
        }
        t = t_out;
        states.push(x.clone());
    }
    Ok(ReducedTrajectory {
        series: TimeSeries::new(output_times.to_vec(), states)?,
        drift_only_steps: drift_only,
    })
}

/// Independent reduced-SDE realizations with derived seeds, in parallel,
/// ordered by seed index.
pub fn simulate_reduced_ensemble<T: Real>(
    model: &SdeModel<T>,
    x0: &[T],
    output_times: &[T],
    dt: T,
    n_runs: usize,
    master_seed: u64,
) -> Result<Vec<ReducedTrajectory<T>>> {
    (0..n_runs)
        .into_par_iter()
        .map(|i| {
            let s = seed::derive(master_seed, seed::stream::REDUCED_SDE, i as u64);
            simulate_reduced(model, x0, output_times, dt, true, s)
        })
        .collect()
}

/// A surrogate able to produce a state-space SDE model at any control.
pub trait SurrogateDynamics<T: Real>: Sync {
    /// State dimension of the produced models.
    fn state_dim(&self) -> usize;

    /// Control dimension.
    fn control_dim(&self) -> usize;

    /// The model at the frozen control `u`.
    fn model_at(&self, u: &[T]) -> Result<SdeModel<T>>;
}

/// A fixed model ignoring the control (degenerate but useful base case).
pub struct FixedDynamics<T: Real>(pub SdeModel<T>);

impl<T: Real> SurrogateDynamics<T> for FixedDynamics<T> {
    fn state_dim(&self) -> usize {
        self.0.dim()
    }

    fn control_dim(&self) -> usize {
        0
    }

    fn model_at(&self, _u: &[T]) -> Result<SdeModel<T>> {
        Ok(self.0.clone())
    }
}

/// Control-affine interpolation: `L(u)` is identified per query.
pub struct FamilyDynamics<'a, T: Real> {
    /// The learned affine family.
    pub family: &'a AffineGeneratorFamily<T>,
}

impl<T: Real> SurrogateDynamics<T> for FamilyDynamics<'_, T> {
    fn state_dim(&self) -> usize {
        self.family.base().dictionary().dim()
    }

    fn control_dim(&self) -> usize {
        self.family.control_dim()
    }

    fn model_at(&self, u: &[T]) -> Result<SdeModel<T>> {
        self.family.interpolate(u)?.identify()
    }
}

/// Augmented model restricted to frozen controls per query.
pub struct AugmentedDynamics<'a, T: Real> {
    /// The learned augmented model.
    pub model: &'a AugmentedModel<T>,
}

impl<T: Real> SurrogateDynamics<T> for AugmentedDynamics<'_, T> {
    fn state_dim(&self) -> usize {
        self.model.state_dim()
    }

    fn control_dim(&self) -> usize {
        self.model.control_dim()
    }

    fn model_at(&self, u: &[T]) -> Result<SdeModel<T>> {
        self.model.restrict(u)
    }
}

/// A scalar function of a state or control vector.
pub type ObsFn<T> = Arc<dyn Fn(&[T]) -> T + Send + Sync>;

/// One objective of a multi-objective control problem.
#[derive(Clone)]
pub enum Objective<T: Real> {
    /// Expected observable value at a fixed time, on the mean-field
    /// trajectory of the surrogate.
    Terminal {
        /// The observable of the state.
        observable: ObsFn<T>,
        /// Evaluation time.
        time: T,
    },
    /// Running cost `∫₀ᴴ g(x(t)) dt` on the mean-field trajectory
    /// (trapezoid quadrature on the output grid).
    Integral {
        /// The integrand `g`.
        integrand: ObsFn<T>,
        /// Upper integration limit `H`.
        horizon: T,
    },
    /// Closed-form cost of the control vector itself; no dynamics.
    ControlCost {
        /// The cost function of `u`.
        cost: ObsFn<T>,
    },
}

impl<T: Real> Objective<T> {
    fn horizon(&self) -> Option<T> {
        match self {
            Self::Terminal { time, .. } => Some(*time),
            Self::Integral { horizon, .. } => Some(*horizon),
            Self::ControlCost { .. } => None,
        }
    }
}

/// Mean-field evaluation plan: integrator step and output nodes.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct MeanFieldPlan<T> {
    /// Euler step.
    pub dt: T,
    /// Output (and quadrature) nodes across the longest horizon.
    pub n_nodes: usize,
}

/// Evaluates all objectives at the control `u`, starting trajectories
/// from `x0`.
///
/// The mean-field trajectory is computed once across the longest horizon.
/// If it diverges or leaves the finite range, every trajectory-dependent
/// objective becomes `+∞` while closed-form control costs stay exact;
/// dominance then discards the control naturally.
pub fn evaluate_objectives<T: Real>(
    dynamics: &dyn SurrogateDynamics<T>,
    objectives: &[Objective<T>],
    x0: &[T],
    u: &[T],
    plan: &MeanFieldPlan<T>,
) -> Result<Vec<T>> {
    let horizon = objectives
        .iter()
        .filter_map(Objective::horizon)
        .fold(T::zero(), |m, h| m.max(h));
    let trajectory = if horizon > T::zero() {
        let model = dynamics.model_at(u)?;
        let times: Vec<T> = (1..=plan.n_nodes)
            .map(|k| horizon * T::of_usize(k) / T::of_usize(plan.n_nodes))
            .collect();
        match simulate_reduced(&model, x0, &times, plan.dt, false, 0) {
            Ok(run) => Some(Ok(run.series)),
            Err(Error::Stability(_)) => Some(Err(())),
            Err(e) => return Err(e),
        }
    } else {
        None
    };
    objectives
        .iter()
        .map(|obj| match obj {
            Objective::ControlCost { cost } => {
                // Log-barrier costs go NaN past their pole; treat any
                // non-finite cost as the +∞ sentinel.
                let v = cost(u);
                Ok(if v.finite() { v } else { T::pos_infinity() })
            }
            Objective::Terminal { observable, time } => match &trajectory {
                Some(Ok(series)) => {
                    let v = observable(&series.interpolate(*time));
                    Ok(if v.finite() { v } else { T::pos_infinity() })
                }
                Some(Err(())) => Ok(T::pos_infinity()),
                None => unreachable!("terminal objective implies a horizon"),
            },
            Objective::Integral { integrand, horizon } => match &trajectory {
                Some(Ok(series)) => {
                    let v = trapezoid_on_series(series, x0, integrand, *horizon);
                    Ok(if v.finite() { v } else { T::pos_infinity() })
                }
                Some(Err(())) => Ok(T::pos_infinity()),
                None => unreachable!("integral objective implies a horizon"),
            },
        })
        .collect()
}

/// Trapezoid rule for `∫₀ᴴ g(x(t)) dt` using the series nodes within the
/// horizon, with `x0` as the `t = 0` node.
fn trapezoid_on_series<T: Real>(
    series: &TimeSeries<T>,
    x0: &[T],
    g: &ObsFn<T>,
    horizon: T,
) -> T {
    let mut t_prev = T::zero();
    let mut g_prev = g(x0);
    let half = T::of(0.5);
    let mut acc = T::zero();
    for (k, &t) in series.times().iter().enumerate() {
        if t > horizon {
            break;
        }
        let g_here = g(series.state(k));
        acc += half * (g_prev + g_here) * (t - t_prev);
        t_prev = t;
        g_prev = g_here;
    }
    if t_prev < horizon {
        // Horizon between nodes: close with the interpolated endpoint.
        let g_end = g(&series.interpolate(horizon));
        acc += half * (g_prev + g_end) * (horizon - t_prev);
    }
    acc
}

/// Pooled root-mean-square distance between two trajectories, resampled
/// linearly at `times`: the mean runs over times *and* coordinates.
pub fn trajectory_rmse<T: Real>(a: &TimeSeries<T>, b: &TimeSeries<T>, times: &[T]) -> Result<T> {
    if a.dim() != b.dim() {
        return Err(Error::Dimension {
            expected: a.dim(),
            got: b.dim(),
        });
    }
    if times.is_empty() {
        return Err(Error::Config("need at least one comparison time".into()));
    }
    let d = a.dim();
    let mut acc = T::zero();
    for &t in times {
        let xa = a.interpolate(t);
        let xb = b.interpolate(t);
        for i in 0..d {
            let e = xa[i] - xb[i];
            acc += e * e;
        }
    }
    Ok((acc / T::of_usize(times.len() * d)).sqrt())
}
