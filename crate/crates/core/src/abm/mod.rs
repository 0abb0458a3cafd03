//! Ground-truth agent-based models and pointwise estimators.
//!
//! The surrogate pipeline never sees model internals: an ABM exposes only
//! [`Abm::run`], producing trajectories under a control schedule. From
//! short ensembles of such runs, the Kramers–Moyal module estimates the
//! pointwise drift and diffusion that feed generator estimation; longer
//! ensembles provide the validation ground truth.

pub mod schedule;
pub mod sir;
pub mod voter;

mod km;

pub use km::{km_estimate, km_from_deltas, KmEstimate};

use statrs::distribution::ContinuousCDF;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::num::Real;
use crate::seed;
use schedule::ControlSchedule;

/// One recorded realization: states at strictly increasing output times.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeSeries<T> {
    times: Vec<T>,
    states: Vec<Vec<T>>,
}

impl<T: Real> TimeSeries<T> {
    /// Wraps recorded data, checking shape and monotone times.
    pub fn new(times: Vec<T>, states: Vec<Vec<T>>) -> Result<Self> {
        if times.len() != states.len() {
            return Err(Error::Dimension {
                expected: times.len(),
                got: states.len(),
            });
        }
        if times.is_empty() {
            return Err(Error::DegenerateData("empty time series".into()));
        }
        if times.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::DegenerateData(
                "output times must be strictly increasing".into(),
            ));
        }
        let d = states[0].len();
        if states.iter().any(|s| s.len() != d) {
            return Err(Error::DegenerateData(
                "inconsistent state dimensions along the series".into(),
            ));
        }
        Ok(Self { times, states })
    }

    /// Number of recorded instants.
    #[must_use]
    pub fn len(&self) -> usize {
        self.times.len()
    }

    /// `true` when nothing was recorded (never holds for validated data).
    #[must_use]
    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    /// State dimension.
    #[must_use]
    pub fn dim(&self) -> usize {
        self.states[0].len()
    }

    /// Recorded times.
    #[must_use]
    pub fn times(&self) -> &[T] {
        &self.times
    }

    /// Recorded states, one row per time.
    #[must_use]
    pub fn states(&self) -> &[Vec<T>] {
        &self.states
    }

    /// State at record `k`.
    #[must_use]
    pub fn state(&self, k: usize) -> &[T] {
        &self.states[k]
    }

    /// Final recorded state.
    #[must_use]
    pub fn last(&self) -> &[T] {
        self.states.last().expect("validated non-empty")
    }

    /// Linear interpolation at `t`, clamped to the recorded range.
    #[must_use]
    pub fn interpolate(&self, t: T) -> Vec<T> {
        if t <= self.times[0] {
            return self.states[0].clone();
        }
        if t >= *self.times.last().expect("non-empty") {
            return self.last().to_vec();
        }
        let k = self.times.partition_point(|&s| s <= t);
        let (t0, t1) = (self.times[k - 1], self.times[k]);
        let w = (t - t0) / (t1 - t0);
        self.states[k - 1]
            .iter()
            .zip(&self.states[k])
            .map(|(&a, &b)| a + w * (b - a))
            .collect()
    }
}

/// A stochastic agent-based model observed only through simulation.
pub trait Abm<T: Real>: Sync {
    /// Dimension of the recorded (aggregate) state.
    fn state_dim(&self) -> usize;

    /// Runs one realization from `x0`, recording the state at each of the
    /// strictly increasing `output_times` (all positive), under the given
    /// control schedule and random seed.
    fn run(
        &self,
        x0: &[T],
        output_times: &[T],
        schedule: &dyn ControlSchedule<T>,
        seed: u64,
    ) -> Result<TimeSeries<T>>;
}

/// Runs `n_runs` independent realizations with seeds derived from `seed`.
/// Runs execute in parallel; the output order matches the seed order, so
/// results are reproducible regardless of thread scheduling.
pub fn ensemble<T: Real, A: Abm<T> + ?Sized>(
    abm: &A,
    x0: &[T],
    output_times: &[T],
    schedule: &dyn ControlSchedule<T>,
    n_runs: usize,
    master_seed: u64,
) -> Result<Vec<TimeSeries<T>>> {
    if n_runs == 0 {
        return Err(Error::Config("ensemble needs at least one run".into()));
    }
    (0..n_runs)
        .into_par_iter()
        .map(|i| {
            let s = seed::derive(master_seed, seed::stream::ENSEMBLE, i as u64);
            abm.run(x0, output_times, schedule, s)
        })
        .collect()
}

/// Pointwise ensemble mean with standard errors, over runs recorded at
/// identical times.
#[derive(Debug, Clone)]
pub struct EnsembleSummary<T> {
    /// Output times shared by all runs.
    pub times: Vec<T>,
    /// Mean state per time.
    pub mean: Vec<Vec<T>>,
    /// Standard error of the mean per time and coordinate.
    pub se: Vec<Vec<T>>,
    /// Number of runs.
    pub n_runs: usize,
}

/// Averages an ensemble of runs recorded at identical output times.
pub fn ensemble_mean<T: Real>(runs: &[TimeSeries<T>]) -> Result<EnsembleSummary<T>> {
    let first = runs
        .first()
        .ok_or_else(|| Error::DegenerateData("empty ensemble".into()))?;
    let (times, d, steps) = (first.times().to_vec(), first.dim(), first.len());
    for r in runs {
        if r.times() != times.as_slice() || r.dim() != d {
            return Err(Error::DegenerateData(
                "ensemble runs recorded on different grids".into(),
            ));
        }
    }
    let n = T::of_usize(runs.len());
    let mut mean = vec![vec![T::zero(); d]; steps];
    let mut sq = vec![vec![T::zero(); d]; steps];
    for r in runs {
        for (k, x) in r.states().iter().enumerate() {
            for i in 0..d {
                mean[k][i] += x[i];
                sq[k][i] += x[i] * x[i];
            }
        }
    }
    let mut se = vec![vec![T::zero(); d]; steps];
    for k in 0..steps {
        for i in 0..d {
            mean[k][i] /= n;
            // Unbiased sample variance; zero for a single run.
            let var = if runs.len() > 1 {
                ((sq[k][i] - n * mean[k][i] * mean[k][i]) / (n - T::one())).max(T::zero())
            } else {
                T::zero()
            };
            se[k][i] = (var / n).sqrt();
        }
    }
    Ok(EnsembleSummary {
        times,
        mean,
        se,
        n_runs: runs.len(),
    })
}

/// Two-sided standard-normal quantile: the `z` with
/// `P(|Z| ≤ z) = confidence`.
#[must_use]
pub fn normal_quantile(confidence: f64) -> f64 {
    assert!(
        (0.0..1.0).contains(&confidence),
        "confidence must lie in [0, 1)"
    );
    let normal = statrs::distribution::Normal::new(0.0, 1.0).expect("unit normal");
    normal.inverse_cdf(0.5 * (1.0 + confidence))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn time_series_validates_shape() {
        assert!(TimeSeries::new(vec![0.0, 1.0], vec![vec![1.0]]).is_err());
        assert!(TimeSeries::new(vec![1.0, 1.0], vec![vec![1.0], vec![2.0]]).is_err());
        assert!(TimeSeries::new(vec![0.0, 1.0], vec![vec![1.0], vec![2.0, 3.0]]).is_err());
        assert!(TimeSeries::<f64>::new(vec![], vec![]).is_err());
    }

    #[test]
    fn interpolation_is_linear_and_clamped() {
        let ts = TimeSeries::new(
            vec![0.0, 1.0, 3.0],
            vec![vec![0.0, 10.0], vec![2.0, 8.0], vec![6.0, 0.0]],
        )
        .unwrap();
        assert_eq!(ts.interpolate(-1.0), vec![0.0, 10.0]);
        assert_eq!(ts.interpolate(5.0), vec![6.0, 0.0]);
        let mid = ts.interpolate(2.0);
        assert_relative_eq!(mid[0], 4.0);
        assert_relative_eq!(mid[1], 4.0);
    }

    #[test]
    fn ensemble_mean_and_se_match_hand_computation() {
        let mk = |a: f64, b: f64| {
            TimeSeries::new(vec![1.0, 2.0], vec![vec![a], vec![b]]).unwrap()
        };
        let runs = vec![mk(1.0, 4.0), mk(3.0, 8.0)];
        let summary = ensemble_mean(&runs).unwrap();
        assert_relative_eq!(summary.mean[0][0], 2.0);
        assert_relative_eq!(summary.mean[1][0], 6.0);
        // sd = √2 and 2√2; se = sd/√2.
        assert_relative_eq!(summary.se[0][0], 1.0, epsilon = 1e-12);
        assert_relative_eq!(summary.se[1][0], 2.0, epsilon = 1e-12);
    }

    #[test]
    fn quantile_matches_tabulated_values() {
        assert_relative_eq!(normal_quantile(0.95), 1.959964, epsilon = 1e-5);
        assert_relative_eq!(normal_quantile(0.999), 3.290527, epsilon = 1e-5);
    }
}
