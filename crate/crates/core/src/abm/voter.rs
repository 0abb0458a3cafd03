//! Two-opinion voter model on a complete network.
//!
//! `N` agents each hold opinion 1 or 2. With `X₁` agents of opinion 1,
//! four reactions fire at the propensities
//!
//! ```text
//! 1 → 2 (pairwise):     (γ₁₂ + u₁) · X₁ (N − X₁) / N
//! 2 → 1 (pairwise):     (γ₂₁ + u₂) · X₁ (N − X₁) / N
//! 1 → 2 (spontaneous):  γ'₁₂ · X₁
//! 2 → 1 (spontaneous):  γ'₂₁ · (N − X₁)
//! ```
//!
//! The two control channels shift the pairwise conversion rates; negative
//! effective rates are clamped to zero. The recorded aggregate state is
//! the single concentration `c = X₁/N`, whose large-`N` diffusion limit
//!
//! ```text
//! b(c) = (γ₂₁ + u₂ − γ₁₂ − u₁) c(1−c) − γ'₁₂ c + γ'₂₁ (1−c)
//! a(c) = [ (γ₁₂ + u₁ + γ₂₁ + u₂) c(1−c) + γ'₁₂ c + γ'₂₁ (1−c) ] / N
//! ```
//!
//! is available analytically as the exact-identification target.

use std::sync::Arc;

use nalgebra::DMatrix;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::dictionary::Dictionary;
use crate::error::{Error, Result};
use crate::gedmd::SdeModel;
use crate::num::Real;

use super::schedule::ControlSchedule;
use super::{Abm, TimeSeries};

/// Complete-network voter model with controllable conversion rates.
#[derive(Debug, Clone)]
pub struct VoterModel<T> {
    /// Number of agents `N`.
    pub n_agents: usize,
    /// Pairwise conversion rate 1 → 2.
    pub gamma_12: T,
    /// Pairwise conversion rate 2 → 1.
    pub gamma_21: T,
    /// Spontaneous switching rate 1 → 2.
    pub gamma_spont_12: T,
    /// Spontaneous switching rate 2 → 1.
    pub gamma_spont_21: T,
}

impl<T: Real> VoterModel<T> {
    /// The benchmark parameterization: `γ₁₂ = 1`, `γ₂₁ = 2`,
    /// `γ'₁₂ = γ'₂₁ = 0.1`.
    pub fn standard(n_agents: usize) -> Self {
        Self {
            n_agents,
            gamma_12: T::one(),
            gamma_21: T::of(2.0),
            gamma_spont_12: T::of(0.1),
            gamma_spont_21: T::of(0.1),
        }
    }

    /// Effective pairwise rates under the control, clamped at zero.
    /// Returns `(rate_12, rate_21, clamped)`.
    fn effective_rates(&self, u: &[T]) -> (T, T, bool) {
        let r12 = self.gamma_12 + u[0];
        let r21 = self.gamma_21 + u[1];
        let clamped = r12 < T::zero() || r21 < T::zero();
        (r12.max(T::zero()), r21.max(T::zero()), clamped)
    }

    /// Diffusion-limit drift of the concentration `c = X₁/N`.
    pub fn kurtz_drift(&self, c: T, u: &[T]) -> T {
        let (r12, r21, _) = self.effective_rates(u);
        (r21 - r12) * c * (T::one() - c) - self.gamma_spont_12 * c
            + self.gamma_spont_21 * (T::one() - c)
    }

    /// Diffusion-limit variance coefficient `a(c)`.
    pub fn kurtz_diffusion(&self, c: T, u: &[T]) -> T {
        let (r12, r21, _) = self.effective_rates(u);
        ((r12 + r21) * c * (T::one() - c)
            + self.gamma_spont_12 * c
            + self.gamma_spont_21 * (T::one() - c))
            / T::of_usize(self.n_agents)
    }

    /// The diffusion-limit SDE model at a fixed control, expanded exactly
    /// on the quadratic monomial dictionary.
    pub fn kurtz_model(&self, u: &[T]) -> Result<SdeModel<T>> {
        if u.len() != 2 {
            return Err(Error::Dimension {
                expected: 2,
                got: u.len(),
            });
        }
        let (r12, r21, _) = self.effective_rates(u);
        let dict = Arc::new(Dictionary::monomials(1, 2));
        let diff = r21 - r12;
        let total = r12 + r21;
        let (s12, s21) = (self.gamma_spont_12, self.gamma_spont_21);
        let n = T::of_usize(self.n_agents);
        // b(c) = γ'₂₁ + (Δγ − γ'₁₂ − γ'₂₁) c − Δγ c².
        let drift = DMatrix::from_column_slice(3, 1, &[s21, diff - s12 - s21, -diff]);
        // a(c) = [γ'₂₁ + (Σγ + γ'₁₂ − γ'₂₁) c − Σγ c²] / N.
        let diffusion =
            DMatrix::from_column_slice(3, 1, &[s21 / n, (total + s12 - s21) / n, -total / n]);
        SdeModel::new(dict, drift, diffusion)
    }
}

impl<T: Real> Abm<T> for VoterModel<T> {
    fn state_dim(&self) -> usize {
        1
    }

    /// Exact stochastic simulation of the jump process. The control is
    /// re-evaluated at every event time, which is exact for the constant
    /// schedules used in training and optimization.
    fn run(
        &self,
        x0: &[T],
        output_times: &[T],
        schedule: &dyn ControlSchedule<T>,
        seed: u64,
    ) -> Result<TimeSeries<T>> {
        if x0.len() != 1 {
            return Err(Error::Dimension {
                expected: 1,
                got: x0.len(),
            });
        }
        if output_times.is_empty() || output_times[0] <= T::zero() {
            return Err(Error::Config(
                "output times must be positive and non-empty".into(),
            ));
        }
        if schedule.dim() != 2 {
            return Err(Error::Dimension {
                expected: 2,
                got: schedule.dim(),
            });
        }
        let n = self.n_agents;
        let c0 = x0[0].as_f64();
        if !(0.0..=1.0).contains(&c0) {
            return Err(Error::Config(format!(
                "initial concentration {c0} outside [0, 1]"
            )));
        }
        let mut x1 = (c0 * n as f64).round() as i64;
        let t_end = *output_times.last().expect("non-empty");
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut t = 0.0f64;
        let mut states = Vec::with_capacity(output_times.len());
        let mut next_out = 0usize;
        let mut warned = false;
        loop {
            let u = schedule.control(T::of(t));
            let (r12, r21, clamped) = self.effective_rates(&u);
            if clamped && !warned {
                log::warn!(
                    "control ({}, {}) drives a pairwise rate negative; clamped to zero",
                    u[0].as_f64(),
                    u[1].as_f64()
                );
                warned = true;
            }
            let x1f = x1 as f64;
            let pair = x1f * (n as f64 - x1f) / n as f64;
            let props = [
                r12.as_f64() * pair,
                r21.as_f64() * pair,
                self.gamma_spont_12.as_f64() * x1f,
                self.gamma_spont_21.as_f64() * (n as f64 - x1f),
            ];
            let total: f64 = props.iter().sum();
            let t_next = if total > 0.0 {
                // Exponential waiting time via inverse transform.
                t - (1.0 - rng.gen::<f64>()).ln() / total
            } else {
                f64::INFINITY
            };
            // Flush all output instants the jump passes over.
            while next_out < output_times.len() && output_times[next_out].as_f64() <= t_next {
                states.push(vec![T::of(x1 as f64 / n as f64)]);
                next_out += 1;
            }
            if next_out >= output_times.len() || t_next > t_end.as_f64() {
                break;
            }
            t = t_next;
            let mut pick = rng.gen::<f64>() * total;
            let mut reaction = 3;
            for (r, &p) in props.iter().enumerate() {
                if pick < p {
                    reaction = r;
                    break;
                }
                pick -= p;
            }
            match reaction {
                0 | 2 => x1 -= 1,
                _ => x1 += 1,
            }
            x1 = x1.clamp(0, n as i64);
        }
        // If the process froze (total rate 0), pad remaining outputs.
        while states.len() < output_times.len() {
            states.push(vec![T::of(x1 as f64 / n as f64)]);
        }
        TimeSeries::new(output_times.to_vec(), states)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::abm::schedule::ConstantControl;
    use crate::abm::{ensemble, ensemble_mean, km_estimate};
    use approx::assert_relative_eq;

    #[test]
    fn kurtz_drift_matches_hand_values() {
        let m = VoterModel::<f64>::standard(500);
        // b(c) = −c² + 0.8c + 0.1 at u = 0.
        assert_relative_eq!(m.kurtz_drift(0.5, &[0.0, 0.0]), 0.25, epsilon = 1e-14);
        assert_relative_eq!(m.kurtz_drift(0.0, &[0.0, 0.0]), 0.1, epsilon = 1e-14);
        assert_relative_eq!(m.kurtz_drift(1.0, &[0.0, 0.0]), -0.1, epsilon = 1e-14);
        // Symmetric controls cancel the pairwise imbalance: u = (1, 0)
        // makes both effective rates 2.
        assert_relative_eq!(m.kurtz_drift(0.5, &[1.0, 0.0]), 0.0, epsilon = 1e-14);
    }

    #[test]
    fn kurtz_model_reproduces_closed_form() {
        let m = VoterModel::<f64>::standard(500);
        let u = [0.3, -0.4];
        let model = m.kurtz_model(&u).unwrap();
        for &c in &[0.1, 0.5, 0.85] {
            assert_relative_eq!(
                model.eval_drift(&[c]).unwrap()[0],
                m.kurtz_drift(c, &u),
                epsilon = 1e-13
            );
            assert_relative_eq!(
                model.eval_diffusion(&[c]).unwrap()[(0, 0)],
                m.kurtz_diffusion(c, &u),
                epsilon = 1e-13
            );
        }
    }

    #[test]
    fn runs_are_reproducible_and_stay_in_range() {
        let m = VoterModel::<f64>::standard(200);
        let sched = ConstantControl(vec![0.0, 0.0]);
        let times: Vec<f64> = (1..=10).map(|k| 0.2 * k as f64).collect();
        let a = m.run(&[0.5], &times, &sched, 99).unwrap();
        let b = m.run(&[0.5], &times, &sched, 99).unwrap();
        assert_eq!(a, b);
        let c = m.run(&[0.5], &times, &sched, 100).unwrap();
        assert_ne!(a, c, "different seeds should generally differ");
        for s in a.states() {
            assert!((0.0..=1.0).contains(&s[0]));
        }
    }

    #[test]
    fn ensemble_mean_tracks_kurtz_drift_over_short_horizon() {
        // Over a short window the mean concentration moves by ≈ b(c₀)·t.
        let m = VoterModel::<f64>::standard(500);
        let sched = ConstantControl(vec![0.0, 0.0]);
        let t = 0.05;
        let runs = ensemble(&m, &[0.5], &[t], &sched, 400, 2024).unwrap();
        let summary = ensemble_mean(&runs).unwrap();
        let predicted = 0.5 + m.kurtz_drift(0.5, &[0.0, 0.0]) * t;
        let err = (summary.mean[0][0] - predicted).abs();
        assert!(
            err < 4.0 * summary.se[0][0] + 1e-4,
            "mean {} vs predicted {predicted} (se {})",
            summary.mean[0][0],
            summary.se[0][0]
        );
    }

    #[test]
    fn km_estimate_agrees_with_diffusion_limit() {
        let m = VoterModel::<f64>::standard(500);
        let (c, u) = (0.3, [0.5, 0.0]);
        let est = km_estimate(&m, &[c], &u, 2e-4, 4000, 7).unwrap();
        let b_true = m.kurtz_drift(c, &u);
        let a_true = m.kurtz_diffusion(c, &u);
        assert!(
            (est.drift[0] - b_true).abs() < 4.0 * est.drift_se[0],
            "drift {} ± {} vs {}",
            est.drift[0],
            est.drift_se[0],
            b_true
        );
        assert!(
            (est.diffusion[(0, 0)] - a_true).abs()
                < 4.0 * est.diffusion_se[(0, 0)] + 0.1 * a_true,
            "diffusion {} ± {} vs {}",
            est.diffusion[(0, 0)],
            est.diffusion_se[(0, 0)],
            a_true
        );
    }

    #[test]
    fn negative_effective_rates_are_clamped() {
        let m = VoterModel::<f64>::standard(100);
        // u₁ = −5 would make the 1→2 pairwise rate −4; it must clamp.
        let (r12, r21, clamped) = m.effective_rates(&[-5.0, 0.0]);
        assert_eq!(r12, 0.0);
        assert_eq!(r21, 2.0);
        assert!(clamped);
        // The simulation still runs and stays within bounds.
        let sched = ConstantControl(vec![-5.0, 0.0]);
        let ts = m.run(&[0.5], &[1.0], &sched, 1).unwrap();
        assert!((0.0..=1.0).contains(&ts.last()[0]));
    }

    #[test]
    fn absorbing_when_all_rates_vanish() {
        // No spontaneous switching and both pairwise rates clamped to zero
        // freezes the chain; outputs are padded with the frozen state.
        let m = VoterModel {
            n_agents: 50,
            gamma_12: 1.0,
            gamma_21: 1.0,
            gamma_spont_12: 0.0,
            gamma_spont_21: 0.0,
        };
        let sched = ConstantControl(vec![-1.0, -1.0]);
        let ts = m.run(&[0.4], &[0.5, 1.0, 2.0], &sched, 5).unwrap();
        for s in ts.states() {
            assert_relative_eq!(s[0], 0.4);
        }
    }
}
