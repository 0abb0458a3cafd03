//! Stochastic SIR models with contact-reducing controls.
//!
//! Both models follow the diffusion approximation of the underlying jump
//! process: with reaction channels `r` of propensity `λ_r` (per unit
//! population) and stoichiometry `ν_r`, the compartment fractions evolve
//! by the Euler–Maruyama scheme
//!
//! ```text
//! x ← x + Σ_r ν_r ( λ_r h + √(λ_r h / N) ξ_r ),   ξ_r ~ N(0,1) i.i.d.
//! ```
//!
//! Sharing one scalar increment per channel keeps `S + I + R` conserved
//! per group to roundoff; the implied diffusion matrix is
//! `a = (1/N) Σ_r ν_r ν_rᵀ λ_r`, which the analytic accessors expose as
//! identification targets.
//!
//! Controls reduce contacts: a channel between groups with closure levels
//! `u_g`, `u_h` fires at `β̃ (1−u_g)^{e/2} (1−u_h)^{e/2} · s_g i_h`, so a
//! single group's internal contacts scale by `(1−u)^e`.

use std::sync::atomic::{AtomicUsize, Ordering};

use nalgebra::DMatrix;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::num::Real;

use super::schedule::ControlSchedule;
use super::{Abm, TimeSeries};

/// Per-group mass drift above which a step is rejected as unstable.
const MAX_STEP_MOVE: f64 = 0.5;
/// Internal conservation tolerance per run (pre-clamping).
const CONSERVATION_TOL: f64 = 1e-9;

/// Contact reduction factor `(1−u)^{e/2}`, clamped below at zero.
fn closure_factor<T: Real>(u: T, exponent: u32) -> T {
    let base = (T::one() - u).max(T::zero());
    base.powf(T::of(f64::from(exponent) / 2.0))
}

/// One-group stochastic SIR in compartment fractions `(s, i)`.
///
/// One scalar control `u ∈ [0, 1)` reduces the infection rate to
/// `β̃ (1−u)^e s i`; recovery runs at `γ i`.
#[derive(Debug)]
pub struct SirOneGroup<T> {
    /// Population size `N` (sets the noise scale).
    pub population: T,
    /// Baseline infection rate `β̃`.
    pub beta: T,
    /// Recovery rate `γ`.
    pub gamma: T,
    /// Contact reduction exponent `e`.
    pub control_exponent: u32,
    /// Integrator step.
    pub dt: T,
    /// Channel noise on/off; off turns the scheme into the Euler ODE.
    pub noise: bool,
    clamped: AtomicUsize,
}

impl<T: Real> Clone for SirOneGroup<T> {
    fn clone(&self) -> Self {
        Self {
            population: self.population,
            beta: self.beta,
            gamma: self.gamma,
            control_exponent: self.control_exponent,
            dt: self.dt,
            noise: self.noise,
            clamped: AtomicUsize::new(self.clamped.load(Ordering::Relaxed)),
        }
    }
}

impl<T: Real> SirOneGroup<T> {
    /// The benchmark parameterization: `β̃ = 0.5`, `γ = 0.05`, `e = 2`.
    pub fn standard(population: T) -> Self {
        Self {
            population,
            beta: T::of(0.5),
            gamma: T::of(0.05),
            control_exponent: 2,
            dt: T::of(1e-3),
            noise: true,
            clamped: AtomicUsize::new(0),
        }
    }

    /// Effective infection rate under control `u`.
    fn infection_rate(&self, u: T) -> T {
        let f = closure_factor(u, self.control_exponent);
        self.beta * f * f
    }

    /// Drift of `(s, i)` at state `x` under control `u`.
    pub fn drift(&self, x: &[T], u: T) -> Vec<T> {
        let lam = self.infection_rate(u) * x[0] * x[1];
        vec![-lam, lam - self.gamma * x[1]]
    }

    /// Diffusion matrix of `(s, i)` at state `x` under control `u`.
    pub fn diffusion(&self, x: &[T], u: T) -> DMatrix<T> {
        let lam = (self.infection_rate(u) * x[0] * x[1]).max(T::zero());
        let rec = (self.gamma * x[1]).max(T::zero());
        let n = self.population;
        DMatrix::from_row_slice(2, 2, &[lam / n, -lam / n, -lam / n, (lam + rec) / n])
    }

    /// Coordinates clamped to `[0, 1]` so far, across all runs.
    #[must_use]
    pub fn clamp_count(&self) -> usize {
        self.clamped.load(Ordering::Relaxed)
    }
}

/// Advances the compartment vector by one channel-noise EM step.
///
/// `channels` lists `(propensity, source, target)` — each fires by moving
/// one shared increment from `source` to `target`, conserving total mass.
fn channel_step<T: Real>(
    x: &mut [T],
    channels: &[(T, usize, usize)],
    h: T,
    inv_n: T,
    noise: bool,
    rng: &mut ChaCha8Rng,
) {
    for &(lambda, src, dst) in channels {
        let lam = lambda.max(T::zero());
        let mut delta = lam * h;
        if noise {
            let xi: f64 = StandardNormal.sample(rng);
            delta += (lam * h * inv_n).sqrt() * T::of(xi);
        }
        x[src] -= delta;
        x[dst] += delta;
    }
}

/// Clamps every coordinate to `[0, 1]`, returning how many moved.
fn clamp_unit<T: Real>(x: &mut [T]) -> usize {
    let mut n = 0;
    for v in x {
        let c = v.clamp(T::zero(), T::one());
        if c != *v {
            *v = c;
            n += 1;
        }
    }
    n
}

/// Shared driver: integrates `x` (full compartment vector) to each output
/// time, recording `record_dim` leading coordinates.
#[allow(clippy::too_many_arguments)]
fn integrate_channels<T: Real>(
    mut x: Vec<T>,
    record_dim: usize,
    group_sums: &[Vec<usize>],
    channels_at: &mut impl FnMut(&[T], &[T]) -> Vec<(T, usize, usize)>,
    schedule: &dyn ControlSchedule<T>,
    output_times: &[T],
    dt: T,
    noise: bool,
    inv_n: T,
    seed: u64,
    clamp_counter: &AtomicUsize,
) -> Result<TimeSeries<T>> {
    if output_times.is_empty() || output_times[0] <= T::zero() {
        return Err(Error::Config(
            "output times must be positive and non-empty".into(),
        ));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let sum_of = |x: &[T], idx: &[usize]| idx.iter().fold(T::zero(), |s, &i| s + x[i]);
    let expected: Vec<T> = group_sums.iter().map(|g| sum_of(&x, g)).collect();
    let mut t = T::zero();
    let mut states = Vec::with_capacity(output_times.len());
    let mut clamped = 0usize;
    for &t_out in output_times {
        while t < t_out {
            let h = dt.min(t_out - t);
            let u = schedule.control(t);
            let before = x.clone();
            let channels = channels_at(&x, &u);
            channel_step(&mut x, &channels, h, inv_n, noise, &mut rng);
            for (i, (&new, &old)) in x.iter().zip(&before).enumerate() {
                if (new - old).abs().as_f64() > MAX_STEP_MOVE {
                    return Err(Error::Stability(format!(
                        "coordinate {i} moved by {} in one step of {}; reduce dt",
                        (new - old).as_f64(),
                        h.as_f64()
                    )));
                }
            }
            // Channel increments conserve each group's mass; drift beyond
            // roundoff indicates a broken stoichiometry table.
            for (g, idx) in group_sums.iter().enumerate() {
                let s = sum_of(&x, idx);
                if (s - expected[g]).abs().as_f64() > CONSERVATION_TOL {
                    return Err(Error::Stability(format!(
                        "group {g} mass drifted by {}",
                        (s - expected[g]).as_f64()
                    )));
                }
            }
            let moved = clamp_unit(&mut x);
            if moved > 0 {
                clamped += moved;
                // A clamp at the boundary injects (or removes) mass; take
                // the difference out of the group's largest compartment so
                // recorded states always satisfy the group's mass budget
                // and can seed further runs.
                for (g, idx) in group_sums.iter().enumerate() {
                    let excess = sum_of(&x, idx) - expected[g];
                    if excess != T::zero() {
                        let &largest = idx
                            .iter()
                            .max_by(|&&a, &&b| {
                                x[a].partial_cmp(&x[b]).unwrap_or(std::cmp::Ordering::Equal)
                            })
                            .expect("groups are non-empty");
                        x[largest] -= excess;
                    }
                }
            }
            t += h;
        }
        states.push(x[..record_dim].to_vec());
    }
    if clamped > 0 {
        clamp_counter.fetch_add(clamped, Ordering::Relaxed);
    }
    TimeSeries::new(output_times.to_vec(), states)
}

impl<T: Real> Abm<T> for SirOneGroup<T> {
    fn state_dim(&self) -> usize {
        2
    }

    fn run(
        &self,
        x0: &[T],
        output_times: &[T],
        schedule: &dyn ControlSchedule<T>,
        seed: u64,
    ) -> Result<TimeSeries<T>> {
        if x0.len() != 2 {
            return Err(Error::Dimension {
                expected: 2,
                got: x0.len(),
            });
        }
        if schedule.dim() != 1 {
            return Err(Error::Dimension {
                expected: 1,
                got: schedule.dim(),
            });
        }
        let r0 = T::one() - x0[0] - x0[1];
        if r0.as_f64() < -1e-12 || x0.iter().any(|&v| v < T::zero()) {
            return Err(Error::Config("initial fractions must lie in the simplex".into()));
        }
        // Internal layout: [s, i, r].
        let x = vec![x0[0], x0[1], r0.max(T::zero())];
        let beta = self.beta;
        let gamma = self.gamma;
        let e = self.control_exponent;
        integrate_channels(
            x,
            2,
            &[vec![0, 1, 2]],
            &mut |x: &[T], u: &[T]| {
                let f = closure_factor(u[0], e);
                vec![
                    (beta * f * f * x[0] * x[1], 0, 1),
                    (gamma * x[1], 1, 2),
                ]
            },
            schedule,
            output_times,
            self.dt,
            self.noise,
            T::one() / self.population,
            seed,
            &self.clamped,
        )
    }
}

/// Two-group stochastic SIR (adults and children) in fractions of the
/// total population, recorded as `(s_a, s_c, i_a, i_c)`.
///
/// Two controls `u = (u_s, u_w)` close schools and workplaces: children's
/// contacts scale by `(1−u_s)^{e/2}` per side and adults' by
/// `(1−u_w)^{e/2}`, making the contact matrix a rank-one product.
#[derive(Debug)]
pub struct SirTwoGroup<T> {
    /// Total population `N`.
    pub population: T,
    /// Adult fraction of the population.
    pub adult_fraction: T,
    /// Child fraction of the population.
    pub child_fraction: T,
    /// Baseline contact rate `β̃` (per time unit).
    pub beta: T,
    /// Recovery rate `γ` (per time unit).
    pub gamma: T,
    /// Contact reduction exponent `e`.
    pub control_exponent: u32,
    /// Integrator step.
    pub dt: T,
    /// Channel noise on/off.
    pub noise: bool,
    clamped: AtomicUsize,
}

impl<T: Real> Clone for SirTwoGroup<T> {
    fn clone(&self) -> Self {
        Self {
            population: self.population,
            adult_fraction: self.adult_fraction,
            child_fraction: self.child_fraction,
            beta: self.beta,
            gamma: self.gamma,
            control_exponent: self.control_exponent,
            dt: self.dt,
            noise: self.noise,
            clamped: AtomicUsize::new(self.clamped.load(Ordering::Relaxed)),
        }
    }
}

impl<T: Real> SirTwoGroup<T> {
    /// The benchmark town: 1045 inhabitants (744 adults, 301 children),
    /// hourly time unit, `β̃ = 0.0125 h⁻¹`, `γ = 0.1/24 h⁻¹`, `e = 2`.
    pub fn benchmark() -> Self {
        Self {
            population: T::of(1045.0),
            adult_fraction: T::of(744.0 / 1045.0),
            child_fraction: T::of(301.0 / 1045.0),
            beta: T::of(0.0125),
            gamma: T::of(0.1 / 24.0),
            control_exponent: 2,
            dt: T::of(0.1),
            noise: true,
            clamped: AtomicUsize::new(0),
        }
    }

    /// Initial state with the given numbers of infected per group and no
    /// recovered: `(s_a, s_c, i_a, i_c)` as fractions of the total.
    pub fn initial_state(&self, infected_adults: T, infected_children: T) -> Vec<T> {
        let n = self.population;
        let i_a = infected_adults / n;
        let i_c = infected_children / n;
        vec![
            self.adult_fraction - i_a,
            self.child_fraction - i_c,
            i_a,
            i_c,
        ]
    }

    /// Contact matrix entries `(β_aa, β_ac, β_cc)` under `u = (u_s, u_w)`;
    /// `β_ca = β_ac` by the rank-one structure.
    pub fn contact_rates(&self, u: &[T]) -> (T, T, T) {
        let phi_s = closure_factor(u[0], self.control_exponent);
        let phi_w = closure_factor(u[1], self.control_exponent);
        (
            self.beta * phi_w * phi_w,
            self.beta * phi_w * phi_s,
            self.beta * phi_s * phi_s,
        )
    }

    /// Channel propensities at state `x = (s_a, s_c, i_a, i_c)`:
    /// four infection channels (a←a, a←c, c←a, c←c) and two recoveries.
    fn propensities(&self, x: &[T], u: &[T]) -> [T; 6] {
        let (baa, bac, bcc) = self.contact_rates(u);
        [
            baa * x[0] * x[2],
            bac * x[0] * x[3],
            bac * x[1] * x[2],
            bcc * x[1] * x[3],
            self.gamma * x[2],
            self.gamma * x[3],
        ]
    }

    /// Drift of `(s_a, s_c, i_a, i_c)` under control `u`.
    pub fn drift(&self, x: &[T], u: &[T]) -> Vec<T> {
        let p = self.propensities(x, u);
        vec![
            -(p[0] + p[1]),
            -(p[2] + p[3]),
            p[0] + p[1] - p[4],
            p[2] + p[3] - p[5],
        ]
    }

    /// Diffusion matrix of `(s_a, s_c, i_a, i_c)` under control `u`.
    pub fn diffusion(&self, x: &[T], u: &[T]) -> DMatrix<T> {
        let p = self.propensities(x, u).map(|v| v.max(T::zero()));
        let n = self.population;
        let mut a = DMatrix::zeros(4, 4);
        let inf_a = p[0] + p[1];
        let inf_c = p[2] + p[3];
        a[(0, 0)] = inf_a / n;
        a[(2, 0)] = -inf_a / n;
        a[(0, 2)] = -inf_a / n;
        a[(2, 2)] = (inf_a + p[4]) / n;
        a[(1, 1)] = inf_c / n;
        a[(3, 1)] = -inf_c / n;
        a[(1, 3)] = -inf_c / n;
        a[(3, 3)] = (inf_c + p[5]) / n;
        a
    }

    /// Coordinates clamped to `[0, 1]` so far, across all runs.
    #[must_use]
    pub fn clamp_count(&self) -> usize {
        self.clamped.load(Ordering::Relaxed)
    }
}

impl<T: Real> Abm<T> for SirTwoGroup<T> {
    fn state_dim(&self) -> usize {
        4
    }

    fn run(
        &self,
        x0: &[T],
        output_times: &[T],
        schedule: &dyn ControlSchedule<T>,
        seed: u64,
    ) -> Result<TimeSeries<T>> {
        if x0.len() != 4 {
            return Err(Error::Dimension {
                expected: 4,
                got: x0.len(),
            });
        }
        if schedule.dim() != 2 {
            return Err(Error::Dimension {
                expected: 2,
                got: schedule.dim(),
            });
        }
        let r_a = self.adult_fraction - x0[0] - x0[2];
        let r_c = self.child_fraction - x0[1] - x0[3];
        if r_a.as_f64() < -1e-12 || r_c.as_f64() < -1e-12 || x0.iter().any(|&v| v < T::zero()) {
            return Err(Error::Config(
                "initial fractions exceed their group totals".into(),
            ));
        }
        // Internal layout: [s_a, s_c, i_a, i_c, r_a, r_c].
        let x = vec![
            x0[0],
            x0[1],
            x0[2],
            x0[3],
            r_a.max(T::zero()),
            r_c.max(T::zero()),
        ];
        let this = self;
        integrate_channels(
            x,
            4,
            &[vec![0, 2, 4], vec![1, 3, 5]],
            &mut |x: &[T], u: &[T]| {
                let p = this.propensities(&x[..4], u);
                vec![
                    (p[0], 0, 2),
                    (p[1], 0, 2),
                    (p[2], 1, 3),
                    (p[3], 1, 3),
                    (p[4], 2, 4),
                    (p[5], 3, 5),
                ]
            },
            schedule,
            output_times,
            self.dt,
            self.noise,
            T::one() / self.population,
            seed,
            &self.clamped,
        )
    }
}
