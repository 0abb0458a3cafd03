//! Kramers–Moyal estimation of pointwise drift and diffusion.
//!
//! From `n` independent one-step increments `ΔX = X_τ − x₀` of length
//! `τ`, the conditional moments
//!
//! ```text
//! b̂(x₀)    = E[ΔX] / τ,
//! â_ij(x₀) = E[ΔX_i ΔX_j] / τ        (raw second moment)
//! ```
//!
//! converge to the drift and diffusion of the effective SDE as `τ → 0`,
//! `n → ∞`. Standard errors come from the sample variances of the same
//! averages; the diffusion estimate additionally carries an `O(‖b‖² τ)`
//! bias, so burst lengths must be chosen against the target accuracy.

use nalgebra::DMatrix;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::gedmd::SamplePoint;
use crate::num::Real;
use crate::seed;

use super::schedule::ConstantControl;
use super::Abm;

/// Pointwise drift/diffusion estimate with Monte Carlo standard errors.
#[derive(Debug, Clone)]
pub struct KmEstimate<T: Real> {
    /// The state the burst started from.
    pub state: Vec<T>,
    /// Drift estimate `b̂(x₀)`.
    pub drift: Vec<T>,
    /// Diffusion estimate `â(x₀)` (symmetric).
    pub diffusion: DMatrix<T>,
    /// Standard error of each drift component.
    pub drift_se: Vec<T>,
    /// Standard error of each diffusion entry.
    pub diffusion_se: DMatrix<T>,
    /// Number of increments behind the estimate.
    pub n: usize,
}

impl<T: Real> KmEstimate<T> {
    /// Converts into a generator-estimation sample carrying the errors.
    pub fn into_sample(self) -> Result<SamplePoint<T>> {
        SamplePoint::new(self.state, self.drift, self.diffusion)?
            .with_errors(self.drift_se, self.diffusion_se)
    }
}

/// Kramers–Moyal estimate from precomputed increments.
pub fn km_from_deltas<T: Real>(x0: &[T], deltas: &[Vec<T>], tau: T) -> Result<KmEstimate<T>> {
    let d = x0.len();
    let n = deltas.len();
    if n < 2 {
        return Err(Error::DegenerateData(
            "Kramers-Moyal estimation needs at least two increments".into(),
        ));
    }
    if tau <= T::zero() {
        return Err(Error::Config("burst length must be positive".into()));
    }
    if deltas.iter().any(|dx| dx.len() != d) {
        return Err(Error::Dimension {
            expected: d,
            got: deltas.iter().map(Vec::len).find(|&l| l != d).unwrap_or(d),
        });
    }
    let nf = T::of_usize(n);
    let inv_tau = T::one() / tau;

    // First moment and its spread.
    let mut mean = vec![T::zero(); d];
    let mut sq = vec![T::zero(); d];
    for dx in deltas {
        for i in 0..d {
            mean[i] += dx[i];
            sq[i] += dx[i] * dx[i];
        }
    }
    let mut drift = vec![T::zero(); d];
    let mut drift_se = vec![T::zero(); d];
    for i in 0..d {
        mean[i] /= nf;
        let var = ((sq[i] - nf * mean[i] * mean[i]) / (nf - T::one())).max(T::zero());
        drift[i] = mean[i] * inv_tau;
        drift_se[i] = (var / nf).sqrt() * inv_tau;
    }

    // Raw second moment and its spread.
    let mut m2: DMatrix<T> = DMatrix::zeros(d, d);
    let mut m2sq: DMatrix<T> = DMatrix::zeros(d, d);
    for dx in deltas {
        for i in 0..d {
            for j in i..d {
                let p = dx[i] * dx[j];
                m2[(i, j)] += p;
                m2sq[(i, j)] += p * p;
            }
        }
    }
    let mut diffusion = DMatrix::zeros(d, d);
    let mut diffusion_se = DMatrix::zeros(d, d);
    for i in 0..d {
        for j in i..d {
            let avg = m2[(i, j)] / nf;
            let var = ((m2sq[(i, j)] - nf * avg * avg) / (nf - T::one())).max(T::zero());
            let est = avg * inv_tau;
            let se = (var / nf).sqrt() * inv_tau;
            diffusion[(i, j)] = est;
            diffusion[(j, i)] = est;
            diffusion_se[(i, j)] = se;
            diffusion_se[(j, i)] = se;
        }
    }
    Ok(KmEstimate {
        state: x0.to_vec(),
        drift,
        diffusion,
        drift_se,
        diffusion_se,
        n,
    })
}

/// Runs `n` independent bursts of length `tau` from `x0` under a constant
/// control and estimates drift and diffusion there. Seeds derive from
/// `master_seed`, so the estimate is reproducible and independent of
/// thread scheduling.
pub fn km_estimate<T: Real, A: Abm<T> + ?Sized>(
    abm: &A,
    x0: &[T],
    u: &[T],
    tau: T,
    n: usize,
    master_seed: u64,
) -> Result<KmEstimate<T>> {
    let schedule = ConstantControl(u.to_vec());
    let deltas: Vec<Vec<T>> = (0..n)
        .into_par_iter()
        .map(|i| -> Result<Vec<T>> {
            let s = seed::derive(master_seed, seed::stream::KRAMERS_MOYAL, i as u64);
            let run = abm.run(x0, &[tau], &schedule, s)?;
            Ok(run
                .last()
                .iter()
                .zip(x0)
                .map(|(&xt, &x)| xt - x)
                .collect())
        })
        .collect::<Result<_>>()?;
    km_from_deltas(x0, &deltas, tau)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use rand::SeedableRng;
    use rand_distr::{Distribution, Normal};

    #[test]
    fn recovers_moments_of_synthetic_gaussian_increments() {
        // ΔX ~ N(bτ, aτ) with b = 1.5, a = 0.8, τ = 0.01: the estimators
        // must land within a few standard errors of the truth.
        let (b, a, tau) = (1.5f64, 0.8f64, 0.01f64);
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(42);
        let normal = Normal::new(b * tau, (a * tau).sqrt()).unwrap();
        let deltas: Vec<Vec<f64>> = (0..20_000)
            .map(|_| vec![normal.sample(&mut rng)])
            .collect();
        let est = km_from_deltas(&[0.3], &deltas, tau).unwrap();
        assert!(
            (est.drift[0] - b).abs() < 4.0 * est.drift_se[0],
            "drift {} ± {} vs {}",
            est.drift[0],
            est.drift_se[0],
            b
        );
        // Raw moment carries the b²τ bias term.
        let expected_a = a + b * b * tau;
        assert!(
            (est.diffusion[(0, 0)] - expected_a).abs() < 4.0 * est.diffusion_se[(0, 0)],
            "diffusion {} ± {} vs {}",
            est.diffusion[(0, 0)],
            est.diffusion_se[(0, 0)],
            expected_a
        );
        assert!(est.drift_se[0] > 0.0 && est.diffusion_se[(0, 0)] > 0.0);
    }

    #[test]
    fn standard_errors_shrink_with_sample_size() {
        let tau = 0.05f64;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        let normal = Normal::new(0.0, (2.0 * tau).sqrt()).unwrap();
        let all: Vec<Vec<f64>> = (0..40_000)
            .map(|_| vec![normal.sample(&mut rng)])
            .collect();
        let small = km_from_deltas(&[0.0], &all[..10_000], tau).unwrap();
        let large = km_from_deltas(&[0.0], &all, tau).unwrap();
        let ratio = small.drift_se[0] / large.drift_se[0];
        // 4× the data halves the error.
        assert_relative_eq!(ratio, 2.0, max_relative = 0.1);
    }

    #[test]
    fn off_diagonal_moments_are_symmetric() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        let normal = Normal::new(0.0, 0.1).unwrap();
        let deltas: Vec<Vec<f64>> = (0..500)
            .map(|_| {
                let z = normal.sample(&mut rng);
                let w = normal.sample(&mut rng);
                vec![z, 0.5 * z + w]
            })
            .collect();
        let est = km_from_deltas(&[0.0, 0.0], &deltas, 0.01).unwrap();
        assert_eq!(est.diffusion[(0, 1)], est.diffusion[(1, 0)]);
        assert!(est.diffusion[(0, 1)] > 0.0);
        est.into_sample().unwrap();
    }

    #[test]
    fn rejects_degenerate_input() {
        assert!(km_from_deltas(&[0.0], &[vec![0.1]], 0.01).is_err());
        assert!(km_from_deltas(&[0.0], &[vec![0.1], vec![0.2]], 0.0).is_err());
        assert!(km_from_deltas(&[0.0], &[vec![0.1], vec![0.1, 0.2]], 0.01).is_err());
    }
}
