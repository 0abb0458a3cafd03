//! # pareko
//!
//! Data-driven Koopman-generator surrogate models for stochastic
//! agent-based models (ABMs), together with a set-oriented solver for
//! multi-objective optimal control of the learned surrogates.
//!
//! The toolkit is organized along the pipeline it implements:
//!
//! 1. [`dictionary`] — finite dictionaries of monomial observables and the
//!    pointwise action of an SDE generator on them.
//! 2. [`gedmd`] — generator extended dynamic mode decomposition: estimate a
//!    matrix representation of the Koopman generator from pointwise
//!    drift/diffusion data, and read identified drift and diffusion
//!    coefficients back out of it.
//! 3. [`control`] — control-affine generator families (learn once per
//!    control channel, interpolate everywhere) and state augmentation for
//!    nonlinearly entering controls.
//! 4. [`abm`] — ground-truth simulators (a two-opinion voter model via the
//!    Gillespie algorithm, one- and two-group stochastic SIR models via
//!    Euler–Maruyama) and Kramers–Moyal estimation of pointwise drift and
//!    diffusion from ensembles.
//! 5. [`moo`] — a global box-subdivision sampling algorithm that covers the
//!    Pareto set of a vector objective with an adaptive box collection.
//! 6. [`surrogate`] — trajectory-dependent objective evaluation through the
//!    learned models (matrix-exponential propagation of observables,
//!    reduced SDE simulation, quadrature of running costs).
//! 7. [`experiments`] — reproducible end-to-end pipelines with Monte Carlo
//!    validation against the ground-truth simulators, plus file exports.
//!
//! All numeric kernels are generic over a scalar type implementing
//! [`num::Real`] (`f32` or `f64`); the aliases below fix the common
//! double-precision instantiations.

pub mod abm;
pub mod control;
pub mod dictionary;
pub mod error;
pub mod experiments;
pub mod gedmd;
pub mod linalg;
pub mod moo;
pub mod num;
pub mod seed;
pub mod surrogate;

pub use error::{Error, Result};
pub use num::Real;

/// Double-precision generator estimate.
pub type Generator64 = gedmd::GeneratorMatrix<f64>;
/// Double-precision identified SDE model.
pub type SdeModel64 = gedmd::SdeModel<f64>;
/// Double-precision control-affine generator family.
pub type AffineFamily64 = control::AffineGeneratorFamily<f64>;
/// Double-precision augmented (state ⊕ control) model.
pub type AugmentedModel64 = control::AugmentedModel<f64>;
/// Double-precision decision-space box.
pub type DecisionBox64 = moo::DecisionBox<f64>;
/// Double-precision subdivision tree.
pub type BoxTree64 = moo::BoxTree<f64>;
/// Double-precision Pareto archive.
pub type ParetoArchive64 = moo::ParetoArchive<f64>;
/// Double-precision time series.
pub type TimeSeries64 = abm::TimeSeries<f64>;
/// Double-precision reduced-model trajectory.
pub type ReducedTrajectory64 = surrogate::ReducedTrajectory<f64>;
