//! Crate-wide error type.

use thiserror::Error;

/// Errors produced by model construction, estimation, simulation and the
/// optimization pipeline.
#[derive(Debug, Error)]
pub enum Error {
    /// Invalid configuration or arguments (dimensions, plans, control sets).
    #[error("configuration error: {0}")]
    Config(String),

    /// A vector or matrix had an unexpected dimension.
    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },

    /// A diffusion matrix was not symmetric within tolerance.
    #[error("diffusion matrix is not symmetric (max asymmetry {asymmetry:.3e})")]
    NonSymmetricDiffusion { asymmetry: f64 },

    /// A diffusion matrix had an eigenvalue below the negativity floor.
    #[error("diffusion matrix is indefinite (min eigenvalue {min_eigenvalue:.3e})")]
    IndefiniteDiffusion { min_eigenvalue: f64 },

    /// The data matrices cannot support an estimate (e.g. all zero).
    #[error("degenerate data: {0}")]
    DegenerateData(String),

    /// The dictionary lacks a pair-product observable needed for
    /// diffusion identification.
    #[error("dictionary is missing the pair product x{i}·x{j}")]
    MissingPairProduct {
        /// first coordinate
        i: usize,
        /// second coordinate
        j: usize,
    },

    /// Observable propagation over a horizon that overflows `exp`.
    #[error("horizon too long for observable propagation (spectral abscissa · t = {0:.3e})")]
    Horizon(f64),

    /// A time step moved a state by more than the stability bound.
    #[error("integration unstable: {0}")]
    Stability(String),

    /// An objective evaluation failed at a sample point.
    #[error("objective evaluation failed: {0}")]
    Eval(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

/// Crate-wide result alias.
pub type Result<T, E = Error> = std::result::Result<T, E>;
