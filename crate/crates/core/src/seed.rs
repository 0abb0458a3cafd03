//! Deterministic seed derivation.
//!
//! Every stochastic component of the crate draws its randomness from a
//! [`rand_chacha::ChaCha8Rng`] seeded through this module. Sub-seeds are
//! derived with a counter-based mix (splitmix64), so ensembles can be
//! evaluated in parallel in any order while staying bit-reproducible, and
//! two ensemble members can never share a stream.

/// One round of splitmix64.
#[inline]
fn splitmix64(state: u64) -> u64 {
    let mut z = state.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Derives a sub-seed from a master seed, a stream label and an index.
///
/// Distinct `(stream, index)` pairs map to distinct seeds with
/// overwhelming probability; equal inputs always map to equal outputs.
#[must_use]
pub fn derive(master: u64, stream: u64, index: u64) -> u64 {
    splitmix64(splitmix64(master ^ splitmix64(stream)) ^ index)
}

/// Stream labels for the components that consume randomness, so that
/// independently seeded phases never collide.
pub mod stream {
    /// Ensemble fan-out (one index per run).
    pub const ENSEMBLE: u64 = 1;
    /// Kramers–Moyal probe ensembles.
    pub const KRAMERS_MOYAL: u64 = 2;
    /// Low-discrepancy shift for box sampling.
    pub const BOX_SAMPLING: u64 = 3;
    /// Training-state selection.
    pub const TRAINING_STATES: u64 = 4;
    /// Validation test points.
    pub const VALIDATION: u64 = 5;
    /// Reduced-model (surrogate) SDE ensembles.
    pub const REDUCED_SDE: u64 = 6;
}
