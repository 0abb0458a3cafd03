//! Low-discrepancy sampling of boxes.
//!
//! Box sampling uses a Halton sequence (radical inverses in coprime prime
//! bases) with a seeded Cranley–Patterson rotation: adding a random shift
//! modulo 1 keeps the low discrepancy while decorrelating the per-box
//! point sets. The same seed always reproduces the same points.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// First `n` primes, the Halton bases.
fn primes(n: usize) -> Vec<u64> {
    let mut out = Vec::with_capacity(n);
    let mut candidate = 2u64;
    while out.len() < n {
        if out.iter().all(|&p| candidate % p != 0) {
            out.push(candidate);
        }
        candidate += 1;
    }
    out
}

/// Radical inverse of `i` in the given base: the digits of `i` mirrored
/// around the radix point.
fn radical_inverse(base: u64, mut i: u64) -> f64 {
    let mut inv = 0.0;
    let mut scale = 1.0 / base as f64;
    while i > 0 {
        inv += (i % base) as f64 * scale;
        i /= base;
        scale /= base as f64;
    }
    inv
}

/// Shifted Halton sequence over the unit cube.
#[derive(Debug, Clone)]
pub struct HaltonSampler {
    bases: Vec<u64>,
    shift: Vec<f64>,
    index: u64,
}

impl HaltonSampler {
    /// A sampler for `dim`-dimensional points whose shift derives from
    /// `seed`.
    #[must_use]
    pub fn new(dim: usize, seed: u64) -> Self {
        assert!(dim >= 1, "sampler dimension must be at least 1");
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let shift = (0..dim).map(|_| rng.gen::<f64>()).collect();
        Self {
            bases: primes(dim),
            shift,
            // Skip index 0 (the all-zeros point degenerates under shifts).
            index: 1,
        }
    }

    /// Next point in `[0, 1)^dim`.
    pub fn next_point(&mut self) -> Vec<f64> {
        let i = self.index;
        self.index += 1;
        self.bases
            .iter()
            .zip(&self.shift)
            .map(|(&b, &s)| {
                let v = radical_inverse(b, i) + s;
                v - v.floor()
            })
            .collect()
    }

    /// Next `n` points.
    pub fn take(&mut self, n: usize) -> Vec<Vec<f64>> {
        (0..n).map(|_| self.next_point()).collect()
    }
}
