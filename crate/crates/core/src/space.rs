//! Metric spaces of phenomena and explanations.

use std::fmt::Debug;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Seed used for reports unless a scenario overrides it.
pub const DEFAULT_SEED: u64 = 0xC0FFEE;

/// Spaces with at most this many elements are checked exhaustively instead of sampled.
pub const EXHAUSTIVE_LIMIT: usize = 10_000;

/// Deterministic generator for a seed and a stream tag.
///
/// Distinct tags give independent streams for the same user seed, so a sampler
/// and a probe generator never share draws.
pub fn seeded_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// The inputs a reasoning system is meant to interpret.
pub trait PhenomenonSpace: Send + Sync {
    type Item: Clone + Debug + Send + Sync;

    fn id(&self) -> &str;

    fn admissible(&self, p: &Self::Item) -> bool;

    /// `n` admissible phenomena, identical for identical seeds.
    fn sample(&self, seed: u64, n: usize) -> Vec<Self::Item>;

    fn distance(&self, a: &Self::Item, b: &Self::Item) -> f64;

    /// Every element, for finite spaces.
    fn enumerate(&self) -> Option<Vec<Self::Item>> {
        None
    }

    /// Up to `n` admissible phenomena within `radius` of `p`.
    ///
    /// The default filters a larger sample by distance; spaces with a natural
    /// perturbation should override it.
    fn probes(&self, p: &Self::Item, radius: f64, seed: u64, n: usize) -> Vec<Self::Item> {
        self.sample(seed ^ 0x9E37_79B9_7F4A_7C15, n.saturating_mul(8))
            .into_iter()
            .filter(|q| self.distance(p, q) <= radius)
            .take(n)
            .collect()
    }
}

/// Candidate explanations produced by inference.
pub trait ExplanationSpace: Send + Sync {
    type Item: Clone + Debug + Send + Sync;

    fn id(&self) -> &str;

    fn distance(&self, a: &Self::Item, b: &Self::Item) -> f64;

    /// Null or tautological explanations.
    fn is_trivial(&self, e: &Self::Item) -> bool;
}

/// Draw the phenomena a diagnostic runs over: the whole space when it is
/// finite and small, otherwise a seeded sample of size `n`.
pub fn draw<S: PhenomenonSpace + ?Sized>(space: &S, seed: u64, n: usize) -> Vec<S::Item> {
    match space.enumerate() {
        Some(all) if all.len() < EXHAUSTIVE_LIMIT => all,
        _ => space.sample(seed, n),
    }
}
