use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::space::{seeded_rng, PhenomenonSpace};

use super::model::MAX_INPUT_DIM;
use super::NeuralError;

const SAMPLE_STREAM: u64 = 0x4e45_0001;
const PROBE_STREAM: u64 = 0x4e45_0002;
pub(crate) const HOLDOUT_STREAM: u64 = 0x4e45_0003;

/// Holdout sets never shrink below this many points.
pub const MIN_HOLDOUT: usize = 16;

/// `x = M z + σ ε` with `z ~ N(0, I_r)`, `ε ~ N(0, I_n)` and `M` an `n×r`
/// matrix with orthonormal columns drawn once from `structure_seed`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct DataDistribution {
    pub dim: usize,
    pub rank: usize,
    pub noise: f64,
    /// Holdout share of a calibration/holdout split, in (0, 1).
    pub holdout_ratio: f64,
    pub structure_seed: u64,
}

impl Default for DataDistribution {
    fn default() -> Self {
        Self {
            dim: 8,
            rank: 2,
            noise: 0.0,
            holdout_ratio: 0.5,
            structure_seed: 0,
        }
    }
}

impl DataDistribution {
    pub fn validate(&self) -> Result<(), NeuralError> {
        if !(1..=MAX_INPUT_DIM).contains(&self.dim) || !(1..=self.dim).contains(&self.rank) {
            return Err(NeuralError::InvalidModel(format!(
                "need 1 <= rank <= dim <= {MAX_INPUT_DIM}, got rank = {}, dim = {}",
                self.rank, self.dim
            )));
        }
        if !(self.noise.is_finite() && self.noise >= 0.0) {
            return Err(NeuralError::InvalidModel(format!("noise must be >= 0, got {}", self.noise)));
        }
        if !(self.holdout_ratio > 0.0 && self.holdout_ratio < 1.0) {
            return Err(NeuralError::InvalidModel(format!(
                "holdout_ratio must lie in (0, 1), got {}",
                self.holdout_ratio
            )));
        }
        Ok(())
    }

    /// Holdout size paired with a calibration set of `calibration` points.
    pub fn holdout_size(&self, calibration: usize) -> usize {
        let r = self.holdout_ratio;
        ((calibration as f64 * r / (1.0 - r)).ceil() as usize).max(MIN_HOLDOUT)
    }
}

/// Phenomena: data points under the Euclidean distance.
#[derive(Debug, Clone, PartialEq)]
pub struct DataSpace {
    dist: DataDistribution,
    mixing: DMatrix<f64>,
}

impl DataSpace {
    pub fn new(dist: DataDistribution) -> Result<Self, NeuralError> {
        dist.validate()?;
        let mut rng = ChaCha8Rng::seed_from_u64(dist.structure_seed);
        let gaussian = DMatrix::from_fn(dist.dim, dist.rank, |_, _| StandardNormal.sample(&mut rng));
        let mixing = if dist.rank == dist.dim {
            // Full rank: x ~ N(0, I) exactly.
            DMatrix::identity(dist.dim, dist.dim)
        } else {
            gaussian.qr().q()
        };
        Ok(Self { dist, mixing })
    }

    pub fn distribution(&self) -> &DataDistribution {
        &self.dist
    }

    pub fn mixing(&self) -> &DMatrix<f64> {
        &self.mixing
    }

    pub(crate) fn draw_stream(&self, seed: u64, stream: u64, n: usize) -> Vec<DVector<f64>> {
        let mut rng = seeded_rng(seed, stream);
        (0..n)
            .map(|_| {
                let z = DVector::from_fn(self.dist.rank, |_, _| StandardNormal.sample(&mut rng));
                let eps = DVector::from_fn(self.dist.dim, |_, _| StandardNormal.sample(&mut rng));
                &self.mixing * z + eps * self.dist.noise
            })
            .collect()
    }
}

impl PhenomenonSpace for DataSpace {
    type Item = DVector<f64>;

    fn id(&self) -> &str {
        "data-points"
    }

    fn admissible(&self, p: &DVector<f64>) -> bool {
        p.len() == self.dist.dim && p.iter().all(|v| v.is_finite())
    }

    fn sample(&self, seed: u64, n: usize) -> Vec<DVector<f64>> {
        self.draw_stream(seed, SAMPLE_STREAM, n)
    }

    fn distance(&self, a: &DVector<f64>, b: &DVector<f64>) -> f64 {
        if a.len() != b.len() {
            return f64::INFINITY;
        }
        (a - b).norm()
    }

    /// Gaussian directions scaled to land uniformly in the ball of `radius`.
    fn probes(&self, p: &DVector<f64>, radius: f64, seed: u64, n: usize) -> Vec<DVector<f64>> {
        use rand::Rng;
        let mut rng = seeded_rng(seed, PROBE_STREAM);
        let d = p.len();
        (0..n)
            .map(|_| {
                let dir = DVector::from_fn(d, |_, _| StandardNormal.sample(&mut rng));
                let r = radius * rng.random::<f64>().powf(1.0 / d as f64);
                p + dir.normalize() * r
            })
            .collect()
    }
}
