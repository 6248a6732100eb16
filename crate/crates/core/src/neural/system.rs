use nalgebra::DVector;
use serde::ser::SerializeStruct;
use serde::{Deserialize, Serialize};

use crate::principle::{Principle, PrincipleSystem, Scope, Severity, Verdict};
use crate::space::{seeded_rng, ExplanationSpace};
use crate::system::{AdaptError, FitSplit, Partial, Principles, ReasoningSystem};

use super::data::{DataDistribution, DataSpace, HOLDOUT_STREAM};
use super::model::{Init, LinearAutoencoder};
use super::NeuralError;

const INIT_STREAM: u64 = 0x4e45_0004;

/// An encoder output together with the weight norms that produced it.
#[derive(Debug, Clone, PartialEq)]
pub struct Code {
    pub z: DVector<f64>,
    pub enc_norm: f64,
    pub dec_norm: f64,
}

impl Serialize for Code {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let mut s = serializer.serialize_struct("Code", 3)?;
        s.serialize_field("z", self.z.as_slice())?;
        s.serialize_field("enc_norm", &self.enc_norm)?;
        s.serialize_field("dec_norm", &self.dec_norm)?;
        s.end()
    }
}

/// Explanations: codes under the Euclidean distance. Zero codes are trivial.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct CodeSpace;

impl ExplanationSpace for CodeSpace {
    type Item = Code;

    fn id(&self) -> &str {
        "codes"
    }

    fn distance(&self, a: &Code, b: &Code) -> f64 {
        if a.z.len() != b.z.len() {
            return f64::INFINITY;
        }
        (&a.z - &b.z).norm()
    }

    fn is_trivial(&self, e: &Code) -> bool {
        e.z.iter().all(|&v| v == 0.0)
    }
}

pub type NeuralPrinciples = PrincipleSystem<DVector<f64>, Code>;

pub const NORM_BOUND_ID: &str = "norm_bound";
pub const WEIGHT_ENERGY_ID: &str = "weight_energy";

/// Hard `norm_bound` on both weight norms and Soft `weight_energy` with
/// penalty `weight_penalty · (‖W_enc‖² + ‖W_dec‖²)`.
pub fn neural_principles(norm_bound: f64, weight_penalty: f64) -> NeuralPrinciples {
    let excess = move |e: &Code| (e.enc_norm.max(e.dec_norm) - norm_bound).max(0.0);
    let bound = Principle::hard(NORM_BOUND_ID, Scope::Explanation, move |e: &Code, _| {
        if excess(e) > norm_bound * 1e-12 {
            Verdict::Violated
        } else {
            Verdict::Satisfied
        }
    })
    .with_soft_penalty(1.0)
    .with_measure(move |e, _| excess(e));
    let energy = |e: &Code| e.enc_norm * e.enc_norm + e.dec_norm * e.dec_norm;
    let energy_principle = Principle::soft(WEIGHT_ENERGY_ID, Scope::Explanation, weight_penalty, move |e: &Code, _| {
        if energy(e) > 0.0 {
            Verdict::Violated
        } else {
            Verdict::Satisfied
        }
    })
    .with_measure(move |e, _| energy(e));
    PrincipleSystem::new(vec![bound, energy_principle]).expect("distinct ids")
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct NeuralConfig {
    pub data: DataDistribution,
    pub code_dim: usize,
    pub init: Init,
    pub step: f64,
    pub norm_bound: f64,
    /// Soft penalty of `weight_energy`.
    pub weight_penalty: f64,
    /// Seeds weight initialisation and the holdout draw.
    pub seed: u64,
}

impl Default for NeuralConfig {
    fn default() -> Self {
        Self {
            data: DataDistribution::default(),
            code_dim: 2,
            init: Init::Random { scale: 0.1 },
            step: 0.05,
            norm_bound: 10.0,
            weight_penalty: 1e-4,
            seed: 0,
        }
    }
}

/// Linear autoencoding: `f` encodes, `g` decodes, and the adapter takes
/// gradient steps on the reconstruction loss.
#[derive(Debug, Clone)]
pub struct NeuralSystem {
    model: LinearAutoencoder,
    data: DataSpace,
    codes: CodeSpace,
    principles: NeuralPrinciples,
    seed: u64,
    calibration: Vec<DVector<f64>>,
    training: bool,
}

impl NeuralSystem {
    pub fn new(cfg: &NeuralConfig) -> Result<Self, NeuralError> {
        let data = DataSpace::new(cfg.data.clone())?;
        let mut rng = seeded_rng(cfg.seed, INIT_STREAM);
        let model = LinearAutoencoder::init(cfg.data.dim, cfg.code_dim, cfg.init, cfg.step, cfg.norm_bound, &mut rng)?;
        if !(cfg.weight_penalty.is_finite() && cfg.weight_penalty >= 0.0) {
            return Err(NeuralError::InvalidModel("weight_penalty must be >= 0".into()));
        }
        Ok(Self {
            principles: neural_principles(cfg.norm_bound, cfg.weight_penalty),
            model,
            data,
            codes: CodeSpace,
            seed: cfg.seed,
            calibration: Vec::new(),
            training: false,
        })
    }

    /// Replace the weights, keeping data, principles and fit history.
    pub fn with_model(mut self, model: LinearAutoencoder) -> Result<Self, NeuralError> {
        model.validate()?;
        if model.input_dim() != self.data.distribution().dim {
            return Err(NeuralError::DimensionMismatch {
                expected: self.data.distribution().dim,
                found: model.input_dim(),
            });
        }
        self.model = model;
        Ok(self)
    }

    pub fn model(&self) -> &LinearAutoencoder {
        &self.model
    }

    /// The loss coefficient of the Soft energy principle, 0 once it is gone.
    pub fn regularization(&self) -> f64 {
        match self.principles.get(WEIGHT_ENERGY_ID) {
            Some(p) if p.severity() == Severity::Soft => p.soft_penalty(),
            _ => 0.0,
        }
    }

    /// The calibration points seen by the latest adaptation round.
    pub fn calibration(&self) -> &[DVector<f64>] {
        &self.calibration
    }
}

impl ReasoningSystem for NeuralSystem {
    type Phenomena = DataSpace;
    type Explanations = CodeSpace;

    fn phenomena(&self) -> &DataSpace {
        &self.data
    }

    fn explanations(&self) -> &CodeSpace {
        &self.codes
    }

    fn inference(&self, p: &DVector<f64>) -> Partial<Code> {
        match self.model.encode(p) {
            Ok(z) if z.iter().all(|v| v.is_finite()) => Partial::Defined(Code {
                z,
                enc_norm: self.model.w_enc.norm(),
                dec_norm: self.model.w_dec.norm(),
            }),
            Ok(_) => Partial::undefined("non-finite code"),
            Err(e) => Partial::undefined(e.to_string()),
        }
    }

    fn generation(&self, e: &Code) -> Partial<DVector<f64>> {
        match self.model.decode(&e.z) {
            Ok(x) if x.iter().all(|v| v.is_finite()) => Partial::Defined(x),
            Ok(_) => Partial::undefined("non-finite reconstruction"),
            Err(err) => Partial::undefined(err.to_string()),
        }
    }

    fn principles(&self) -> &NeuralPrinciples {
        &self.principles
    }

    fn set_principles(&mut self, principles: Principles<Self>) {
        self.principles = principles;
    }

    /// Only while an adaptation round is writing the weights.
    fn stateful(&self) -> bool {
        self.training
    }

    fn has_adapter(&self) -> bool {
        true
    }

    fn adapt_round(&mut self, batch: &[DVector<f64>], regularization_weight: f64) -> Result<(), AdaptError> {
        self.training = true;
        let reg = regularization_weight * self.regularization();
        let out = self.model.gradient_step(batch, reg);
        self.training = false;
        match out {
            Ok(()) => {
                if self.calibration.as_slice() != batch {
                    self.calibration = batch.to_vec();
                }
                Ok(())
            }
            Err(NeuralError::NonFiniteUpdate) => Err(AdaptError::NonFiniteUpdate),
            Err(e) => Err(AdaptError::InvalidBatch(e.to_string())),
        }
    }

    fn fit_split(&self) -> Option<FitSplit<DVector<f64>>> {
        if self.calibration.is_empty() {
            return None;
        }
        let n = self.data.distribution().holdout_size(self.calibration.len());
        Some(FitSplit {
            calibration: self.calibration.clone(),
            holdout: self.data.draw_stream(self.seed, HOLDOUT_STREAM, n),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::principle::satisfies;
    use crate::space::PhenomenonSpace;

    #[test]
    fn zero_encoder_gives_trivial_codes() {
        let s = NeuralSystem::new(&NeuralConfig {
            init: Init::ZeroEncoder,
            ..NeuralConfig::default()
        })
        .unwrap();
        let p = s.phenomena().sample(1, 1).remove(0);
        let e = s.inference(&p).defined().unwrap();
        assert!(s.explanations().is_trivial(&e));
        assert_eq!(s.generation(&e).defined().unwrap(), DVector::zeros(8));
    }

    #[test]
    fn principles_follow_the_weights() {
        let s = NeuralSystem::new(&NeuralConfig::default()).unwrap();
        let p = s.phenomena().sample(1, 1).remove(0);
        let e = s.inference(&p).defined().unwrap();
        let report = satisfies(s.principles(), &e, None).unwrap();
        assert!(report.overall_sound);
        let energy = s.model().weight_energy();
        assert!((report.soft_penalty_total - 1e-4 * energy).abs() < 1e-15);
        let oversized = Code {
            enc_norm: 11.0,
            ..e
        };
        assert!(!satisfies(s.principles(), &oversized, None).unwrap().overall_sound);
    }

    #[test]
    fn fit_split_appears_after_adaptation() {
        let mut s = NeuralSystem::new(&NeuralConfig::default()).unwrap();
        assert!(s.fit_split().is_none());
        let batch = s.phenomena().sample(2, 4);
        s.adapt_round(&batch, 1.0).unwrap();
        assert!(!s.stateful());
        let split = s.fit_split().unwrap();
        assert_eq!(split.calibration, batch);
        assert_eq!(split.holdout.len(), 16);
        assert!(split.holdout.iter().all(|h| !batch.contains(h)));
        assert_eq!(s.adapt_round(&[], 1.0).unwrap_err(), AdaptError::InvalidBatch("empty batch".into()));
    }
}
