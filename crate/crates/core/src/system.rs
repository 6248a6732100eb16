//! The reasoning-system abstraction: two metric spaces, an inference map, a
//! generation map and a principle system.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::CoreError;
use crate::principle::PrincipleSystem;
use crate::space::{ExplanationSpace, PhenomenonSpace};

/// Why a partial map produced nothing.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum UndefinedReason {
    /// The input lies outside the map's domain (infeasible problem, unsupported input, ...).
    OutsideDomain(String),
    /// An internal iteration blew up at the given step.
    Diverged { step: usize, detail: String },
}

impl fmt::Display for UndefinedReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            UndefinedReason::OutsideDomain(why) => write!(f, "undefined: {why}"),
            UndefinedReason::Diverged { step, detail } => {
                write!(f, "undefined: diverged at step {step} ({detail})")
            }
        }
    }
}

/// Result of a partial map. Partiality is a value, not an error.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Partial<T> {
    Defined(T),
    Undefined(UndefinedReason),
}

impl<T> Partial<T> {
    pub fn undefined(why: impl Into<String>) -> Self {
        Partial::Undefined(UndefinedReason::OutsideDomain(why.into()))
    }

    pub fn is_defined(&self) -> bool {
        matches!(self, Partial::Defined(_))
    }

    pub fn as_ref(&self) -> Partial<&T> {
        match self {
            Partial::Defined(v) => Partial::Defined(v),
            Partial::Undefined(r) => Partial::Undefined(r.clone()),
        }
    }

    pub fn defined(self) -> Option<T> {
        match self {
            Partial::Defined(v) => Some(v),
            Partial::Undefined(_) => None,
        }
    }

    pub fn reason(&self) -> Option<&UndefinedReason> {
        match self {
            Partial::Defined(_) => None,
            Partial::Undefined(r) => Some(r),
        }
    }

    pub fn map<U>(self, f: impl FnOnce(T) -> U) -> Partial<U> {
        match self {
            Partial::Defined(v) => Partial::Defined(f(v)),
            Partial::Undefined(r) => Partial::Undefined(r),
        }
    }

    pub fn and_then<U>(self, f: impl FnOnce(T) -> Partial<U>) -> Partial<U> {
        match self {
            Partial::Defined(v) => f(v),
            Partial::Undefined(r) => Partial::Undefined(r),
        }
    }
}

/// Thresholds shared by every check. Exact equality is tolerance 0.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ToleranceConfig {
    pub coherence_tol: f64,
    pub fixedpoint_tol: f64,
    pub convergence_tol: f64,
    pub divergence_bound: f64,
    pub max_iterations: usize,
}

impl Default for ToleranceConfig {
    fn default() -> Self {
        Self {
            coherence_tol: 1e-6,
            fixedpoint_tol: 1e-6,
            convergence_tol: 1e-9,
            divergence_bound: 1e6,
            max_iterations: 1000,
        }
    }
}

impl ToleranceConfig {
    pub fn validate(&self) -> Result<(), CoreError> {
        let nonneg = [
            ("coherence_tol", self.coherence_tol),
            ("fixedpoint_tol", self.fixedpoint_tol),
            ("convergence_tol", self.convergence_tol),
        ];
        for (name, v) in nonneg {
            if v.is_nan() || v < 0.0 {
                return Err(CoreError::InvalidTolerance(format!("{name} must be >= 0, got {v}")));
            }
        }
        if !(self.divergence_bound > 0.0) {
            return Err(CoreError::InvalidTolerance(format!(
                "divergence_bound must be > 0, got {}",
                self.divergence_bound
            )));
        }
        if self.divergence_bound <= self.convergence_tol {
            return Err(CoreError::InvalidTolerance(
                "divergence_bound must exceed convergence_tol".into(),
            ));
        }
        if self.max_iterations == 0 {
            return Err(CoreError::InvalidTolerance("max_iterations must be positive".into()));
        }
        Ok(())
    }
}

pub type Phenomenon<S> = <<S as ReasoningSystem>::Phenomena as PhenomenonSpace>::Item;
pub type Explanation<S> = <<S as ReasoningSystem>::Explanations as ExplanationSpace>::Item;
pub type Principles<S> = PrincipleSystem<Phenomenon<S>, Explanation<S>>;

/// Calibration and held-out phenomena of an adaptive system.
#[derive(Debug, Clone, PartialEq)]
pub struct FitSplit<P> {
    pub calibration: Vec<P>,
    pub holdout: Vec<P>,
}

/// Failure reported by an instantiation's adapter hook.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum AdaptError {
    #[error("system has no adapter hook")]
    NoAdapter,
    #[error("update produced non-finite values")]
    NonFiniteUpdate,
    #[error("adapter rejected the batch: {0}")]
    InvalidBatch(String),
}

/// A reasoning system. `f` is [`ReasoningSystem::inference`], `g` is
/// [`ReasoningSystem::generation`]; neither needs to be total or to invert the other.
pub trait ReasoningSystem: Send + Sync {
    type Phenomena: PhenomenonSpace;
    type Explanations: ExplanationSpace;

    fn phenomena(&self) -> &Self::Phenomena;

    fn explanations(&self) -> &Self::Explanations;

    fn inference(&self, p: &Phenomenon<Self>) -> Partial<Explanation<Self>>;

    fn generation(&self, e: &Explanation<Self>) -> Partial<Phenomenon<Self>>;

    fn principles(&self) -> &Principles<Self>;

    fn set_principles(&mut self, principles: Principles<Self>);

    /// Whether the maps read mutable state. Stateful systems are never
    /// evaluated from more than one worker.
    fn stateful(&self) -> bool {
        false
    }

    /// Entailed targets an explanation should contain but does not.
    ///
    /// Instantiations with an external oracle report coverage gaps here; they
    /// count against completeness without touching soundness.
    fn coverage_gap(&self, _p: &Phenomenon<Self>, _e: &Explanation<Self>) -> Option<String> {
        None
    }

    fn has_adapter(&self) -> bool {
        false
    }

    /// One error-driven update over `batch`. `regularization_weight` scales the
    /// penalty contributed by Soft principles.
    fn adapt_round(
        &mut self,
        _batch: &[Phenomenon<Self>],
        _regularization_weight: f64,
    ) -> Result<(), AdaptError> {
        Err(AdaptError::NoAdapter)
    }

    /// Calibration/holdout phenomena, once the system has been adapted.
    fn fit_split(&self) -> Option<FitSplit<Phenomenon<Self>>> {
        None
    }
}

/// Apply the inference map after checking admissibility.
pub fn infer<S: ReasoningSystem + ?Sized>(
    system: &S,
    p: &Phenomenon<S>,
) -> Result<Partial<Explanation<S>>, CoreError> {
    if !system.phenomena().admissible(p) {
        return Err(CoreError::InadmissibleInput(system.phenomena().id().to_string()));
    }
    Ok(system.inference(p))
}

/// Apply the generation map.
pub fn generate<S: ReasoningSystem + ?Sized>(
    system: &S,
    e: &Explanation<S>,
) -> Partial<Phenomenon<S>> {
    system.generation(e)
}

/// Round-trip error signal for one phenomenon.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscrepancyRecord<P> {
    pub phenomenon: P,
    /// `None` when either map was undefined along the way.
    pub delta: Option<f64>,
    pub roundtrip: Partial<P>,
}

pub fn roundtrip_discrepancy<S: ReasoningSystem + ?Sized>(
    system: &S,
    p: &Phenomenon<S>,
) -> Result<DiscrepancyRecord<Phenomenon<S>>, CoreError> {
    let roundtrip = infer(system, p)?.and_then(|e| system.generation(&e));
    let delta = match &roundtrip {
        Partial::Defined(q) => Some(system.phenomena().distance(p, q)),
        Partial::Undefined(_) => None,
    };
    Ok(DiscrepancyRecord {
        phenomenon: p.clone(),
        delta,
        roundtrip,
    })
}

/// Mean of the defined deltas over `ps`; `None` when none is defined.
pub fn mean_delta<S: ReasoningSystem + ?Sized>(
    system: &S,
    ps: &[Phenomenon<S>],
) -> Result<Option<f64>, CoreError> {
    let mut sum = 0.0;
    let mut count = 0usize;
    for p in ps {
        if let Some(d) = roundtrip_discrepancy(system, p)?.delta {
            sum += d;
            count += 1;
        }
    }
    Ok((count > 0).then(|| sum / count as f64))
}
