use serde::{Deserialize, Serialize};

use crate::principle::satisfies;
use crate::space::PhenomenonSpace;
use crate::system::{infer, mean_delta, AdaptError, Partial, Phenomenon, ReasoningSystem};

use super::DynamicsError;

/// Which phenomena an adaptation round may look at.
#[derive(Debug, Clone, PartialEq)]
pub enum AdaptScope<P> {
    /// Only these phenomena.
    Local(Vec<P>),
    /// A fresh calibration sample from the phenomenon space.
    Global,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AdaptTarget {
    ReduceDelta,
    /// Stop as soon as the calibration set carries no Hard violation.
    ReduceHardViolations,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AdaptationPolicy<P> {
    pub scope: AdaptScope<P>,
    pub max_rounds: usize,
    pub target: AdaptTarget,
    pub regularization_weight: f64,
}

impl<P> AdaptationPolicy<P> {
    pub fn global(max_rounds: usize) -> Self {
        Self {
            scope: AdaptScope::Global,
            max_rounds,
            target: AdaptTarget::ReduceDelta,
            regularization_weight: 0.0,
        }
    }

    pub fn validate(&self) -> Result<(), DynamicsError> {
        if self.max_rounds == 0 {
            return Err(DynamicsError::InvalidPolicy("max_rounds must be positive".into()));
        }
        if !(self.regularization_weight >= 0.0) {
            return Err(DynamicsError::InvalidPolicy(
                "regularization_weight must be >= 0".into(),
            ));
        }
        if let AdaptScope::Local(set) = &self.scope {
            if set.is_empty() {
                return Err(DynamicsError::InvalidPolicy(
                    "local scope needs at least one phenomenon".into(),
                ));
            }
        }
        Ok(())
    }
}

/// Before/after error signal around an adaptation run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdaptSummary {
    pub rounds: usize,
    pub calibration_size: usize,
    pub mean_delta_before: Option<f64>,
    pub mean_delta_after: Option<f64>,
    pub hard_violations_before: usize,
    pub hard_violations_after: usize,
    /// Mean delta outside a local calibration set; `None` for global runs.
    pub elsewhere_delta_before: Option<f64>,
    pub elsewhere_delta_after: Option<f64>,
}

fn hard_violations<S: ReasoningSystem + ?Sized>(
    system: &S,
    ps: &[Phenomenon<S>],
) -> Result<usize, DynamicsError> {
    let mut count = 0;
    for p in ps {
        if let Partial::Defined(e) = infer(system, p)? {
            if !satisfies(system.principles(), &e, Some(p))?.overall_sound {
                count += 1;
            }
        }
    }
    Ok(count)
}

/// Drive the system's adapter with its round-trip error signal.
///
/// On a non-finite update the adapter discards that update and the run stops
/// with [`DynamicsError::NonFiniteUpdate`]; earlier rounds stay applied.
pub fn adapt<S: ReasoningSystem + ?Sized>(
    system: &mut S,
    policy: &AdaptationPolicy<Phenomenon<S>>,
    seed: u64,
    n_calibration: usize,
) -> Result<AdaptSummary, DynamicsError> {
    if !system.has_adapter() {
        return Err(DynamicsError::NoAdapter);
    }
    policy.validate()?;
    let (calibration, elsewhere) = match &policy.scope {
        AdaptScope::Global => {
            if n_calibration == 0 {
                return Err(DynamicsError::InvalidPolicy(
                    "n_calibration must be positive".into(),
                ));
            }
            (system.phenomena().sample(seed, n_calibration), None)
        }
        AdaptScope::Local(set) => (
            set.clone(),
            Some(system.phenomena().sample(seed, n_calibration.max(1))),
        ),
    };

    let mean_delta_before = mean_delta(system, &calibration)?;
    let hard_violations_before = hard_violations(system, &calibration)?;
    let elsewhere_delta_before = match &elsewhere {
        Some(ps) => mean_delta(system, ps)?,
        None => None,
    };

    let mut rounds = 0;
    for round in 0..policy.max_rounds {
        if policy.target == AdaptTarget::ReduceHardViolations
            && hard_violations(system, &calibration)? == 0
        {
            break;
        }
        match system.adapt_round(&calibration, policy.regularization_weight) {
            Ok(()) => rounds += 1,
            Err(AdaptError::NoAdapter) => return Err(DynamicsError::NoAdapter),
            Err(AdaptError::NonFiniteUpdate) => {
                return Err(DynamicsError::NonFiniteUpdate { round })
            }
            Err(AdaptError::InvalidBatch(why)) => return Err(DynamicsError::InvalidPolicy(why)),
        }
    }

    Ok(AdaptSummary {
        rounds,
        calibration_size: calibration.len(),
        mean_delta_before,
        mean_delta_after: mean_delta(system, &calibration)?,
        hard_violations_before,
        hard_violations_after: hard_violations(system, &calibration)?,
        elsewhere_delta_after: match &elsewhere {
            Some(ps) => mean_delta(system, ps)?,
            None => None,
        },
        elsewhere_delta_before,
    })
}
