//! Behaviour over time: refinement chains, error-driven adaptation, principle
//! drift and response-mode classification.

mod adapt;
mod drift;
mod response;
mod trajectory;

use thiserror::Error;

use crate::error::CoreError;

pub use adapt::{adapt, AdaptScope, AdaptSummary, AdaptTarget, AdaptationPolicy};
pub use drift::{
    apply_action, apply_manual, evolve_principles, replay, DriftAction, DriftEntry, DriftHistory,
    DriftPolicy, DriftSignal, Response, TriggerCause, TriggerRecord, ViolationCount,
};
pub use response::{classify_response_mode, EpochRecord, ResponseMode};
pub use trajectory::{iterate_map, iterate_refinement, Outcome, Trajectory};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DynamicsError {
    #[error("system exposes no adapter hook")]
    NoAdapter,
    #[error("adaptation produced non-finite values in round {round}")]
    NonFiniteUpdate { round: usize },
    #[error("relaxation triggered but no principle is violated")]
    EmptyRelaxation,
    #[error("drift action cannot be applied: {0}")]
    InapplicableAction(String),
    #[error("response classification needs at least 2 epochs, got {epochs}")]
    InsufficientLog { epochs: usize },
    #[error("invalid policy: {0}")]
    InvalidPolicy(String),
    #[error(transparent)]
    Core(#[from] CoreError),
}
