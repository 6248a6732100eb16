//! Reasoning systems as a quintuple of phenomena, explanations, an inference
//! map, a generation map and a principle system, with diagnostics for
//! coherence, soundness, completeness and failure modes, and the dynamics of
//! refinement, adaptation and principle drift.
//!
//! Three reference instantiations ship with the crate: propositional deduction
//! ([`logic`]), box/halfspace-constrained quadratic programming ([`opt`]) and
//! a linear autoencoder ([`neural`]).

pub mod analytic;
pub mod blocks;
pub mod diagnostics;
pub mod dynamics;
mod error;
pub mod logic;
pub mod neural;
pub mod opt;
pub mod principle;
pub mod space;
pub mod system;

pub use error::CoreError;
pub use principle::{
    satisfies, Principle, PrincipleReport, PrincipleSystem, PrincipleVerdict, Scope, Severity,
    Verdict,
};
pub use space::{draw, seeded_rng, ExplanationSpace, PhenomenonSpace, DEFAULT_SEED};
pub use system::{
    generate, infer, mean_delta, roundtrip_discrepancy, AdaptError, DiscrepancyRecord,
    Explanation, FitSplit, Partial, Phenomenon, Principles, ReasoningSystem, ToleranceConfig,
    UndefinedReason,
};
