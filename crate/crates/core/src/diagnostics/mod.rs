//! Sampling-based evaluation of coherence, soundness, completeness and fixed
//! points, plus per-sample failure labelling.
//!
//! Every check draws its phenomena with [`crate::space::draw`]: finite spaces
//! below [`crate::space::EXHAUSTIVE_LIMIT`] elements are checked exhaustively,
//! everything else through a seeded sample of the requested size.

mod criteria;
mod failures;

use rayon::prelude::*;
use thiserror::Error;

use crate::error::CoreError;
use crate::system::ReasoningSystem;

pub use criteria::{
    check_coherence, check_completeness, check_fixed_point, check_soundness, Criterion,
    CriterionReport, FailingSample, FixedPointReport,
};
pub use failures::{
    classify_failures, joint_evaluation, FailureConfig, FailureKind, FailureLabel, SampleLabels,
    Scorecard,
};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DiagnosticsError {
    #[error("sample count must be at least 1")]
    NoSamples,
    #[error("invalid diagnostics configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Core(#[from] CoreError),
}

/// Map over samples, in parallel for stateless systems. Output order always
/// follows sample order.
pub(crate) fn per_sample<S, P, T, F>(system: &S, samples: &[P], f: F) -> Vec<T>
where
    S: ReasoningSystem + ?Sized,
    P: Sync,
    T: Send,
    F: Fn(usize, &P) -> T + Sync + Send,
{
    if system.stateful() {
        samples.iter().enumerate().map(|(i, p)| f(i, p)).collect()
    } else {
        samples.par_iter().enumerate().map(|(i, p)| f(i, p)).collect()
    }
}
