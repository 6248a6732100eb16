use serde::{Deserialize, Serialize};

use crate::space::draw;
use crate::system::{roundtrip_discrepancy, ReasoningSystem};

use super::DynamicsError;

/// Diagnostics snapshot taken once per epoch of a run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpochRecord {
    pub mean_delta: Option<f64>,
    pub undefined_rate: f64,
    pub principle_version: u64,
    /// The epoch's adaptation stopped on a non-finite update.
    pub non_finite_update: bool,
}

impl EpochRecord {
    pub fn measure<S: ReasoningSystem + ?Sized>(
        system: &S,
        seed: u64,
        n: usize,
        non_finite_update: bool,
    ) -> Result<Self, DynamicsError> {
        let samples = draw(system.phenomena(), seed, n);
        let mut sum = 0.0;
        let mut defined = 0usize;
        for p in &samples {
            if let Some(d) = roundtrip_discrepancy(system, p)?.delta {
                sum += d;
                defined += 1;
            }
        }
        let total = samples.len().max(1);
        Ok(Self {
            mean_delta: (defined > 0).then(|| sum / defined as f64),
            undefined_rate: (samples.len() - defined) as f64 / total as f64,
            principle_version: system.principles().version(),
            non_finite_update,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ResponseMode {
    /// Ignores error: nothing moves.
    Static,
    /// Collapses or halts.
    Collapsing,
    Adaptive,
}

const COLLAPSE_UNDEFINED_JUMP: f64 = 0.25;

fn same_delta(a: Option<f64>, b: Option<f64>, tol: f64) -> bool {
    match (a, b) {
        (None, None) => true,
        (Some(a), Some(b)) => (a - b).abs() <= tol,
        _ => false,
    }
}

/// Classify how a system responded to error across a run of epochs.
pub fn classify_response_mode(
    run_log: &[EpochRecord],
    convergence_tol: f64,
) -> Result<ResponseMode, DynamicsError> {
    if run_log.len() < 2 {
        return Err(DynamicsError::InsufficientLog {
            epochs: run_log.len(),
        });
    }
    let first = &run_log[0];
    let undefined_jump = run_log
        .iter()
        .map(|r| r.undefined_rate - first.undefined_rate)
        .fold(f64::NEG_INFINITY, f64::max);
    if run_log.iter().any(|r| r.non_finite_update) || undefined_jump > COLLAPSE_UNDEFINED_JUMP {
        return Ok(ResponseMode::Collapsing);
    }
    let frozen = run_log.iter().all(|r| {
        r.principle_version == first.principle_version
            && same_delta(r.mean_delta, first.mean_delta, convergence_tol)
    });
    if frozen {
        Ok(ResponseMode::Static)
    } else {
        Ok(ResponseMode::Adaptive)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analytic::RealLineSystem;

    fn epoch(delta: f64, undefined: f64, version: u64) -> EpochRecord {
        EpochRecord {
            mean_delta: Some(delta),
            undefined_rate: undefined,
            principle_version: version,
            non_finite_update: false,
        }
    }

    #[test]
    fn frozen_identity_is_static() {
        let s = RealLineSystem::identity();
        let log: Vec<_> = (0..3)
            .map(|_| EpochRecord::measure(&s, 11, 50, false).unwrap())
            .collect();
        assert_eq!(classify_response_mode(&log, 1e-9).unwrap(), ResponseMode::Static);
    }

    #[test]
    fn decreasing_delta_is_adaptive() {
        let log = vec![epoch(1.0, 0.0, 0), epoch(0.5, 0.0, 0), epoch(0.1, 0.0, 0)];
        assert_eq!(classify_response_mode(&log, 1e-9).unwrap(), ResponseMode::Adaptive);
    }

    #[test]
    fn principle_change_alone_is_adaptive() {
        let log = vec![epoch(1.0, 0.0, 0), epoch(1.0, 0.0, 1)];
        assert_eq!(classify_response_mode(&log, 1e-9).unwrap(), ResponseMode::Adaptive);
    }

    #[test]
    fn collapse_on_undefined_jump_or_overflow() {
        let log = vec![epoch(1.0, 0.0, 0), epoch(1.0, 0.3, 0)];
        assert_eq!(classify_response_mode(&log, 1e-9).unwrap(), ResponseMode::Collapsing);
        let log = vec![epoch(1.0, 0.0, 0), epoch(1.0, 0.25, 0)];
        assert_eq!(classify_response_mode(&log, 1e-9).unwrap(), ResponseMode::Static);
        let mut last = epoch(0.5, 0.0, 0);
        last.non_finite_update = true;
        let log = vec![epoch(1.0, 0.0, 0), last];
        assert_eq!(classify_response_mode(&log, 1e-9).unwrap(), ResponseMode::Collapsing);
    }

    #[test]
    fn short_logs_are_rejected() {
        assert!(matches!(
            classify_response_mode(&[epoch(1.0, 0.0, 0)], 0.0),
            Err(DynamicsError::InsufficientLog { epochs: 1 })
        ));
    }
}
