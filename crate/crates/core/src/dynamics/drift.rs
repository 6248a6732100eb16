use std::fmt;

use serde::{Deserialize, Serialize};

use crate::principle::{satisfies, Principle, PrincipleSystem, Severity};
use crate::space::draw;
use crate::system::{infer, Explanation, Partial, Phenomenon, ReasoningSystem};

use super::DynamicsError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum TriggerCause {
    ContradictionRate,
    PerformanceFloor,
    Manual,
}

/// A single edit to a principle system.
pub enum DriftAction<P, E> {
    /// Hard to Soft.
    Demote(String),
    Drop(String),
    /// Add a caller-supplied principle.
    Tighten(Principle<P, E>),
}

impl<P, E> Clone for DriftAction<P, E> {
    fn clone(&self) -> Self {
        match self {
            DriftAction::Demote(id) => DriftAction::Demote(id.clone()),
            DriftAction::Drop(id) => DriftAction::Drop(id.clone()),
            DriftAction::Tighten(p) => DriftAction::Tighten(p.clone()),
        }
    }
}

impl<P, E> PartialEq for DriftAction<P, E> {
    fn eq(&self, other: &Self) -> bool {
        match (self, other) {
            (DriftAction::Demote(a), DriftAction::Demote(b)) => a == b,
            (DriftAction::Drop(a), DriftAction::Drop(b)) => a == b,
            (DriftAction::Tighten(a), DriftAction::Tighten(b)) => a == b,
            _ => false,
        }
    }
}

impl<P, E> fmt::Debug for DriftAction<P, E> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DriftAction::Demote(id) => write!(f, "Demote({id})"),
            DriftAction::Drop(id) => write!(f, "Drop({id})"),
            DriftAction::Tighten(p) => write!(f, "Tighten({})", p.id()),
        }
    }
}

impl<P, E> DriftAction<P, E> {
    pub fn kind(&self) -> &'static str {
        match self {
            DriftAction::Demote(_) => "demote",
            DriftAction::Drop(_) => "drop",
            DriftAction::Tighten(_) => "tighten",
        }
    }

    pub fn principle_id(&self) -> &str {
        match self {
            DriftAction::Demote(id) | DriftAction::Drop(id) => id,
            DriftAction::Tighten(p) => p.id(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TriggerRecord<P, E> {
    pub cause: TriggerCause,
    /// The metric value that fired the trigger.
    pub metric: f64,
    /// Evaluation index at which it fired.
    pub index: u64,
    pub action: DriftAction<P, E>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DriftEntry<P, E> {
    pub snapshot: PrincipleSystem<P, E>,
    /// `None` for the initial system.
    pub trigger: Option<TriggerRecord<P, E>>,
}

/// Sequence of principle-system generations and what produced each.
#[derive(Debug, Clone, PartialEq)]
pub struct DriftHistory<P, E> {
    versions: Vec<DriftEntry<P, E>>,
    evaluations: u64,
}

impl<P, E> DriftHistory<P, E> {
    pub fn new(initial: PrincipleSystem<P, E>) -> Self {
        Self {
            versions: vec![DriftEntry {
                snapshot: initial,
                trigger: None,
            }],
            evaluations: 0,
        }
    }

    pub fn versions(&self) -> &[DriftEntry<P, E>] {
        &self.versions
    }

    pub fn len(&self) -> usize {
        self.versions.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn initial(&self) -> &PrincipleSystem<P, E> {
        &self.versions[0].snapshot
    }

    pub fn current(&self) -> &PrincipleSystem<P, E> {
        &self.versions[self.versions.len() - 1].snapshot
    }

    pub fn evaluations(&self) -> u64 {
        self.evaluations
    }

    pub fn triggers(&self) -> impl Iterator<Item = &TriggerRecord<P, E>> {
        self.versions.iter().filter_map(|v| v.trigger.as_ref())
    }

    /// Re-apply every recorded action to the initial system.
    pub fn replay(&self) -> Result<PrincipleSystem<P, E>, DynamicsError> {
        replay(self.initial(), self.triggers())
    }

    fn push(&mut self, snapshot: PrincipleSystem<P, E>, trigger: TriggerRecord<P, E>) {
        self.versions.push(DriftEntry {
            snapshot,
            trigger: Some(trigger),
        });
    }
}

/// Apply one action and advance the generation.
pub fn apply_action<P, E>(
    pi: &PrincipleSystem<P, E>,
    action: &DriftAction<P, E>,
) -> Result<PrincipleSystem<P, E>, DynamicsError> {
    let mut next = pi.clone();
    let changed = match action {
        DriftAction::Demote(id) => next.demote(id),
        DriftAction::Drop(id) => next.drop_principle(id),
        DriftAction::Tighten(p) => next.add(p.clone()),
    };
    if !changed {
        return Err(DynamicsError::InapplicableAction(format!("{action:?}")));
    }
    next.bump_version();
    Ok(next)
}

pub fn replay<'a, P: 'a, E: 'a>(
    initial: &PrincipleSystem<P, E>,
    triggers: impl IntoIterator<Item = &'a TriggerRecord<P, E>>,
) -> Result<PrincipleSystem<P, E>, DynamicsError> {
    let mut pi = initial.clone();
    for t in triggers {
        pi = apply_action(&pi, &t.action)?;
    }
    Ok(pi)
}

/// What to do when a trigger fires.
pub enum Response<P, E> {
    /// Demote the most frequently violated Hard principle, or failing that
    /// drop the most frequently violated Soft one.
    Relax,
    Tighten(Principle<P, E>),
}

impl<P, E> Clone for Response<P, E> {
    fn clone(&self) -> Self {
        match self {
            Response::Relax => Response::Relax,
            Response::Tighten(p) => Response::Tighten(p.clone()),
        }
    }
}

impl<P, E> fmt::Debug for Response<P, E> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Response::Relax => write!(f, "Relax"),
            Response::Tighten(p) => write!(f, "Tighten({})", p.id()),
        }
    }
}

#[derive(Debug, Clone)]
pub struct DriftPolicy<P, E> {
    /// Fires when the contradiction rate reaches this value; in (0, 1].
    pub contradiction_rate_threshold: f64,
    /// Fires when the fraction of complete samples drops below this value.
    pub performance_floor: Option<f64>,
    pub on_contradiction: Response<P, E>,
    pub on_performance: Response<P, E>,
}

impl<P, E> DriftPolicy<P, E> {
    pub fn relax_on_contradiction(threshold: f64) -> Self {
        Self {
            contradiction_rate_threshold: threshold,
            performance_floor: None,
            on_contradiction: Response::Relax,
            on_performance: Response::Relax,
        }
    }

    pub fn validate(&self) -> Result<(), DynamicsError> {
        let t = self.contradiction_rate_threshold;
        if !(t > 0.0 && t <= 1.0) {
            return Err(DynamicsError::InvalidPolicy(format!(
                "contradiction_rate_threshold must lie in (0, 1], got {t}"
            )));
        }
        if let Some(floor) = self.performance_floor {
            if !(floor >= 0.0) {
                return Err(DynamicsError::InvalidPolicy(format!(
                    "performance_floor must be >= 0, got {floor}"
                )));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ViolationCount {
    pub id: String,
    pub severity: Severity,
    pub count: usize,
}

/// Diagnostics summary that drift triggers read.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DriftSignal {
    pub n_samples: usize,
    /// Fraction of samples whose explanation violates a Hard principle.
    pub contradiction_rate: f64,
    /// Fraction of samples with a defined, Hard-satisfying, gap-free explanation.
    pub performance: f64,
    /// Per-principle violation counts, in principle order.
    pub violations: Vec<ViolationCount>,
}

impl DriftSignal {
    pub fn measure<S: ReasoningSystem + ?Sized>(
        system: &S,
        seed: u64,
        n: usize,
    ) -> Result<Self, DynamicsError> {
        let samples = draw(system.phenomena(), seed, n);
        let pi = system.principles();
        let mut violations: Vec<ViolationCount> = pi
            .principles()
            .iter()
            .map(|p| ViolationCount {
                id: p.id().to_string(),
                severity: p.severity(),
                count: 0,
            })
            .collect();
        let mut contradictions = 0usize;
        let mut complete = 0usize;
        for p in &samples {
            let Partial::Defined(e) = infer(system, p)? else {
                continue;
            };
            let report = satisfies(pi, &e, Some(p))?;
            for (slot, v) in violations.iter_mut().zip(&report.verdicts) {
                if v.verdict == crate::principle::Verdict::Violated {
                    slot.count += 1;
                }
            }
            if report.overall_sound {
                if system.coverage_gap(p, &e).is_none() {
                    complete += 1;
                }
            } else {
                contradictions += 1;
            }
        }
        let total = samples.len().max(1) as f64;
        Ok(Self {
            n_samples: samples.len(),
            contradiction_rate: contradictions as f64 / total,
            performance: complete as f64 / total,
            violations,
        })
    }
}

fn relaxation<P, E>(signal: &DriftSignal) -> Result<DriftAction<P, E>, DynamicsError> {
    let most_violated = |severity: Severity| {
        signal
            .violations
            .iter()
            .filter(|v| v.severity == severity && v.count > 0)
            // first in principle order among the most violated
            .fold(None::<&ViolationCount>, |best, v| match best {
                Some(b) if b.count >= v.count => Some(b),
                _ => Some(v),
            })
    };
    if let Some(v) = most_violated(Severity::Hard) {
        return Ok(DriftAction::Demote(v.id.clone()));
    }
    if let Some(v) = most_violated(Severity::Soft) {
        return Ok(DriftAction::Drop(v.id.clone()));
    }
    Err(DynamicsError::EmptyRelaxation)
}

/// Evaluate the drift triggers against `signal` and apply at most one action.
///
/// Returns the trigger that fired, if any. When nothing fires the system and
/// its generation are left alone; the evaluation still counts toward the
/// history's index.
pub fn evolve_principles<S: ReasoningSystem + ?Sized>(
    system: &mut S,
    history: &mut DriftHistory<Phenomenon<S>, Explanation<S>>,
    policy: &DriftPolicy<Phenomenon<S>, Explanation<S>>,
    signal: &DriftSignal,
) -> Result<Option<TriggerRecord<Phenomenon<S>, Explanation<S>>>, DynamicsError> {
    policy.validate()?;
    let index = history.evaluations;
    history.evaluations += 1;

    let fired = if signal.contradiction_rate >= policy.contradiction_rate_threshold {
        Some((TriggerCause::ContradictionRate, signal.contradiction_rate, &policy.on_contradiction))
    } else {
        match policy.performance_floor {
            Some(floor) if signal.performance < floor => {
                Some((TriggerCause::PerformanceFloor, signal.performance, &policy.on_performance))
            }
            _ => None,
        }
    };
    let Some((cause, metric, response)) = fired else {
        return Ok(None);
    };
    let action = match response {
        Response::Relax => relaxation(signal)?,
        Response::Tighten(p) => DriftAction::Tighten(p.clone()),
    };
    let record = TriggerRecord {
        cause,
        metric,
        index,
        action,
    };
    commit(system, history, record.clone())?;
    Ok(Some(record))
}

/// Apply an action by hand, outside any trigger.
pub fn apply_manual<S: ReasoningSystem + ?Sized>(
    system: &mut S,
    history: &mut DriftHistory<Phenomenon<S>, Explanation<S>>,
    action: DriftAction<Phenomenon<S>, Explanation<S>>,
) -> Result<TriggerRecord<Phenomenon<S>, Explanation<S>>, DynamicsError> {
    let record = TriggerRecord {
        cause: TriggerCause::Manual,
        metric: 0.0,
        index: history.evaluations,
        action,
    };
    history.evaluations += 1;
    commit(system, history, record.clone())?;
    Ok(record)
}

fn commit<S: ReasoningSystem + ?Sized>(
    system: &mut S,
    history: &mut DriftHistory<Phenomenon<S>, Explanation<S>>,
    record: TriggerRecord<Phenomenon<S>, Explanation<S>>,
) -> Result<(), DynamicsError> {
    let next = apply_action(history.current(), &record.action)?;
    system.set_principles(next.clone());
    history.push(next, record);
    Ok(())
}
