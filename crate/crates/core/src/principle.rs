//! Principles and the satisfaction relation between explanations and a principle system.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::CoreError;

/// Outcome of checking one principle.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Verdict {
    Satisfied,
    Violated,
    Inapplicable,
}

/// What a principle gets to look at.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Scope {
    /// Only the explanation.
    Explanation,
    /// The phenomenon together with its explanation.
    Pair,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Severity {
    Soft,
    Hard,
}

type CheckFn<P, E> = dyn Fn(&E, Option<&P>) -> Verdict + Send + Sync;
type MeasureFn<P, E> = dyn Fn(&E, Option<&P>) -> f64 + Send + Sync;

/// A single checkable constraint on explanations.
///
/// A violated Soft principle contributes `soft_penalty` to the penalty total,
/// multiplied by its measure when one is attached.
pub struct Principle<P, E> {
    id: String,
    scope: Scope,
    severity: Severity,
    soft_penalty: f64,
    check: Arc<CheckFn<P, E>>,
    measure: Option<Arc<MeasureFn<P, E>>>,
}

impl<P, E> Clone for Principle<P, E> {
    fn clone(&self) -> Self {
        Self {
            id: self.id.clone(),
            scope: self.scope,
            severity: self.severity,
            soft_penalty: self.soft_penalty,
            check: Arc::clone(&self.check),
            measure: self.measure.clone(),
        }
    }
}

impl<P, E> fmt::Debug for Principle<P, E> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Principle")
            .field("id", &self.id)
            .field("scope", &self.scope)
            .field("severity", &self.severity)
            .field("soft_penalty", &self.soft_penalty)
            .field("measured", &self.measure.is_some())
            .finish()
    }
}

/// Principles compare by their descriptors; check closures are opaque.
impl<P, E> PartialEq for Principle<P, E> {
    fn eq(&self, other: &Self) -> bool {
        self.id == other.id
            && self.scope == other.scope
            && self.severity == other.severity
            && self.soft_penalty.to_bits() == other.soft_penalty.to_bits()
            && self.measure.is_some() == other.measure.is_some()
    }
}

impl<P, E> Principle<P, E> {
    pub fn hard<F>(id: impl Into<String>, scope: Scope, check: F) -> Self
    where
        F: Fn(&E, Option<&P>) -> Verdict + Send + Sync + 'static,
    {
        Self {
            id: id.into(),
            scope,
            severity: Severity::Hard,
            soft_penalty: 0.0,
            check: Arc::new(check),
            measure: None,
        }
    }

    pub fn soft<F>(id: impl Into<String>, scope: Scope, penalty: f64, check: F) -> Self
    where
        F: Fn(&E, Option<&P>) -> Verdict + Send + Sync + 'static,
    {
        Self {
            id: id.into(),
            scope,
            severity: Severity::Soft,
            soft_penalty: penalty.max(0.0),
            check: Arc::new(check),
            measure: None,
        }
    }

    /// Scale the penalty by a magnitude computed from the checked pair.
    pub fn with_measure<F>(mut self, measure: F) -> Self
    where
        F: Fn(&E, Option<&P>) -> f64 + Send + Sync + 'static,
    {
        self.measure = Some(Arc::new(measure));
        self
    }

    /// Penalty carried once the principle is demoted to Soft.
    pub fn with_soft_penalty(mut self, penalty: f64) -> Self {
        self.soft_penalty = penalty.max(0.0);
        self
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn scope(&self) -> Scope {
        self.scope
    }

    pub fn severity(&self) -> Severity {
        self.severity
    }

    pub fn soft_penalty(&self) -> f64 {
        self.soft_penalty
    }

    pub fn check(&self, e: &E, p: Option<&P>) -> Verdict {
        (self.check)(e, p)
    }

    fn penalty(&self, e: &E, p: Option<&P>) -> f64 {
        let scale = self.measure.as_ref().map_or(1.0, |m| m(e, p).max(0.0));
        self.soft_penalty * scale
    }

    pub(crate) fn demoted(&self) -> Self {
        let mut out = self.clone();
        out.severity = Severity::Soft;
        out
    }
}

/// An ordered principle collection together with its drift generation.
pub struct PrincipleSystem<P, E> {
    principles: Vec<Principle<P, E>>,
    version: u64,
}

impl<P, E> Clone for PrincipleSystem<P, E> {
    fn clone(&self) -> Self {
        Self {
            principles: self.principles.clone(),
            version: self.version,
        }
    }
}

impl<P, E> fmt::Debug for PrincipleSystem<P, E> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("PrincipleSystem")
            .field("version", &self.version)
            .field("principles", &self.principles)
            .finish()
    }
}

impl<P, E> PartialEq for PrincipleSystem<P, E> {
    fn eq(&self, other: &Self) -> bool {
        self.version == other.version && self.principles == other.principles
    }
}

impl<P, E> Default for PrincipleSystem<P, E> {
    fn default() -> Self {
        Self::empty()
    }
}

impl<P, E> PrincipleSystem<P, E> {
    pub fn empty() -> Self {
        Self {
            principles: Vec::new(),
            version: 0,
        }
    }

    /// Build a generation-zero system. Ids must be unique.
    pub fn new(principles: Vec<Principle<P, E>>) -> Result<Self, CoreError> {
        let mut seen = std::collections::HashSet::new();
        for p in &principles {
            if !seen.insert(p.id.as_str()) {
                return Err(CoreError::DuplicatePrinciple(p.id.clone()));
            }
        }
        Ok(Self {
            principles,
            version: 0,
        })
    }

    pub fn principles(&self) -> &[Principle<P, E>] {
        &self.principles
    }

    pub fn version(&self) -> u64 {
        self.version
    }

    pub fn len(&self) -> usize {
        self.principles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.principles.is_empty()
    }

    pub fn get(&self, id: &str) -> Option<&Principle<P, E>> {
        self.principles.iter().find(|p| p.id == id)
    }

    /// Sub-system restricted to the given ids, for localized soundness checks.
    pub fn restricted_to(&self, ids: &[&str]) -> Self {
        Self {
            principles: self
                .principles
                .iter()
                .filter(|p| ids.contains(&p.id.as_str()))
                .cloned()
                .collect(),
            version: self.version,
        }
    }

    pub fn requires_context(&self) -> bool {
        self.principles.iter().any(|p| p.scope == Scope::Pair)
    }

    pub(crate) fn demote(&mut self, id: &str) -> bool {
        match self.principles.iter_mut().find(|p| p.id == id) {
            Some(p) if p.severity == Severity::Hard => {
                *p = p.demoted();
                true
            }
            _ => false,
        }
    }

    pub(crate) fn drop_principle(&mut self, id: &str) -> bool {
        let before = self.principles.len();
        self.principles.retain(|p| p.id != id);
        self.principles.len() != before
    }

    pub(crate) fn add(&mut self, principle: Principle<P, E>) -> bool {
        if self.get(&principle.id).is_some() {
            return false;
        }
        self.principles.push(principle);
        true
    }

    pub(crate) fn bump_version(&mut self) {
        self.version += 1;
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PrincipleVerdict {
    pub id: String,
    pub severity: Severity,
    pub verdict: Verdict,
}

/// Per-principle verdicts for one explanation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PrincipleReport {
    pub verdicts: Vec<PrincipleVerdict>,
    pub overall_sound: bool,
    pub soft_penalty_total: f64,
}

impl PrincipleReport {
    pub fn hard_violations(&self) -> impl Iterator<Item = &PrincipleVerdict> {
        self.verdicts
            .iter()
            .filter(|v| v.severity == Severity::Hard && v.verdict == Verdict::Violated)
    }

    pub fn violations(&self) -> impl Iterator<Item = &PrincipleVerdict> {
        self.verdicts.iter().filter(|v| v.verdict == Verdict::Violated)
    }
}

/// Check `e` (and `p` where a principle needs it) against every principle.
pub fn satisfies<P, E>(
    pi: &PrincipleSystem<P, E>,
    e: &E,
    p: Option<&P>,
) -> Result<PrincipleReport, CoreError> {
    let mut verdicts = Vec::with_capacity(pi.len());
    let mut overall_sound = true;
    let mut soft_penalty_total = 0.0;
    for principle in &pi.principles {
        let context = match principle.scope {
            Scope::Explanation => None,
            Scope::Pair => match p {
                Some(p) => Some(p),
                None => return Err(CoreError::MissingContext(principle.id.clone())),
            },
        };
        let verdict = principle.check(e, context);
        if verdict == Verdict::Violated {
            match principle.severity {
                Severity::Hard => overall_sound = false,
                Severity::Soft => soft_penalty_total += principle.penalty(e, context),
            }
        }
        verdicts.push(PrincipleVerdict {
            id: principle.id.clone(),
            severity: principle.severity,
            verdict,
        });
    }
    Ok(PrincipleReport {
        verdicts,
        overall_sound,
        soft_penalty_total,
    })
}
