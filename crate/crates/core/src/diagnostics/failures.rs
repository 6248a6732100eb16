use serde::{Deserialize, Serialize};

use crate::dynamics::{iterate_refinement, Outcome};
use crate::principle::satisfies;
use crate::space::{draw, ExplanationSpace, PhenomenonSpace};
use crate::system::{
    infer, mean_delta, Partial, Phenomenon, ReasoningSystem, ToleranceConfig, UndefinedReason,
};

use super::criteria::{check_coherence, check_completeness, check_soundness, CriterionReport};
use super::{per_sample, DiagnosticsError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum FailureKind {
    Contradiction,
    Incompleteness,
    NonConvergence,
    Overfitting,
    Underfitting,
    Deadlock,
    Healthy,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FailureLabel {
    pub kind: FailureKind,
    pub evidence: String,
    /// Numeric witness (violation count, divergence step, constancy fraction, gap, ...).
    pub witness: Option<f64>,
}

impl FailureLabel {
    fn new(kind: FailureKind, evidence: impl Into<String>, witness: Option<f64>) -> Self {
        Self {
            kind,
            evidence: evidence.into(),
            witness,
        }
    }

    pub fn healthy() -> Self {
        Self::new(FailureKind::Healthy, "", None)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleLabels<P> {
    pub index: usize,
    pub phenomenon: P,
    pub labels: Vec<FailureLabel>,
}

impl<P> SampleLabels<P> {
    pub fn has(&self, kind: FailureKind) -> bool {
        self.labels.iter().any(|l| l.kind == kind)
    }

    pub fn map_phenomenon<Q>(self, f: impl FnOnce(&P) -> Q) -> SampleLabels<Q> {
        SampleLabels {
            index: self.index,
            phenomenon: f(&self.phenomenon),
            labels: self.labels,
        }
    }

    pub fn is_healthy(&self) -> bool {
        self.has(FailureKind::Healthy)
    }
}

/// Thresholds for the failure classifier.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct FailureConfig {
    pub tolerances: ToleranceConfig,
    /// Fraction of probes with an unchanged explanation that marks a deadlock; in (0, 1].
    pub deadlock_constancy_fraction: f64,
    pub deadlock_probe_radius: f64,
    pub deadlock_probes: usize,
    pub overfit_gap_threshold: f64,
    pub underfit_floor: f64,
}

impl Default for FailureConfig {
    fn default() -> Self {
        Self {
            tolerances: ToleranceConfig::default(),
            deadlock_constancy_fraction: 0.9,
            deadlock_probe_radius: 0.5,
            deadlock_probes: 16,
            overfit_gap_threshold: 0.5,
            underfit_floor: 0.5,
        }
    }
}

impl FailureConfig {
    pub fn validate(&self) -> Result<(), DiagnosticsError> {
        self.tolerances.validate()?;
        let f = self.deadlock_constancy_fraction;
        if !(f > 0.0 && f <= 1.0) {
            return Err(DiagnosticsError::Config(format!(
                "deadlock_constancy_fraction must lie in (0, 1], got {f}"
            )));
        }
        let positive = [
            ("deadlock_probe_radius", self.deadlock_probe_radius),
            ("overfit_gap_threshold", self.overfit_gap_threshold),
            ("underfit_floor", self.underfit_floor),
        ];
        for (name, v) in positive {
            if !(v > 0.0) {
                return Err(DiagnosticsError::Config(format!("{name} must be > 0, got {v}")));
            }
        }
        if self.deadlock_probes == 0 {
            return Err(DiagnosticsError::Config("deadlock_probes must be positive".into()));
        }
        Ok(())
    }
}

/// System-wide fit labels; attached to every sample.
fn fit_labels<S: ReasoningSystem + ?Sized>(
    system: &S,
    cfg: &FailureConfig,
) -> Result<Vec<FailureLabel>, DiagnosticsError> {
    if !system.has_adapter() {
        return Ok(Vec::new());
    }
    let Some(split) = system.fit_split() else {
        return Ok(Vec::new());
    };
    let calibration = mean_delta(system, &split.calibration)?;
    let holdout = mean_delta(system, &split.holdout)?;
    let mut labels = Vec::new();
    if let (Some(cal), Some(hold)) = (calibration, holdout) {
        let gap = hold - cal;
        if gap > cfg.overfit_gap_threshold {
            labels.push(FailureLabel::new(
                FailureKind::Overfitting,
                format!("holdout delta {hold:.6} exceeds calibration delta {cal:.6} by {gap:.6}"),
                Some(gap),
            ));
        }
    }
    if let Some(cal) = calibration {
        if cal > cfg.underfit_floor {
            labels.push(FailureLabel::new(
                FailureKind::Underfitting,
                format!("calibration delta {cal:.6} exceeds floor {}", cfg.underfit_floor),
                Some(cal),
            ));
        }
    }
    Ok(labels)
}

fn label_sample<S: ReasoningSystem + ?Sized>(
    system: &S,
    p: &Phenomenon<S>,
    seed: u64,
    index: usize,
    cfg: &FailureConfig,
) -> Result<Vec<FailureLabel>, DiagnosticsError> {
    let mut labels = Vec::new();
    let e = match infer(system, p)? {
        Partial::Defined(e) => e,
        Partial::Undefined(why) => {
            if let UndefinedReason::Diverged { step, .. } = &why {
                labels.push(FailureLabel::new(
                    FailureKind::NonConvergence,
                    why.to_string(),
                    Some(*step as f64),
                ));
            }
            labels.push(FailureLabel::new(FailureKind::Incompleteness, why.to_string(), None));
            return Ok(labels);
        }
    };

    let report = satisfies(system.principles(), &e, Some(p))?;
    let violated: Vec<&str> = report.hard_violations().map(|v| v.id.as_str()).collect();
    if !violated.is_empty() {
        labels.push(FailureLabel::new(
            FailureKind::Contradiction,
            format!("violates {}", violated.join(", ")),
            Some(violated.len() as f64),
        ));
    }
    if let Some(gap) = system.coverage_gap(p, &e) {
        labels.push(FailureLabel::new(FailureKind::Incompleteness, gap, None));
    }

    let trajectory = iterate_refinement(system, e.clone(), &cfg.tolerances);
    match trajectory.outcome {
        Outcome::Diverged { step } => labels.push(FailureLabel::new(
            FailureKind::NonConvergence,
            format!("refinement diverged at step {step}"),
            Some(step as f64),
        )),
        Outcome::Cycle {
            period,
            entry_index,
        } => labels.push(FailureLabel::new(
            FailureKind::NonConvergence,
            format!("refinement cycles with period {period} from iterate {entry_index}"),
            Some(period as f64),
        )),
        Outcome::Converged { .. } | Outcome::Exhausted => {}
    }

    let explanations = system.explanations();
    if explanations.is_trivial(&e) {
        labels.push(FailureLabel::new(FailureKind::Deadlock, "trivial explanation", None));
    } else {
        let probe_seed = seed ^ (index as u64).wrapping_mul(0x2545_F491_4F6C_DD1D);
        let probes: Vec<_> = system
            .phenomena()
            .probes(p, cfg.deadlock_probe_radius, probe_seed, cfg.deadlock_probes)
            .into_iter()
            .filter(|q| system.phenomena().distance(p, q) > 0.0 && system.phenomena().admissible(q))
            .collect();
        if !probes.is_empty() {
            let unchanged = probes
                .iter()
                .filter(|q| match system.inference(q) {
                    Partial::Defined(eq) => {
                        explanations.distance(&e, &eq) < cfg.tolerances.convergence_tol
                    }
                    Partial::Undefined(_) => false,
                })
                .count();
            let fraction = unchanged as f64 / probes.len() as f64;
            if fraction >= cfg.deadlock_constancy_fraction {
                labels.push(FailureLabel::new(
                    FailureKind::Deadlock,
                    format!(
                        "explanation unchanged on {unchanged}/{} probes within radius {}",
                        probes.len(),
                        cfg.deadlock_probe_radius
                    ),
                    Some(fraction),
                ));
            }
        }
    }
    Ok(labels)
}

/// Label every drawn phenomenon with the failure modes it exhibits.
///
/// Labels are not exclusive; a sample with none is labelled Healthy.
pub fn classify_failures<S: ReasoningSystem + ?Sized>(
    system: &S,
    seed: u64,
    n: usize,
    cfg: &FailureConfig,
) -> Result<Vec<SampleLabels<Phenomenon<S>>>, DiagnosticsError> {
    cfg.validate()?;
    if n == 0 {
        return Err(DiagnosticsError::NoSamples);
    }
    let ps = draw(system.phenomena(), seed, n);
    let fit = fit_labels(system, cfg)?;
    let results = per_sample(system, &ps, |index, p| label_sample(system, p, seed, index, cfg));
    ps.iter()
        .zip(results)
        .enumerate()
        .map(|(index, (p, labels))| {
            let mut labels = labels?;
            labels.extend(fit.iter().cloned());
            if labels.is_empty() {
                labels.push(FailureLabel::healthy());
            }
            Ok(SampleLabels {
                index,
                phenomenon: p.clone(),
                labels,
            })
        })
        .collect()
}

/// Coherence, soundness and completeness on one sample set, together with the
/// failure labels.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scorecard<P> {
    pub coherent: bool,
    pub sound: bool,
    pub complete: bool,
    /// `T`/`F` for coherent, sound, complete, in that order.
    pub combination: String,
    pub per_sample: Vec<SampleLabels<P>>,
    pub coherence: CriterionReport<P>,
    pub soundness: CriterionReport<P>,
    pub completeness: CriterionReport<P>,
}

impl<P> Scorecard<P> {
    pub fn bits(&self) -> (bool, bool, bool) {
        (self.coherent, self.sound, self.complete)
    }

    pub fn map_phenomena<Q>(self, mut f: impl FnMut(&P) -> Q) -> Scorecard<Q> {
        Scorecard {
            coherent: self.coherent,
            sound: self.sound,
            complete: self.complete,
            combination: self.combination,
            per_sample: self.per_sample.into_iter().map(|s| s.map_phenomenon(&mut f)).collect(),
            coherence: self.coherence.map_phenomena(&mut f),
            soundness: self.soundness.map_phenomena(&mut f),
            completeness: self.completeness.map_phenomena(&mut f),
        }
    }
}

pub(crate) fn combination(coherent: bool, sound: bool, complete: bool) -> String {
    [coherent, sound, complete]
        .iter()
        .map(|b| if *b { 'T' } else { 'F' })
        .collect()
}

pub fn joint_evaluation<S: ReasoningSystem + ?Sized>(
    system: &S,
    seed: u64,
    n: usize,
    cfg: &FailureConfig,
) -> Result<Scorecard<Phenomenon<S>>, DiagnosticsError> {
    let coherence = check_coherence(system, seed, n, &cfg.tolerances)?;
    let soundness = check_soundness(system, seed, n)?;
    let completeness = check_completeness(system, seed, n)?;
    let per_sample = classify_failures(system, seed, n, cfg)?;
    Ok(Scorecard {
        coherent: coherence.pass,
        sound: soundness.pass,
        complete: completeness.pass,
        combination: combination(coherence.pass, soundness.pass, completeness.pass),
        per_sample,
        coherence,
        soundness,
        completeness,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analytic::RealLineSystem;

    fn cfg() -> FailureConfig {
        FailureConfig {
            tolerances: ToleranceConfig {
                coherence_tol: 0.5,
                ..ToleranceConfig::default()
            },
            ..FailureConfig::default()
        }
    }

    #[test]
    fn identity_is_healthy_everywhere() {
        let labels = classify_failures(&RealLineSystem::identity(), 1, 30, &cfg()).unwrap();
        assert_eq!(labels.len(), 30);
        assert!(labels.iter().all(|s| s.labels == vec![FailureLabel::healthy()]));
    }

    #[test]
    fn constant_map_is_deadlocked_everywhere() {
        let mut c = cfg();
        c.deadlock_constancy_fraction = 1.0;
        let labels = classify_failures(&RealLineSystem::constant(2.0), 1, 30, &c).unwrap();
        assert!(labels.iter().all(|s| s.has(FailureKind::Deadlock)));
        assert!(labels.iter().all(|s| !s.is_healthy()));
    }

    #[test]
    fn negation_refinement_is_non_convergent() {
        let labels = classify_failures(&RealLineSystem::negation(), 2, 10, &cfg()).unwrap();
        assert!(labels.iter().all(|s| s.has(FailureKind::NonConvergence)));
    }

    #[test]
    fn static_systems_never_get_fit_labels() {
        let labels = classify_failures(&RealLineSystem::offset(3.0), 2, 10, &cfg()).unwrap();
        assert!(labels
            .iter()
            .all(|s| !s.has(FailureKind::Overfitting) && !s.has(FailureKind::Underfitting)));
    }

    #[test]
    fn config_ranges_checked() {
        let s = RealLineSystem::identity();
        let mut c = cfg();
        c.deadlock_constancy_fraction = 0.0;
        assert!(matches!(classify_failures(&s, 0, 5, &c), Err(DiagnosticsError::Config(_))));
        let mut c = cfg();
        c.deadlock_probe_radius = 0.0;
        assert!(classify_failures(&s, 0, 5, &c).is_err());
        let mut c = cfg();
        c.overfit_gap_threshold = -1.0;
        assert!(classify_failures(&s, 0, 5, &c).is_err());
        let mut c = cfg();
        c.underfit_floor = 0.0;
        assert!(classify_failures(&s, 0, 5, &c).is_err());
    }

    #[test]
    fn joint_scores_match_paper_style_combinations() {
        let id = joint_evaluation(&RealLineSystem::identity(), 3, 25, &cfg()).unwrap();
        assert_eq!(id.bits(), (true, true, true));
        assert_eq!(id.combination, "TTT");
        let off = joint_evaluation(&RealLineSystem::offset(1.0), 3, 25, &cfg()).unwrap();
        assert_eq!(off.bits(), (false, true, true));
        assert_eq!(off.combination, "FTT");
    }

    #[test]
    fn combination_labels() {
        assert_eq!(combination(true, false, true), "TFT");
        assert_eq!(combination(false, false, false), "FFF");
    }
}
