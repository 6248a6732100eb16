//! Scenario execution: adaptation, checks, refinement and drift.

use std::collections::BTreeMap;
use std::path::Path;

use reasonlab::analytic::RealLineSystem;
use reasonlab::diagnostics::{
    check_coherence, check_completeness, check_fixed_point, check_soundness, classify_failures, joint_evaluation,
    FailureConfig, FailureKind, SampleLabels,
};
use reasonlab::dynamics::{
    adapt, classify_response_mode, evolve_principles, iterate_refinement, AdaptScope, AdaptationPolicy, DriftHistory,
    DriftPolicy, DriftSignal, DynamicsError, EpochRecord, Response,
};
use reasonlab::{draw, infer, Partial, PhenomenonSpace, Principles, ReasoningSystem};
use serde_json::{json, Value};

use crate::instance::{self, json, Instance};
use crate::report::{CheckOutcome, Phase, Report};
use crate::scenario::{AdaptSpec, Check, DriftSpec, IterateSpec, Scenario, SystemSpec};
use crate::CliError;

pub const SEED_ENV: &str = "REASONLAB_SEED";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct RunOptions {
    /// Leave the timestamp out so reports are byte-identical across runs.
    pub no_timestamp: bool,
    /// Replaces the scenario seed.
    pub seed_override: Option<u64>,
}

/// Parse a seed given in decimal or as `0x`-prefixed hex.
pub fn parse_seed(text: &str) -> Result<u64, CliError> {
    let t = text.trim();
    let parsed = match t.strip_prefix("0x").or_else(|| t.strip_prefix("0X")) {
        Some(hex) => u64::from_str_radix(hex, 16),
        None => t.parse(),
    };
    parsed.map_err(|_| CliError::Config(format!("{SEED_ENV}: `{text}` is not a 64-bit seed")))
}

/// The seed override from the environment, if set.
pub fn seed_from_env() -> Result<Option<u64>, CliError> {
    match std::env::var(SEED_ENV) {
        Ok(v) => parse_seed(&v).map(Some),
        Err(std::env::VarError::NotPresent) => Ok(None),
        Err(e) => Err(CliError::Config(format!("{SEED_ENV}: {e}"))),
    }
}

pub fn run_file(path: &Path, opts: RunOptions) -> Result<Report, CliError> {
    let scenario = Scenario::load(path)?;
    run_scenario(&scenario, opts)
}

pub fn run_scenario(scenario: &Scenario, opts: RunOptions) -> Result<Report, CliError> {
    scenario.validate()?;
    let seed = opts.seed_override.unwrap_or(scenario.seed);
    let mut report = match &scenario.system {
        SystemSpec::Identity { half_width } => {
            execute(instance::real_line(RealLineSystem::identity(), *half_width)?, scenario, seed)?
        }
        SystemSpec::Offset { offset, half_width } => {
            if !offset.is_finite() {
                return Err(CliError::Instantiation(format!("offset must be finite, got {offset}")));
            }
            execute(instance::real_line(RealLineSystem::offset(*offset), *half_width)?, scenario, seed)?
        }
        SystemSpec::Logic(spec) => execute(instance::logic(spec)?, scenario, seed)?,
        SystemSpec::Opt(spec) => execute(instance::opt(spec)?, scenario, seed)?,
        SystemSpec::Neural(spec) => execute(instance::neural(spec)?, scenario, seed)?,
    };
    if !opts.no_timestamp {
        report.timestamp = std::time::SystemTime::now()
            .duration_since(std::time::UNIX_EPOCH)
            .ok()
            .map(|d| d.as_secs());
    }
    Ok(report)
}

fn failed(e: impl std::fmt::Display) -> CliError {
    CliError::Execution(e.to_string())
}

fn execute<S: Instance>(mut system: S, scenario: &Scenario, seed: u64) -> Result<Report, CliError> {
    let n = scenario.n_samples;
    let cfg = scenario.failure_config();
    let mut report = Report::new(&scenario.name, scenario.system.kind(), seed, n);
    let dynamics = scenario.dynamics.as_ref();

    if let Some(spec) = dynamics.and_then(|d| d.adapt.as_ref()) {
        let epochs = dynamics.map_or(1, |d| d.epochs);
        report.adaptation = Some(run_adaptation(&mut system, spec, epochs, seed, n, &cfg)?);
    }

    for &check in &scenario.checks {
        report.checks.push(run_check(&system, check, Phase::Initial, seed, n, &cfg)?);
    }

    if let Some(spec) = dynamics.and_then(|d| d.iterate.as_ref()) {
        report.iterate = Some(run_iterate(&system, spec, seed, n, &cfg)?);
    }

    if let Some(spec) = dynamics.and_then(|d| d.drift.as_ref()) {
        let (drift, changed) = run_drift(&mut system, spec, seed, n)?;
        report.drift = Some(drift);
        if changed {
            for &check in &scenario.checks {
                report.checks.push(run_check(&system, check, Phase::PostDrift, seed, n, &cfg)?);
            }
        }
    }

    report.label_counts = report
        .checks
        .iter()
        .find(|c| matches!(c.check, Check::Failures | Check::Joint))
        .map(|c| count_labels(c.check, &c.detail))
        .unwrap_or_default();
    report.pass = report.checks.iter().all(|c| c.pass);
    report.exit_code = if report.pass { 0 } else { 1 };
    Ok(report)
}

fn run_adaptation<S: Instance>(
    system: &mut S,
    spec: &AdaptSpec,
    epochs: usize,
    seed: u64,
    n: usize,
    cfg: &FailureConfig,
) -> Result<Value, CliError> {
    if !system.has_adapter() {
        return Err(CliError::Config("adapt: this system has no adapter".into()));
    }
    let scope = match spec.local_samples {
        Some(k) => AdaptScope::Local(system.phenomena().sample(seed, k)),
        None => AdaptScope::Global,
    };
    let policy = AdaptationPolicy {
        scope,
        max_rounds: spec.rounds,
        target: spec.target,
        regularization_weight: spec.regularization_weight,
    };
    let mut log = vec![EpochRecord::measure(&*system, seed, n, false).map_err(failed)?];
    let mut summaries = Vec::new();
    for epoch in 0..epochs {
        let calibration_seed = seed.wrapping_add(epoch as u64 + 1);
        let (entry, blew_up) = match adapt(system, &policy, calibration_seed, spec.calibration) {
            Ok(summary) => (json(&summary), false),
            Err(DynamicsError::NonFiniteUpdate { round }) => (json!({ "non_finite_update_at_round": round }), true),
            Err(e) => return Err(failed(e)),
        };
        summaries.push(entry);
        log.push(EpochRecord::measure(&*system, seed, n, blew_up).map_err(failed)?);
        if blew_up {
            break;
        }
    }
    let mode = classify_response_mode(&log, cfg.tolerances.convergence_tol).map_err(failed)?;
    Ok(json!({ "epochs": summaries, "log": log, "response_mode": mode }))
}

fn run_check<S: Instance>(
    system: &S,
    check: Check,
    phase: Phase,
    seed: u64,
    n: usize,
    cfg: &FailureConfig,
) -> Result<CheckOutcome, CliError> {
    let p_json = |p: &_| system.phenomenon_json(p);
    let outcome = |pass: bool, summary: String, detail: Value| CheckOutcome {
        check,
        phase,
        pass,
        summary,
        detail,
    };
    Ok(match check {
        Check::Coherence | Check::Soundness | Check::Completeness => {
            let r = match check {
                Check::Coherence => check_coherence(system, seed, n, &cfg.tolerances),
                Check::Soundness => check_soundness(system, seed, n),
                _ => check_completeness(system, seed, n),
            }
            .map_err(failed)?;
            let worst = r.worst_case.map_or("-".to_string(), |w| w.to_string());
            let summary = format!("{}/{} failing, worst {worst}", r.failing_samples.len(), r.n_samples);
            outcome(r.pass, summary, json(&r.map_phenomena(p_json)))
        }
        Check::FixedPoint => {
            let r = check_fixed_point(system, seed, n, &cfg.tolerances).map_err(failed)?;
            let show = |x: Option<f64>| x.map_or("-".to_string(), |w| w.to_string());
            let summary = format!(
                "{}/{} failing, residuals {} / {}",
                r.failing_samples.len(),
                r.n_samples,
                show(r.worst_phenomenon_residual),
                show(r.worst_explanation_residual)
            );
            outcome(r.pass, summary, json(&r.map_phenomena(p_json)))
        }
        Check::Failures => {
            let labels = classify_failures(system, seed, n, cfg).map_err(failed)?;
            let pass = labels.iter().all(SampleLabels::is_healthy);
            let summary = describe_labels(&labels);
            let labels: Vec<_> = labels.into_iter().map(|s| s.map_phenomenon(p_json)).collect();
            outcome(pass, summary, json(&labels))
        }
        Check::Joint => {
            let card = joint_evaluation(system, seed, n, cfg).map_err(failed)?;
            let pass = card.coherent && card.sound && card.complete;
            let summary = format!("scorecard {}; {}", card.combination, describe_labels(&card.per_sample));
            outcome(pass, summary, json(&card.map_phenomena(p_json)))
        }
    })
}

fn kind_name(kind: FailureKind) -> String {
    json(&kind).as_str().unwrap_or_default().to_string()
}

fn describe_labels<P>(labels: &[SampleLabels<P>]) -> String {
    let mut counts: BTreeMap<String, usize> = BTreeMap::new();
    for s in labels {
        let mut seen: Vec<FailureKind> = s.labels.iter().map(|l| l.kind).collect();
        seen.sort();
        seen.dedup();
        for k in seen {
            *counts.entry(kind_name(k)).or_default() += 1;
        }
    }
    let parts: Vec<String> = counts.iter().map(|(k, v)| format!("{k} {v}/{}", labels.len())).collect();
    parts.join(", ")
}

/// Per-label sample counts read back from a check's JSON detail.
fn count_labels(check: Check, detail: &Value) -> BTreeMap<String, usize> {
    let samples = match check {
        Check::Joint => detail.get("per_sample"),
        _ => Some(detail),
    };
    let mut counts = BTreeMap::new();
    for s in samples.and_then(Value::as_array).into_iter().flatten() {
        let mut kinds: Vec<&str> = s["labels"]
            .as_array()
            .into_iter()
            .flatten()
            .filter_map(|l| l["kind"].as_str())
            .collect();
        kinds.sort_unstable();
        kinds.dedup();
        for k in kinds {
            *counts.entry(k.to_string()).or_default() += 1;
        }
    }
    counts
}

fn run_iterate<S: Instance>(
    system: &S,
    spec: &IterateSpec,
    seed: u64,
    n: usize,
    cfg: &FailureConfig,
) -> Result<Value, CliError> {
    let start = match spec.start {
        Some(x) => system
            .explanation_from_number(x)
            .ok_or_else(|| CliError::Config("iterate.start is only supported by analytic systems".into()))?,
        None => {
            let samples = draw(system.phenomena(), seed, n);
            let p = samples
                .get(spec.from_sample)
                .ok_or_else(|| CliError::Config("iterate.from_sample is past the drawn samples".into()))?;
            match infer(system, p).map_err(failed)? {
                Partial::Defined(e) => e,
                Partial::Undefined(why) => {
                    return Ok(json!({
                        "from_sample": spec.from_sample,
                        "outcome": "undefined_start",
                        "halt_reason": why.to_string(),
                    }))
                }
            }
        }
    };
    let t = iterate_refinement(system, start, &cfg.tolerances);
    Ok(json!({
        "outcome": t.outcome,
        "steps": t.steps(),
        "deltas": t.deltas,
        "halt_reason": t.halt_reason,
        "final": system.explanation_json(t.last()),
    }))
}

fn principle_list<S: ReasoningSystem>(pi: &Principles<S>) -> Value {
    Value::Array(
        pi.principles()
            .iter()
            .map(|p| json!({ "id": p.id(), "severity": p.severity() }))
            .collect(),
    )
}

/// Returns the drift section and whether any trigger changed the principles.
fn run_drift<S: Instance>(system: &mut S, spec: &DriftSpec, seed: u64, n: usize) -> Result<(Value, bool), CliError> {
    let mut history = DriftHistory::new(system.principles().clone());
    let policy: DriftPolicy<_, _> = DriftPolicy {
        contradiction_rate_threshold: spec.contradiction_rate_threshold,
        performance_floor: spec.performance_floor,
        on_contradiction: Response::Relax,
        on_performance: Response::Relax,
    };
    policy.validate().map_err(|e| CliError::Config(format!("drift: {e}")))?;
    let before = principle_list::<S>(system.principles());
    let mut signals = Vec::new();
    let mut triggers = Vec::new();
    let mut halted = None;
    for _ in 0..spec.rounds {
        let signal = DriftSignal::measure(&*system, seed, n).map_err(failed)?;
        signals.push(json(&signal));
        match evolve_principles(system, &mut history, &policy, &signal) {
            Ok(Some(t)) => triggers.push(json!({
                "index": t.index,
                "cause": t.cause,
                "metric": t.metric,
                "action": t.action.kind(),
                "principle": t.action.principle_id(),
            })),
            Ok(None) => {}
            Err(DynamicsError::EmptyRelaxation) => {
                halted = Some("relaxation triggered but no principle is violated");
                break;
            }
            Err(e) => return Err(failed(e)),
        }
    }
    let replayed = history.replay().map_err(failed)?;
    let replay_matches = &replayed == history.current() && &replayed == system.principles();
    let changed = !triggers.is_empty();
    let section = json!({
        "signals": signals,
        "triggers": triggers,
        "halted": halted,
        "principles_before": before,
        "principles_after": principle_list::<S>(system.principles()),
        "replay_matches": replay_matches,
    });
    Ok((section, changed))
}
