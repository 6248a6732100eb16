//! Scenario files: which system to build, what to check and which dynamics to run.

use std::path::{Path, PathBuf};

use reasonlab::diagnostics::FailureConfig;
use reasonlab::dynamics::AdaptTarget;
use reasonlab::logic::RandomPremises;
use reasonlab::neural::NeuralConfig;
use reasonlab::opt::SolverConfig;
use reasonlab::{ToleranceConfig, DEFAULT_SEED};
use serde::{Deserialize, Serialize};

use crate::CliError;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub schema: u32,
    #[serde(default)]
    pub name: String,
    #[serde(default)]
    pub description: String,
    pub system: SystemSpec,
    #[serde(default = "default_seed")]
    pub seed: u64,
    pub n_samples: usize,
    #[serde(default)]
    pub tolerances: ToleranceConfig,
    #[serde(default)]
    pub thresholds: Thresholds,
    pub checks: Vec<Check>,
    #[serde(default)]
    pub dynamics: Option<Dynamics>,
}

fn default_seed() -> u64 {
    DEFAULT_SEED
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum SystemSpec {
    Identity {
        #[serde(default)]
        half_width: Option<f64>,
    },
    Offset {
        offset: f64,
        #[serde(default)]
        half_width: Option<f64>,
    },
    Logic(LogicSpec),
    Opt(OptSpec),
    Neural(NeuralSpec),
}

impl SystemSpec {
    pub fn kind(&self) -> &'static str {
        match self {
            SystemSpec::Identity { .. } => "identity",
            SystemSpec::Offset { .. } => "offset",
            SystemSpec::Logic(_) => "logic",
            SystemSpec::Opt(_) => "opt",
            SystemSpec::Neural(_) => "neural",
        }
    }
}

/// Exactly one of `premises`, `premise_files` and `random` must be given.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LogicSpec {
    #[serde(default)]
    pub premises: Option<Vec<Vec<String>>>,
    /// Premise files, one formula per line.
    #[serde(default)]
    pub premise_files: Option<Vec<PathBuf>>,
    #[serde(default)]
    pub random: Option<RandomPremises>,
    pub depth_bound: usize,
    #[serde(default)]
    pub targets: Vec<String>,
}

/// Exactly one of `problem` and `problem_file` must be given.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OptSpec {
    #[serde(default)]
    pub problem: Option<InlineProblem>,
    #[serde(default)]
    pub problem_file: Option<PathBuf>,
    #[serde(default)]
    pub phenomena: OptPhenomena,
    #[serde(default)]
    pub solver: SolverConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InlineProblem {
    pub q: Vec<Vec<f64>>,
    pub c: Vec<f64>,
    /// `[lo, hi]` per coordinate; `null` stands for an infinite end.
    #[serde(default, rename = "box")]
    pub bounds: Option<Vec<[Option<f64>; 2]>>,
    #[serde(default)]
    pub halfspaces: Vec<InlineHalfspace>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InlineHalfspace {
    pub a: Vec<f64>,
    pub b: f64,
}

/// How phenomena vary the linear term of the template problem.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum OptPhenomena {
    RandomLinear { scale: f64 },
    /// A fixed list of linear terms.
    Fixed { c: Vec<Vec<f64>> },
}

impl Default for OptPhenomena {
    fn default() -> Self {
        OptPhenomena::RandomLinear { scale: 1.0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NeuralSpec {
    #[serde(default)]
    pub config: NeuralConfig,
    /// Weight snapshot replacing the initial weights.
    #[serde(default)]
    pub weights_file: Option<PathBuf>,
}

/// Failure classifier thresholds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Thresholds {
    pub deadlock_constancy_fraction: f64,
    pub deadlock_probe_radius: f64,
    pub deadlock_probes: usize,
    pub overfit_gap_threshold: f64,
    pub underfit_floor: f64,
}

impl Default for Thresholds {
    fn default() -> Self {
        let d = FailureConfig::default();
        Self {
            deadlock_constancy_fraction: d.deadlock_constancy_fraction,
            deadlock_probe_radius: d.deadlock_probe_radius,
            deadlock_probes: d.deadlock_probes,
            overfit_gap_threshold: d.overfit_gap_threshold,
            underfit_floor: d.underfit_floor,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Check {
    Coherence,
    Soundness,
    Completeness,
    #[serde(rename = "fixedpoint")]
    FixedPoint,
    Failures,
    Joint,
}

impl Check {
    pub fn name(self) -> &'static str {
        match self {
            Check::Coherence => "coherence",
            Check::Soundness => "soundness",
            Check::Completeness => "completeness",
            Check::FixedPoint => "fixedpoint",
            Check::Failures => "failures",
            Check::Joint => "joint",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Dynamics {
    #[serde(default)]
    pub adapt: Option<AdaptSpec>,
    /// Adaptation epochs; each draws a fresh calibration set.
    #[serde(default = "one")]
    pub epochs: usize,
    #[serde(default)]
    pub iterate: Option<IterateSpec>,
    #[serde(default)]
    pub drift: Option<DriftSpec>,
}

fn one() -> usize {
    1
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AdaptSpec {
    pub rounds: usize,
    /// Calibration size for global scope; size of the comparison sample for local scope.
    pub calibration: usize,
    /// Adapt on only the first `local_samples` drawn phenomena.
    #[serde(default)]
    pub local_samples: Option<usize>,
    #[serde(default)]
    pub regularization_weight: f64,
    #[serde(default = "reduce_delta")]
    pub target: AdaptTarget,
}

fn reduce_delta() -> AdaptTarget {
    AdaptTarget::ReduceDelta
}

/// Start of the refinement chain: `start` itself (analytic systems only) or
/// `f` of the drawn phenomenon at `from_sample`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IterateSpec {
    #[serde(default)]
    pub start: Option<f64>,
    #[serde(default)]
    pub from_sample: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DriftResponse {
    Relax,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DriftSpec {
    pub contradiction_rate_threshold: f64,
    #[serde(default)]
    pub performance_floor: Option<f64>,
    #[serde(default = "relax")]
    pub action: DriftResponse,
    #[serde(default = "one")]
    pub rounds: usize,
}

fn relax() -> DriftResponse {
    DriftResponse::Relax
}

impl Scenario {
    pub fn from_json(text: &str) -> Result<Self, CliError> {
        let scenario: Scenario =
            serde_json::from_str(text).map_err(|e| CliError::Config(format!("scenario: {e}")))?;
        Ok(scenario)
    }

    /// Load and validate a scenario file. Relative paths inside it resolve
    /// against the file's directory.
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        let mut scenario = Self::from_json(&text)?;
        scenario.resolve_paths(path.parent().unwrap_or(Path::new(".")));
        scenario.validate()?;
        Ok(scenario)
    }

    pub fn resolve_paths(&mut self, base: &Path) {
        let fix = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        match &mut self.system {
            SystemSpec::Logic(l) => l.premise_files.iter_mut().flatten().for_each(fix),
            SystemSpec::Opt(o) => o.problem_file.iter_mut().for_each(fix),
            SystemSpec::Neural(n) => n.weights_file.iter_mut().for_each(fix),
            _ => {}
        }
    }

    pub fn failure_config(&self) -> FailureConfig {
        let t = self.thresholds;
        FailureConfig {
            tolerances: self.tolerances,
            deadlock_constancy_fraction: t.deadlock_constancy_fraction,
            deadlock_probe_radius: t.deadlock_probe_radius,
            deadlock_probes: t.deadlock_probes,
            overfit_gap_threshold: t.overfit_gap_threshold,
            underfit_floor: t.underfit_floor,
        }
    }

    pub fn validate(&self) -> Result<(), CliError> {
        let bad = |m: String| Err(CliError::Config(m));
        if self.schema != SCHEMA_VERSION {
            return bad(format!("unsupported schema {} (expected {SCHEMA_VERSION})", self.schema));
        }
        if self.n_samples == 0 {
            return bad("n_samples must be positive".into());
        }
        if self.checks.is_empty() {
            return bad("checks must not be empty".into());
        }
        for (i, c) in self.checks.iter().enumerate() {
            if self.checks[..i].contains(c) {
                return bad(format!("check `{}` listed twice", c.name()));
            }
        }
        self.failure_config()
            .validate()
            .map_err(|e| CliError::Config(e.to_string()))?;

        match &self.system {
            SystemSpec::Logic(l) => {
                let sources = [l.premises.is_some(), l.premise_files.is_some(), l.random.is_some()];
                if sources.iter().filter(|s| **s).count() != 1 {
                    return bad("logic: give exactly one of premises, premise_files, random".into());
                }
                for p in l.premise_files.iter().flatten() {
                    require_file(p)?;
                }
            }
            SystemSpec::Opt(o) => {
                if o.problem.is_some() == o.problem_file.is_some() {
                    return bad("opt: give exactly one of problem, problem_file".into());
                }
                if let Some(p) = &o.problem_file {
                    require_file(p)?;
                }
            }
            SystemSpec::Neural(n) => {
                if let Some(p) = &n.weights_file {
                    require_file(p)?;
                }
            }
            _ => {}
        }

        if let Some(d) = &self.dynamics {
            if d.epochs == 0 {
                return bad("dynamics.epochs must be positive".into());
            }
            if let Some(a) = &d.adapt {
                if a.rounds == 0 || a.calibration == 0 {
                    return bad("adapt.rounds and adapt.calibration must be positive".into());
                }
                if a.local_samples == Some(0) {
                    return bad("adapt.local_samples must be positive".into());
                }
            }
            if let Some(it) = &d.iterate {
                if it.start.is_none() && it.from_sample >= self.n_samples {
                    return bad("iterate.from_sample must be below n_samples".into());
                }
            }
            if let Some(dr) = &d.drift {
                if dr.rounds == 0 {
                    return bad("drift.rounds must be positive".into());
                }
            }
        }
        Ok(())
    }
}

fn require_file(path: &Path) -> Result<(), CliError> {
    if path.is_file() {
        Ok(())
    } else {
        Err(CliError::Config(format!("referenced file {} does not exist", path.display())))
    }
}
