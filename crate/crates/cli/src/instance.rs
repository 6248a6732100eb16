//! Building systems from scenario specs, and their JSON views.

use nalgebra::{DMatrix, DVector};
use reasonlab::analytic::RealLineSystem;
use reasonlab::logic::{parse_formula, LogicSystem, PremiseSet, PremiseSource};
use reasonlab::neural::{LinearAutoencoder, NeuralSystem};
use reasonlab::opt::{OptSystem, ProblemSource, QpProblem};
use reasonlab::{Explanation, Phenomenon, ReasoningSystem};
use serde::Serialize;
use serde_json::Value;

use crate::scenario::{InlineProblem, LogicSpec, NeuralSpec, OptPhenomena, OptSpec};
use crate::CliError;

/// A system the runner can report on.
pub trait Instance: ReasoningSystem {
    fn phenomenon_json(&self, p: &Phenomenon<Self>) -> Value;
    fn explanation_json(&self, e: &Explanation<Self>) -> Value;

    /// An explanation given directly as a number, for `iterate.start`.
    fn explanation_from_number(&self, _x: f64) -> Option<Explanation<Self>> {
        None
    }
}

pub(crate) fn json<T: Serialize + ?Sized>(x: &T) -> Value {
    serde_json::to_value(x).unwrap_or(Value::Null)
}

impl Instance for RealLineSystem {
    fn phenomenon_json(&self, p: &f64) -> Value {
        json(p)
    }

    fn explanation_json(&self, e: &f64) -> Value {
        json(e)
    }

    fn explanation_from_number(&self, x: f64) -> Option<f64> {
        Some(x)
    }
}

impl Instance for LogicSystem {
    fn phenomenon_json(&self, p: &PremiseSet) -> Value {
        json(p)
    }

    fn explanation_json(&self, e: &Explanation<Self>) -> Value {
        json(e)
    }
}

impl Instance for OptSystem {
    fn phenomenon_json(&self, p: &QpProblem) -> Value {
        // The geometry is the template's; only c varies.
        json(p.c.as_slice())
    }

    fn explanation_json(&self, e: &Explanation<Self>) -> Value {
        json(e)
    }
}

impl Instance for NeuralSystem {
    fn phenomenon_json(&self, p: &DVector<f64>) -> Value {
        json(p.as_slice())
    }

    fn explanation_json(&self, e: &Explanation<Self>) -> Value {
        json(e)
    }
}

fn instantiation(what: &str, e: impl std::fmt::Display) -> CliError {
    CliError::Instantiation(format!("{what}: {e}"))
}

pub fn real_line(system: RealLineSystem, half_width: Option<f64>) -> Result<RealLineSystem, CliError> {
    match half_width {
        None => Ok(system),
        Some(w) if w.is_finite() && w > 0.0 => Ok(system.with_half_width(w)),
        Some(w) => Err(instantiation("half_width", format!("must be positive, got {w}"))),
    }
}

pub fn logic(spec: &LogicSpec) -> Result<LogicSystem, CliError> {
    let source = if let Some(sets) = &spec.premises {
        let sets = sets
            .iter()
            .map(|set| PremiseSet::parse(set.iter().map(String::as_str)))
            .collect::<Result<Vec<_>, _>>()
            .map_err(|e| instantiation("premises", e))?;
        PremiseSource::Fixed(sets)
    } else if let Some(files) = &spec.premise_files {
        let mut sets = Vec::with_capacity(files.len());
        for path in files {
            let text = std::fs::read_to_string(path)
                .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
            sets.push(PremiseSet::from_text(&text).map_err(|e| instantiation(&path.display().to_string(), e))?);
        }
        PremiseSource::Fixed(sets)
    } else {
        PremiseSource::Random(spec.random.clone().unwrap_or_default())
    };
    if matches!(&source, PremiseSource::Fixed(sets) if sets.is_empty()) {
        return Err(instantiation("premises", "no premise sets"));
    }
    let targets = spec
        .targets
        .iter()
        .map(|t| parse_formula(t))
        .collect::<Result<Vec<_>, _>>()
        .map_err(|e| instantiation("targets", e))?;
    Ok(LogicSystem::new(source, spec.depth_bound)
        .map_err(|e| instantiation("logic", e))?
        .with_targets(targets))
}

fn inline_problem(p: &InlineProblem) -> Result<QpProblem, CliError> {
    let n = p.c.len();
    if p.q.len() != n || p.q.iter().any(|row| row.len() != n) {
        return Err(instantiation("problem", format!("q must be {n}x{n} to match c")));
    }
    let q = DMatrix::from_row_iterator(n, n, p.q.iter().flatten().copied());
    let mut problem = QpProblem::unconstrained(q, DVector::from_vec(p.c.clone())).map_err(|e| instantiation("problem", e))?;
    if let Some(bounds) = &p.bounds {
        let bounds = bounds
            .iter()
            .map(|[lo, hi]| (lo.unwrap_or(f64::NEG_INFINITY), hi.unwrap_or(f64::INFINITY)))
            .collect();
        problem = problem.with_box(bounds).map_err(|e| instantiation("box", e))?;
    }
    for h in &p.halfspaces {
        problem = problem
            .with_halfspace(DVector::from_vec(h.a.clone()), h.b)
            .map_err(|e| instantiation("halfspace", e))?;
    }
    Ok(problem)
}

pub fn opt(spec: &OptSpec) -> Result<OptSystem, CliError> {
    let template = match (&spec.problem, &spec.problem_file) {
        (Some(p), _) => inline_problem(p)?,
        (None, Some(path)) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
            QpProblem::from_text(&text).map_err(|e| instantiation(&path.display().to_string(), e))?
        }
        (None, None) => return Err(CliError::Config("opt: no problem given".into())),
    };
    let source = match &spec.phenomena {
        OptPhenomena::RandomLinear { scale } => ProblemSource::RandomLinear { scale: *scale },
        OptPhenomena::Fixed { c } => {
            if c.is_empty() {
                return Err(instantiation("phenomena", "no linear terms"));
            }
            let mut problems = Vec::with_capacity(c.len());
            for ci in c {
                if ci.len() != template.dim() {
                    return Err(instantiation(
                        "phenomena",
                        format!("linear term of length {} for a {}-dimensional problem", ci.len(), template.dim()),
                    ));
                }
                problems.push(template.with_c(DVector::from_vec(ci.clone())));
            }
            ProblemSource::Fixed(problems)
        }
    };
    OptSystem::new(template, source, spec.solver).map_err(|e| instantiation("opt", e))
}

pub fn neural(spec: &NeuralSpec) -> Result<NeuralSystem, CliError> {
    let system = NeuralSystem::new(&spec.config).map_err(|e| instantiation("neural", e))?;
    match &spec.weights_file {
        None => Ok(system),
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
            let model = LinearAutoencoder::from_text(&text).map_err(|e| instantiation(&path.display().to_string(), e))?;
            system.with_model(model).map_err(|e| instantiation("weights", e))
        }
    }
}
