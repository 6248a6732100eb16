use nalgebra::{DMatrix, DVector};
use serde::ser::SerializeStruct;
use serde::{Deserialize, Serialize};

use crate::dynamics::{iterate_map, Trajectory};
use crate::system::{Partial, ToleranceConfig, UndefinedReason};

use super::problem::QpProblem;
use super::project::{infeasibility_certificate, project};
use super::OptError;

/// Constraints within this distance of their boundary count as active.
pub const ACTIVITY_TOL: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StepRule {
    Fixed(f64),
    /// `factor / λmax(Q)`.
    InverseLipschitz(f64),
}

impl StepRule {
    pub fn resolve(&self, problem: &QpProblem) -> Result<f64, OptError> {
        let step = match *self {
            StepRule::Fixed(a) => a,
            StepRule::InverseLipschitz(f) => f / problem.lambda_max().max(1e-12),
        };
        if step.is_finite() && step > 0.0 {
            Ok(step)
        } else {
            Err(OptError::InvalidProblem(format!("step must be positive, got {step}")))
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SolverConfig {
    pub step: StepRule,
    /// Stop once the projected-gradient mapping has ∞-norm at most this.
    pub tol: f64,
    pub max_iter: usize,
    /// Iterates with ∞-norm beyond this count as diverged.
    pub divergence_bound: f64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            step: StepRule::InverseLipschitz(1.0),
            tol: 1e-9,
            max_iter: 10_000,
            divergence_bound: 1e6,
        }
    }
}

/// Non-negative multipliers: one per halfspace, one per lower and upper bound.
#[derive(Debug, Clone, PartialEq)]
pub struct Multipliers {
    pub halfspace: DVector<f64>,
    pub lower: DVector<f64>,
    pub upper: DVector<f64>,
}

impl Multipliers {
    pub fn zeros(n: usize, m: usize) -> Self {
        Self {
            halfspace: DVector::zeros(m),
            lower: DVector::zeros(n),
            upper: DVector::zeros(n),
        }
    }

    /// `Σλᵢaᵢ + μ_up − μ_lo`, the constraint part of the Lagrangian gradient.
    pub fn constraint_force(&self, problem: &QpProblem) -> DVector<f64> {
        let mut force = &self.upper - &self.lower;
        for (h, &l) in problem.halfspaces.iter().zip(self.halfspace.iter()) {
            force += &h.a * l;
        }
        force
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct QpSolution {
    pub x: DVector<f64>,
    pub multipliers: Multipliers,
    pub iterations: usize,
    pub converged: bool,
}

impl Serialize for QpSolution {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let mut s = serializer.serialize_struct("QpSolution", 6)?;
        s.serialize_field("x", self.x.as_slice())?;
        s.serialize_field("halfspace_multipliers", self.multipliers.halfspace.as_slice())?;
        s.serialize_field("lower_multipliers", self.multipliers.lower.as_slice())?;
        s.serialize_field("upper_multipliers", self.multipliers.upper.as_slice())?;
        s.serialize_field("iterations", &self.iterations)?;
        s.serialize_field("converged", &self.converged)?;
        s.end()
    }
}

#[derive(Debug, Clone, Copy)]
enum Active {
    Half(usize),
    Lower(usize),
    Upper(usize),
}

/// Least-squares fit of `Qx + c + Σλa + μ_up − μ_lo = 0` over the active
/// constraints, dropping the most negative multiplier until none is left.
pub fn recover_multipliers(problem: &QpProblem, x: &DVector<f64>) -> Multipliers {
    let n = problem.dim();
    let mut active = Vec::new();
    for (i, h) in problem.halfspaces.iter().enumerate() {
        if (h.a.dot(x) - h.b).abs() <= ACTIVITY_TOL {
            active.push(Active::Half(i));
        }
    }
    if let Some(bounds) = &problem.bounds {
        for (k, &(lo, hi)) in bounds.iter().enumerate() {
            if (x[k] - lo).abs() <= ACTIVITY_TOL {
                active.push(Active::Lower(k));
            }
            if (hi - x[k]).abs() <= ACTIVITY_TOL {
                active.push(Active::Upper(k));
            }
        }
    }
    let target = -problem.gradient(x);
    let mut out = Multipliers::zeros(n, problem.halfspaces.len());
    loop {
        if active.is_empty() {
            return out;
        }
        let columns: Vec<DVector<f64>> = active
            .iter()
            .map(|a| match *a {
                Active::Half(i) => problem.halfspaces[i].a.clone(),
                Active::Lower(k) => -DVector::from_fn(n, |r, _| if r == k { 1.0 } else { 0.0 }),
                Active::Upper(k) => DVector::from_fn(n, |r, _| if r == k { 1.0 } else { 0.0 }),
            })
            .collect();
        let a = DMatrix::from_columns(&columns);
        let lambda = a
            .svd(true, true)
            .solve(&target, 1e-14)
            .unwrap_or_else(|_| DVector::zeros(active.len()));
        let (worst, &most_negative) = lambda
            .iter()
            .enumerate()
            .min_by(|a, b| a.1.total_cmp(b.1))
            .expect("non-empty");
        if most_negative < -1e-12 {
            active.remove(worst);
            continue;
        }
        for (slot, &l) in active.iter().zip(lambda.iter()) {
            let l = l.max(0.0);
            match *slot {
                Active::Half(i) => out.halfspace[i] = l,
                Active::Lower(k) => out.lower[k] = l,
                Active::Upper(k) => out.upper[k] = l,
            }
        }
        return out;
    }
}

fn feasible_start(problem: &QpProblem) -> Result<DVector<f64>, String> {
    let start = project(problem, &DVector::zeros(problem.dim()));
    if start.feasible {
        return Ok(start.x);
    }
    match infeasibility_certificate(problem) {
        Some(cert) => Err(format!("infeasible: {cert}")),
        // No proof of emptiness; carry on from the best point found.
        None => Ok(start.x),
    }
}

/// Projected gradient descent `x ← Proj(x − α(Qx + c))` from the projection of 0.
///
/// Undefined when the feasible set is provably empty or the iterates leave
/// the divergence bound.
pub fn solve_projected_gradient(
    problem: &QpProblem,
    cfg: &SolverConfig,
) -> Result<Partial<QpSolution>, OptError> {
    problem.validate()?;
    let alpha = cfg.step.resolve(problem)?;
    let mut x = match feasible_start(problem) {
        Ok(x) => x,
        Err(why) => return Ok(Partial::undefined(why)),
    };
    let mut converged = false;
    let mut iterations = 0;
    for k in 1..=cfg.max_iter {
        let next = project(problem, &(&x - problem.gradient(&x) * alpha)).x;
        let size = next.amax();
        if !size.is_finite() || next.iter().any(|v| !v.is_finite()) || size > cfg.divergence_bound {
            return Ok(Partial::Undefined(UndefinedReason::Diverged {
                step: k,
                detail: format!("|x|_inf = {size:e} exceeds {:e} with step {alpha:e}", cfg.divergence_bound),
            }));
        }
        let mapping = (&x - &next).amax() / alpha;
        x = next;
        iterations = k;
        if mapping <= cfg.tol {
            converged = true;
            break;
        }
    }
    let multipliers = recover_multipliers(problem, &x);
    Ok(Partial::Defined(QpSolution {
        x,
        multipliers,
        iterations,
        converged,
    }))
}

/// The solver's iterates as a trajectory, under the ∞-norm distance.
pub fn solver_trajectory(
    problem: &QpProblem,
    cfg: &SolverConfig,
    tol: &ToleranceConfig,
) -> Result<Trajectory<DVector<f64>>, OptError> {
    problem.validate()?;
    let alpha = cfg.step.resolve(problem)?;
    let start = feasible_start(problem).map_err(OptError::Infeasible)?;
    Ok(iterate_map(
        start,
        tol,
        |a: &DVector<f64>, b: &DVector<f64>| (a - b).amax(),
        |x| Partial::Defined(project(problem, &(x - problem.gradient(x) * alpha)).x),
    ))
}
