use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use super::problem::QpProblem;
use super::solve::QpSolution;
use super::OptError;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KktResidual {
    /// `‖Qx + c + Σλa + μ_up − μ_lo‖∞`.
    pub stationarity: f64,
    pub primal_infeasibility: f64,
    /// Largest `|multiplier · slack|`.
    pub complementary_slackness: f64,
}

impl KktResidual {
    pub fn max(&self) -> f64 {
        self.stationarity
            .max(self.primal_infeasibility)
            .max(self.complementary_slackness)
    }
}

fn check_dims(problem: &QpProblem, sol: &QpSolution) -> Result<(), OptError> {
    let n = problem.dim();
    let m = problem.halfspaces.len();
    let mismatch = |found| Err(OptError::DimensionMismatch { expected: n, found });
    if sol.x.len() != n {
        return mismatch(sol.x.len());
    }
    if sol.multipliers.lower.len() != n || sol.multipliers.upper.len() != n {
        return mismatch(sol.multipliers.lower.len());
    }
    if sol.multipliers.halfspace.len() != m {
        return Err(OptError::DimensionMismatch {
            expected: m,
            found: sol.multipliers.halfspace.len(),
        });
    }
    Ok(())
}

fn slack_product(multiplier: f64, slack: f64) -> f64 {
    // Unbounded sides carry no multiplier; avoid 0 * inf.
    if multiplier == 0.0 {
        0.0
    } else {
        (multiplier * slack).abs()
    }
}

pub fn kkt_residual(problem: &QpProblem, sol: &QpSolution) -> Result<KktResidual, OptError> {
    check_dims(problem, sol)?;
    let x = &sol.x;
    let mu = &sol.multipliers;
    let stationarity = (problem.gradient(x) + mu.constraint_force(problem)).amax();
    let mut comp: f64 = 0.0;
    for (h, &l) in problem.halfspaces.iter().zip(mu.halfspace.iter()) {
        comp = comp.max(slack_product(l, h.a.dot(x) - h.b));
    }
    let unbounded = vec![(f64::NEG_INFINITY, f64::INFINITY); problem.dim()];
    let bounds = problem.bounds.as_deref().unwrap_or(&unbounded);
    for (k, &(lo, hi)) in bounds.iter().enumerate() {
        comp = comp.max(slack_product(mu.lower[k], x[k] - lo));
        comp = comp.max(slack_product(mu.upper[k], hi - x[k]));
    }
    Ok(KktResidual {
        stationarity,
        primal_infeasibility: problem.primal_infeasibility(x),
        complementary_slackness: comp,
    })
}

/// The problem with `template`'s geometry for which `sol` is a KKT point:
/// `c' = −Qx − Σλa − μ_up + μ_lo`.
pub fn reconstruct_problem(sol: &QpSolution, template: &QpProblem) -> Result<QpProblem, OptError> {
    if !sol.converged {
        return Err(OptError::NotConverged);
    }
    check_dims(template, sol)?;
    let c: DVector<f64> = -(&template.q * &sol.x) - sol.multipliers.constraint_force(template);
    Ok(template.with_c(c))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::opt::{solve_projected_gradient, Multipliers, SolverConfig};
    use nalgebra::DMatrix;

    fn v(xs: &[f64]) -> DVector<f64> {
        DVector::from_column_slice(xs)
    }

    fn eye_problem(c: &[f64]) -> QpProblem {
        QpProblem::unconstrained(DMatrix::identity(c.len(), c.len()), v(c)).unwrap()
    }

    fn point(x: &[f64], n_half: usize) -> QpSolution {
        QpSolution {
            x: v(x),
            multipliers: Multipliers::zeros(x.len(), n_half),
            iterations: 0,
            converged: true,
        }
    }

    #[test]
    fn stationarity_at_origin() {
        let r = kkt_residual(&eye_problem(&[-2.0, 0.0]), &point(&[0.0, 0.0], 0)).unwrap();
        assert_eq!(r.stationarity, 2.0);
        assert_eq!(r.primal_infeasibility, 0.0);
        let opt = kkt_residual(&eye_problem(&[-2.0, 0.0]), &point(&[2.0, 0.0], 0)).unwrap();
        assert_eq!(opt.max(), 0.0);
    }

    #[test]
    fn clamped_solution_residuals_by_hand() {
        let p = eye_problem(&[-2.0, 0.0]).with_box(vec![(0.0, 1.0), (0.0, 1.0)]).unwrap();
        let mut sol = point(&[1.0, 0.0], 0);
        sol.multipliers.upper[0] = 1.0;
        // Qx + c = (-1, 0); adding μ_up = (1, 0) cancels it.
        let r = kkt_residual(&p, &sol).unwrap();
        assert_eq!((r.stationarity, r.primal_infeasibility, r.complementary_slackness), (0.0, 0.0, 0.0));
        let solved = solve_projected_gradient(&p, &SolverConfig::default()).unwrap().defined().unwrap();
        assert!(kkt_residual(&p, &solved).unwrap().max() <= 1e-6);
    }

    #[test]
    fn reconstruction_of_unconstrained_optimum_is_identity() {
        let p = eye_problem(&[-2.0, 0.0]);
        let back = reconstruct_problem(&point(&[2.0, 0.0], 0), &p).unwrap();
        assert_eq!(back, p);
        let mut loose = point(&[2.0, 0.0], 0);
        loose.converged = false;
        assert_eq!(reconstruct_problem(&loose, &p).unwrap_err(), OptError::NotConverged);
        assert!(kkt_residual(&p, &point(&[2.0], 0)).is_err());
    }
}
