use serde::{Deserialize, Serialize};

use crate::space::ExplanationSpace;
use crate::system::{Explanation, Partial, ReasoningSystem, ToleranceConfig};

/// How a refinement chain ended.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Outcome {
    /// Consecutive iterates came within `convergence_tol` at this step.
    Converged { steps: usize },
    /// The newest iterate revisited `iterates[entry_index]`.
    Cycle { period: usize, entry_index: usize },
    /// A step or the distance from the start exceeded `divergence_bound`.
    Diverged { step: usize },
    /// Iteration budget spent, or a map became undefined mid-chain.
    Exhausted,
}

impl Outcome {
    pub fn is_non_convergent(&self) -> bool {
        matches!(self, Outcome::Diverged { .. } | Outcome::Cycle { .. })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory<E> {
    pub iterates: Vec<E>,
    /// `deltas[i] = distance(iterates[i], iterates[i + 1])`.
    pub deltas: Vec<f64>,
    pub outcome: Outcome,
    /// Set when an undefined map ended the chain early.
    pub halt_reason: Option<String>,
}

impl<E> Trajectory<E> {
    pub fn last(&self) -> &E {
        self.iterates.last().expect("trajectory holds its start")
    }

    pub fn steps(&self) -> usize {
        self.deltas.len()
    }
}

/// Iterate `step` from `start` until convergence, a revisit, divergence or
/// the iteration budget.
///
/// A revisit is the earliest past iterate within `convergence_tol` of the
/// newest one. Candidates are narrowed with the triangle inequality on their
/// distance from `start`, so `distance` must be a metric.
pub fn iterate_map<E, D, F>(start: E, tol: &ToleranceConfig, distance: D, mut step: F) -> Trajectory<E>
where
    E: Clone,
    D: Fn(&E, &E) -> f64,
    F: FnMut(&E) -> Partial<E>,
{
    let mut iterates = vec![start];
    let mut deltas = Vec::new();
    // (distance from start, index), sorted
    let mut excursions: Vec<(f64, usize)> = vec![(0.0, 0)];
    for n in 1..=tol.max_iterations {
        let prev = &iterates[n - 1];
        let next = match step(prev) {
            Partial::Defined(next) => next,
            Partial::Undefined(reason) => {
                return Trajectory {
                    iterates,
                    deltas,
                    outcome: Outcome::Exhausted,
                    halt_reason: Some(reason.to_string()),
                };
            }
        };
        let delta = distance(prev, &next);
        let excursion = distance(&iterates[0], &next);
        deltas.push(delta);
        iterates.push(next);
        let next = &iterates[n];

        if !delta.is_finite()
            || !excursion.is_finite()
            || delta > tol.divergence_bound
            || excursion > tol.divergence_bound
        {
            return finish(iterates, deltas, Outcome::Diverged { step: n });
        }
        if delta <= tol.convergence_tol {
            return finish(iterates, deltas, Outcome::Converged { steps: n });
        }
        // |d(x0, xj) - d(x0, xn)| <= d(xj, xn); the slack absorbs rounding.
        let reach = tol.convergence_tol + 1e-9 * (1.0 + excursion);
        let lo = excursions.partition_point(|&(e, _)| e < excursion - reach);
        let hi = excursions.partition_point(|&(e, _)| e <= excursion + reach);
        // `iterates[n - 1]` was just compared through `delta`.
        let revisit = excursions[lo..hi]
            .iter()
            .map(|&(_, j)| j)
            .filter(|&j| j < n - 1 && distance(&iterates[j], next) <= tol.convergence_tol)
            .min();
        let at = excursions.partition_point(|&(e, _)| e < excursion);
        excursions.insert(at, (excursion, n));
        if let Some(entry) = revisit {
            return finish(
                iterates,
                deltas,
                Outcome::Cycle {
                    period: n - entry,
                    entry_index: entry,
                },
            );
        }
    }
    finish(iterates, deltas, Outcome::Exhausted)
}

fn finish<E>(iterates: Vec<E>, deltas: Vec<f64>, outcome: Outcome) -> Trajectory<E> {
    Trajectory {
        iterates,
        deltas,
        outcome,
        halt_reason: None,
    }
}

/// The refinement chain `e_{n} = f(g(e_{n-1}))` started at `start`.
pub fn iterate_refinement<S: ReasoningSystem + ?Sized>(
    system: &S,
    start: Explanation<S>,
    tol: &ToleranceConfig,
) -> Trajectory<Explanation<S>> {
    let space = system.explanations();
    iterate_map(
        start,
        tol,
        |a, b| space.distance(a, b),
        |e| system.generation(e).and_then(|p| system.inference(&p)),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analytic::RealLineSystem;

    #[test]
    fn identity_converges_in_one_step() {
        let s = RealLineSystem::identity();
        let t = iterate_refinement(&s, 4.2, &ToleranceConfig::default());
        assert_eq!(t.outcome, Outcome::Converged { steps: 1 });
        assert_eq!(t.iterates, vec![4.2, 4.2]);
        assert_eq!(t.deltas, vec![0.0]);
    }

    #[test]
    fn negation_cycles_with_period_two() {
        let s = RealLineSystem::negation();
        let t = iterate_refinement(&s, 1.0, &ToleranceConfig::default());
        assert_eq!(
            t.outcome,
            Outcome::Cycle {
                period: 2,
                entry_index: 0
            }
        );
        assert_eq!(t.iterates, vec![1.0, -1.0, 1.0]);
    }

    #[test]
    fn doubling_diverges_at_step_twenty() {
        // 2^n - 1 first exceeds 1e6 at n = 20.
        let s = RealLineSystem::doubling();
        let tol = ToleranceConfig {
            divergence_bound: 1e6,
            ..ToleranceConfig::default()
        };
        let t = iterate_refinement(&s, 1.0, &tol);
        assert_eq!(t.outcome, Outcome::Diverged { step: 20 });
        assert_eq!(t.deltas.len(), t.iterates.len() - 1);
    }

    #[test]
    fn budget_exhaustion() {
        let s = RealLineSystem::scaling(0.5);
        let tol = ToleranceConfig {
            max_iterations: 5,
            ..ToleranceConfig::default()
        };
        let t = iterate_refinement(&s, 1.0, &tol);
        assert_eq!(t.outcome, Outcome::Exhausted);
        assert_eq!(t.steps(), 5);
        assert!(t.halt_reason.is_none());
    }

    #[test]
    fn undefined_generation_halts_with_reason() {
        let s = RealLineSystem::new("gap", Partial::Defined, |e| {
            if e > 3.0 {
                Partial::undefined("too large")
            } else {
                Partial::Defined(e + 1.0)
            }
        });
        let t = iterate_refinement(&s, 0.0, &ToleranceConfig::default());
        assert_eq!(t.outcome, Outcome::Exhausted);
        assert_eq!(t.iterates, vec![0.0, 1.0, 2.0, 3.0, 4.0]);
        assert!(t.halt_reason.unwrap().contains("too large"));
    }

    #[test]
    fn converged_chain_is_a_fixed_point() {
        let s = RealLineSystem::scaling(0.5);
        let tol = ToleranceConfig {
            convergence_tol: 1e-9,
            ..ToleranceConfig::default()
        };
        let t = iterate_refinement(&s, 3.0, &tol);
        assert!(matches!(t.outcome, Outcome::Converged { .. }));
        let last = *t.last();
        let again = s.generation(&last).and_then(|p| s.inference(&p)).defined().unwrap();
        assert!((last - again).abs() <= 2.0 * tol.convergence_tol);
    }
}
