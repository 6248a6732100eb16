//! Properties that tie the criteria, the failure labels and the dynamics together.

use std::collections::BTreeSet;

use proptest::prelude::*;
use reasonlab::analytic::RealLineSystem;
use reasonlab::diagnostics::{
    check_coherence, check_completeness, check_soundness, classify_failures, joint_evaluation,
    FailureConfig, FailureKind,
};
use reasonlab::dynamics::{iterate_map, Outcome};
use reasonlab::logic::{LogicSystem, PremiseSource, RandomPremises};
use reasonlab::neural::{NeuralConfig, NeuralSystem};
use reasonlab::opt::{OptSystem, ProblemSource, QpProblem, SolverConfig, StepRule};
use reasonlab::{Partial, ReasoningSystem, ToleranceConfig};

fn labelled<S: ReasoningSystem>(system: &S, seed: u64, n: usize, kind: FailureKind) -> BTreeSet<usize> {
    classify_failures(system, seed, n, &FailureConfig::default())
        .unwrap()
        .into_iter()
        .filter(|s| s.has(kind))
        .map(|s| s.index)
        .collect()
}

fn assert_labels_within_criteria<S: ReasoningSystem>(system: &S, seed: u64, n: usize) {
    let unsound: BTreeSet<usize> = check_soundness(system, seed, n).unwrap().failing_indices().into_iter().collect();
    let incomplete: BTreeSet<usize> = check_completeness(system, seed, n).unwrap().failing_indices().into_iter().collect();
    assert!(labelled(system, seed, n, FailureKind::Contradiction).is_subset(&unsound));
    assert!(labelled(system, seed, n, FailureKind::Incompleteness).is_subset(&incomplete));
}

fn mixed_logic() -> LogicSystem {
    let shape = RandomPremises {
        atoms: 3,
        consistent_only: false,
        ..RandomPremises::default()
    };
    LogicSystem::new(PremiseSource::Random(shape), 2)
        .unwrap()
        .with_targets(vec![reasonlab::logic::parse_formula("A").unwrap()])
}

fn identity_qp() -> QpProblem {
    QpProblem::unconstrained(nalgebra::DMatrix::identity(2, 2), nalgebra::DVector::from_vec(vec![1.0, -1.0])).unwrap()
}

#[test]
fn failure_labels_stay_inside_criterion_failures() {
    let logic = mixed_logic();
    assert!(!labelled(&logic, 3, 60, FailureKind::Contradiction).is_empty());
    assert!(!labelled(&logic, 3, 60, FailureKind::Incompleteness).is_empty());
    assert_labels_within_criteria(&logic, 3, 60);

    let diverging = OptSystem::new(
        identity_qp(),
        ProblemSource::RandomLinear { scale: 2.0 },
        SolverConfig {
            step: StepRule::InverseLipschitz(2.2),
            ..SolverConfig::default()
        },
    )
    .unwrap();
    assert_labels_within_criteria(&diverging, 1, 10);
    assert_labels_within_criteria(&RealLineSystem::offset(0.3), 1, 20);
    assert_labels_within_criteria(&NeuralSystem::new(&NeuralConfig::default()).unwrap(), 1, 10);
}

#[test]
fn reports_are_deterministic() {
    let cfg = FailureConfig::default();
    let logic = mixed_logic();
    assert_eq!(joint_evaluation(&logic, 8, 40, &cfg).unwrap(), joint_evaluation(&logic, 8, 40, &cfg).unwrap());
    let opt = OptSystem::new(identity_qp(), ProblemSource::RandomLinear { scale: 2.0 }, SolverConfig::default()).unwrap();
    assert_eq!(joint_evaluation(&opt, 8, 20, &cfg).unwrap(), joint_evaluation(&opt, 8, 20, &cfg).unwrap());
    let neural = NeuralSystem::new(&NeuralConfig::default()).unwrap();
    assert_eq!(
        classify_failures(&neural, 8, 20, &cfg).unwrap(),
        classify_failures(&neural, 8, 20, &cfg).unwrap()
    );
}

#[test]
fn maps_on_small_finite_sets_converge_or_cycle() {
    // Any self-map of an N-element set revisits a point within N steps.
    let mut rng = <rand_chacha::ChaCha8Rng as rand::SeedableRng>::seed_from_u64(4);
    for size in [1usize, 2, 7, 33, 64] {
        for _ in 0..20 {
            let table: Vec<usize> = (0..size).map(|_| rand::Rng::random_range(&mut rng, 0..size)).collect();
            let start = rand::Rng::random_range(&mut rng, 0..size) as f64;
            let t = iterate_map(
                start,
                &ToleranceConfig::default(),
                |a: &f64, b: &f64| (a - b).abs(),
                |x| Partial::Defined(table[*x as usize] as f64),
            );
            match t.outcome {
                Outcome::Converged { steps } => assert!(steps <= size),
                Outcome::Cycle { period, entry_index } => {
                    assert!(entry_index + period <= size);
                    assert!(period >= 2);
                    assert_eq!(t.iterates[entry_index], *t.last());
                }
                other => panic!("size {size}: {other:?}"),
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn coherence_only_improves_with_looser_tolerance(offset in -3.0f64..3.0, t1 in 0.0f64..4.0, extra in 0.0f64..4.0, seed in any::<u64>()) {
        let s = RealLineSystem::offset(offset);
        let tight = ToleranceConfig { coherence_tol: t1.max(1e-12), ..ToleranceConfig::default() };
        let loose = ToleranceConfig { coherence_tol: t1.max(1e-12) + extra, ..ToleranceConfig::default() };
        let a = check_coherence(&s, seed, 16, &tight).unwrap();
        let b = check_coherence(&s, seed, 16, &loose).unwrap();
        prop_assert!(!a.pass || b.pass);
        let fa: BTreeSet<usize> = a.failing_indices().into_iter().collect();
        let fb: BTreeSet<usize> = b.failing_indices().into_iter().collect();
        prop_assert!(fb.is_subset(&fa));
    }
}

/// First revisit by scanning the whole history.
fn naive_outcome(start: f64, tol: &ToleranceConfig, step: impl Fn(f64) -> f64) -> Outcome {
    let mut xs = vec![start];
    for n in 1..=tol.max_iterations {
        let next = step(xs[n - 1]);
        let delta = (next - xs[n - 1]).abs();
        xs.push(next);
        if delta > tol.divergence_bound || (next - xs[0]).abs() > tol.divergence_bound {
            return Outcome::Diverged { step: n };
        }
        if delta <= tol.convergence_tol {
            return Outcome::Converged { steps: n };
        }
        if let Some(j) = (0..n - 1).find(|&j| (xs[j] - next).abs() <= tol.convergence_tol) {
            return Outcome::Cycle { period: n - j, entry_index: j };
        }
    }
    Outcome::Exhausted
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn revisit_search_matches_a_full_scan(table in prop::collection::vec(-50.0f64..50.0, 1..40), jitter in 0.0f64..0.3, tol in prop::sample::select(vec![0.0, 0.05, 0.5])) {
        // Points on a coarse grid plus jitter, so near-revisits within tol happen.
        let points: Vec<f64> = table.iter().enumerate().map(|(i, x)| x.round() + jitter * (i % 3) as f64).collect();
        let m = points.len();
        let step = |x: f64| {
            let i = points.iter().position(|p| *p == x).unwrap_or(0);
            points[(i * 7 + 3) % m]
        };
        let cfg = ToleranceConfig { convergence_tol: tol, max_iterations: 200, ..ToleranceConfig::default() };
        let fast = iterate_map(points[0], &cfg, |a: &f64, b: &f64| (a - b).abs(), |x| Partial::Defined(step(*x)));
        prop_assert_eq!(fast.outcome, naive_outcome(points[0], &cfg, step));
    }

    #[test]
    fn revisit_search_matches_in_the_plane(raw in prop::collection::vec((-5i32..5, -5i32..5), 2..30), tol in prop::sample::select(vec![0.0, 1.0, 1.5])) {
        let m = raw.len();
        let pts: Vec<(f64, f64)> = raw.iter().map(|&(a, b)| (a as f64, b as f64)).collect();
        let d = |a: &(f64, f64), b: &(f64, f64)| ((a.0 - b.0).powi(2) + (a.1 - b.1).powi(2)).sqrt();
        let cfg = ToleranceConfig { convergence_tol: tol, max_iterations: 100, ..ToleranceConfig::default() };
        let next_index = |i: usize| (i * 5 + 1) % m;
        // Iterate on indices, viewed through their points.
        let fast = iterate_map(0usize, &cfg, |a: &usize, b: &usize| d(&pts[*a], &pts[*b]), |i| Partial::Defined(next_index(*i)));
        let mut xs = vec![0usize];
        let mut expected = Outcome::Exhausted;
        for n in 1..=cfg.max_iterations {
            let nx = next_index(xs[n - 1]);
            let delta = d(&pts[xs[n - 1]], &pts[nx]);
            xs.push(nx);
            if delta <= tol {
                expected = Outcome::Converged { steps: n };
                break;
            }
            if let Some(j) = (0..n - 1).find(|&j| d(&pts[xs[j]], &pts[nx]) <= tol) {
                expected = Outcome::Cycle { period: n - j, entry_index: j };
                break;
            }
        }
        prop_assert_eq!(fast.outcome, expected);
    }
}
