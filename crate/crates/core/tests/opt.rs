use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use reasonlab::diagnostics::{check_coherence, check_soundness, classify_failures, FailureConfig, FailureKind};
use reasonlab::dynamics::Outcome;
use reasonlab::opt::{
    kkt_residual, project, reconstruct_problem, solve_projected_gradient, solver_trajectory,
    OptSystem, ProblemSource, QpProblem, QpSolution, SolverConfig, StepRule,
};
use reasonlab::{Partial, ToleranceConfig, UndefinedReason};

fn random_spd(rng: &mut ChaCha8Rng, n: usize) -> DMatrix<f64> {
    let a = DMatrix::from_fn(n, n, |_, _| rng.sample::<f64, _>(StandardNormal));
    let q = a.transpose() * &a / n as f64 + DMatrix::identity(n, n) * 0.2;
    // exact symmetry
    (&q + q.transpose()) * 0.5
}

fn random_vec(rng: &mut ChaCha8Rng, n: usize, scale: f64) -> DVector<f64> {
    DVector::from_fn(n, |_, _| rng.random_range(-scale..=scale))
}

/// Strictly convex, with a box and halfspaces that keep the origin strictly feasible.
fn random_constrained(rng: &mut ChaCha8Rng) -> QpProblem {
    let n = rng.random_range(1..=6);
    let mut p = QpProblem::unconstrained(random_spd(rng, n), random_vec(rng, n, 4.0)).unwrap();
    if rng.random_bool(0.7) {
        let bounds = (0..n)
            .map(|_| {
                let lo = if rng.random_bool(0.2) { f64::NEG_INFINITY } else { -rng.random_range(0.2..1.5) };
                let hi = if rng.random_bool(0.2) { f64::INFINITY } else { rng.random_range(0.2..1.5) };
                (lo, hi)
            })
            .collect();
        p = p.with_box(bounds).unwrap();
    }
    for _ in 0..rng.random_range(0..3) {
        let a = random_vec(rng, n, 1.0);
        p = p.with_halfspace(a, rng.random_range(0.1..1.0)).unwrap();
    }
    p
}

fn solve(p: &QpProblem) -> QpSolution {
    solve_projected_gradient(p, &SolverConfig::default())
        .unwrap()
        .defined()
        .expect("feasible convex problem")
}

#[test]
fn unconstrained_matches_linear_solve() {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    for _ in 0..20 {
        let n = rng.random_range(1..=8);
        let q = random_spd(&mut rng, n);
        let c = random_vec(&mut rng, n, 5.0);
        let oracle = -q.clone().cholesky().unwrap().solve(&c);
        let sol = solve(&QpProblem::unconstrained(q, c).unwrap());
        assert!(sol.converged);
        let rel = (&sol.x - &oracle).norm() / oracle.norm().max(1e-12);
        assert!(rel <= 1e-6, "relative error {rel}");
    }
}

#[test]
fn reconstruction_resolves_to_same_point() {
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    for _ in 0..20 {
        let p = random_constrained(&mut rng);
        let sol = solve(&p);
        assert!(sol.converged);
        let back = reconstruct_problem(&sol, &p).unwrap();
        assert!(kkt_residual(&back, &sol).unwrap().stationarity <= 1e-10);
        let again = solve(&back);
        assert!((&again.x - &sol.x).norm() <= 1e-4);
    }
}

#[test]
fn converged_solutions_are_feasible_kkt_points() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..40 {
        let p = random_constrained(&mut rng);
        let sol = solve(&p);
        assert!(sol.converged);
        let r = kkt_residual(&p, &sol).unwrap();
        assert!(r.primal_infeasibility <= 1e-8, "{r:?}");
        assert!(r.max() <= 1e-6, "{r:?}");
        assert!(sol.multipliers.halfspace.iter().chain(sol.multipliers.lower.iter()).chain(sol.multipliers.upper.iter()).all(|&m| m >= 0.0));
    }
}

#[test]
fn objective_never_increases_for_safe_steps() {
    let mut rng = ChaCha8Rng::seed_from_u64(31);
    let tol = ToleranceConfig {
        max_iterations: 5_000,
        ..ToleranceConfig::default()
    };
    for _ in 0..20 {
        let p = random_constrained(&mut rng);
        let t = solver_trajectory(&p, &SolverConfig::default(), &tol).unwrap();
        assert!(matches!(t.outcome, Outcome::Converged { .. }), "{:?}", t.outcome);
        for w in t.iterates.windows(2) {
            assert!(p.objective(&w[1]) <= p.objective(&w[0]) + 1e-12);
        }
    }
}

#[test]
fn oversized_step_on_identity_is_non_convergence() {
    let q = DMatrix::identity(2, 2);
    let p = QpProblem::unconstrained(q, DVector::from_vec(vec![1.0, -1.0])).unwrap();
    let cfg = SolverConfig {
        step: StepRule::InverseLipschitz(2.2),
        ..SolverConfig::default()
    };
    match solve_projected_gradient(&p, &cfg).unwrap() {
        Partial::Undefined(UndefinedReason::Diverged { step, .. }) => assert!(step <= 200, "{step}"),
        other => panic!("{other:?}"),
    }
    let system = OptSystem::new(p.clone(), ProblemSource::Fixed(vec![p]), cfg).unwrap();
    let labels = classify_failures(&system, 1, 1, &FailureConfig::default()).unwrap();
    assert!(labels[0].has(FailureKind::NonConvergence));
}

#[test]
fn opt_system_is_coherent_and_sound() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let template = random_constrained(&mut rng);
    let system = OptSystem::new(template, ProblemSource::RandomLinear { scale: 3.0 }, SolverConfig::default()).unwrap();
    assert!(check_coherence(&system, 4, 30, &ToleranceConfig::default()).unwrap().pass);
    assert!(check_soundness(&system, 4, 30).unwrap().pass);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn projection_is_idempotent(seed in any::<u64>(), scale in 0.1f64..20.0) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let p = random_constrained(&mut rng);
        let y = random_vec(&mut rng, p.dim(), scale);
        let once = project(&p, &y);
        prop_assert!(once.feasible);
        let twice = project(&p, &once.x);
        prop_assert!((&twice.x - &once.x).amax() <= 1e-10);
    }
}
