//! Fixtures shared by the benchmarks under `benches/`.

use nalgebra::{DMatrix, DVector};
use reasonlab::logic::{LogicSystem, PremiseSet, PremiseSource, RandomPremises};
use reasonlab::neural::{NeuralConfig, NeuralSystem};
use reasonlab::opt::{OptSystem, ProblemSource, QpProblem, SolverConfig};

/// Mixed consistent and inconsistent premise sets over four atoms.
pub fn logic_system(depth_bound: usize) -> LogicSystem {
    let shape = RandomPremises {
        atoms: 4,
        consistent_only: false,
        ..RandomPremises::default()
    };
    LogicSystem::new(PremiseSource::Random(shape), depth_bound).expect("valid depth bound")
}

/// A chain `A0, A0 -> A1, ..., A(n-1) -> An`.
pub fn implication_chain(n: usize) -> PremiseSet {
    let mut formulas = vec!["A0".to_string()];
    formulas.extend((0..n).map(|i| format!("A{i} -> A{}", i + 1)));
    PremiseSet::parse(formulas.iter().map(String::as_str)).expect("chain parses")
}

/// Tridiagonal, strictly convex, with a box and one halfspace.
pub fn constrained_qp(n: usize) -> QpProblem {
    let q = DMatrix::from_fn(n, n, |i, j| match i.abs_diff(j) {
        0 => 2.5,
        1 => -1.0,
        _ => 0.0,
    });
    let c = DVector::from_fn(n, |i, _| if i % 2 == 0 { -1.0 } else { 2.0 });
    QpProblem::unconstrained(q, c)
        .and_then(|p| p.with_box(vec![(-1.0, 0.75); n]))
        .and_then(|p| p.with_halfspace(DVector::from_element(n, 1.0), 0.5))
        .expect("valid problem")
}

/// The solver runs tighter than its default; at `tol = 1e-9` the stopping
/// bias sits just above the default `convergence_tol` and about half the
/// samples walk to the refinement iteration cap.
pub fn opt_system(n: usize) -> OptSystem {
    let solver = SolverConfig { tol: 1e-12, ..SolverConfig::default() };
    OptSystem::new(constrained_qp(n), ProblemSource::RandomLinear { scale: 2.0 }, solver)
        .expect("convex template")
}

pub fn neural_system() -> NeuralSystem {
    NeuralSystem::new(&NeuralConfig::default()).expect("default config is valid")
}
