use criterion::{criterion_group, criterion_main, BatchSize, Criterion};
use reasonlab::analytic::RealLineSystem;
use reasonlab::diagnostics::{classify_failures, joint_evaluation, FailureConfig};
use reasonlab::dynamics::{adapt, iterate_refinement, AdaptationPolicy};
use reasonlab::logic::{deduce, entails_bruteforce, parse_formula};
use reasonlab::opt::{solve_projected_gradient, SolverConfig};
use reasonlab::{PhenomenonSpace, ReasoningSystem, ToleranceConfig};
use reasonlab_bench::{constrained_qp, implication_chain, logic_system, neural_system, opt_system};

fn joint(c: &mut Criterion) {
    let cfg = FailureConfig::default();
    let mut group = c.benchmark_group("joint_evaluation");
    group.sample_size(20);
    let offset = RealLineSystem::offset(1.0);
    group.bench_function("offset_64", |b| b.iter(|| joint_evaluation(&offset, 1, 64, &cfg).unwrap()));
    let logic = logic_system(4);
    group.bench_function("logic_64", |b| b.iter(|| joint_evaluation(&logic, 1, 64, &cfg).unwrap()));
    let opt = opt_system(6);
    group.bench_function("opt_n6_32", |b| b.iter(|| joint_evaluation(&opt, 1, 32, &cfg).unwrap()));
    let neural = neural_system();
    group.bench_function("neural_32", |b| b.iter(|| classify_failures(&neural, 1, 32, &cfg).unwrap()));
    group.finish();
}

fn logic(c: &mut Criterion) {
    let chain = implication_chain(12);
    c.bench_function("deduce_chain_12", |b| b.iter(|| deduce(&chain, 12).unwrap()));
    let target = parse_formula("A12").unwrap();
    c.bench_function("entails_chain_13_atoms", |b| {
        b.iter(|| entails_bruteforce(chain.formulas(), &target).unwrap())
    });
}

fn opt(c: &mut Criterion) {
    let cfg = SolverConfig::default();
    for n in [4, 16] {
        let p = constrained_qp(n);
        c.bench_function(&format!("solve_constrained_n{n}"), |b| {
            b.iter(|| solve_projected_gradient(&p, &cfg).unwrap())
        });
    }
}

fn dynamics(c: &mut Criterion) {
    let tol = ToleranceConfig::default();
    let drifting = RealLineSystem::offset(1.0);
    c.bench_function("refinement_exhausted_1000", |b| b.iter(|| iterate_refinement(&drifting, 0.0, &tol)));
    let base = neural_system();
    let batch_seed = 3;
    c.bench_function("neural_adapt_50_rounds", |b| {
        b.iter_batched(
            || base.clone(),
            |mut s| adapt(&mut s, &AdaptationPolicy::global(50), batch_seed, 32).unwrap(),
            BatchSize::SmallInput,
        )
    });
    let samples = base.phenomena().sample(1, 4);
    c.bench_function("neural_inference", |b| b.iter(|| samples.iter().map(|p| base.inference(p)).count()));
}

criterion_group!(benches, joint, logic, opt, dynamics);
criterion_main!(benches);
