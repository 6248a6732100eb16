use nalgebra::DVector;
use rand::Rng;

use crate::principle::{Principle, PrincipleSystem, Scope, Verdict};
use crate::space::{seeded_rng, ExplanationSpace, PhenomenonSpace};
use crate::system::{Partial, Principles, ReasoningSystem};

use super::kkt::{kkt_residual, reconstruct_problem, KktResidual};
use super::problem::QpProblem;
use super::solve::{solve_projected_gradient, QpSolution, SolverConfig};
use super::OptError;

const SAMPLE_STREAM: u64 = 0x5150_0001;
const PROBE_STREAM: u64 = 0x5150_0002;

/// Threshold the KKT principles apply to their residual.
pub const KKT_THRESHOLD: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq)]
pub enum ProblemSource {
    /// A finite list, checked exhaustively.
    Fixed(Vec<QpProblem>),
    /// The template geometry with `c` uniform in `[-scale, scale]^n`.
    RandomLinear { scale: f64 },
}

/// Phenomena: QPs. Distance is `‖c − c'‖₂`, plus 1 when the geometry differs.
#[derive(Debug, Clone, PartialEq)]
pub struct ProblemSpace {
    template: QpProblem,
    source: ProblemSource,
}

impl ProblemSpace {
    pub fn template(&self) -> &QpProblem {
        &self.template
    }
}

impl PhenomenonSpace for ProblemSpace {
    type Item = QpProblem;

    fn id(&self) -> &str {
        "qp-problems"
    }

    /// Valid, of the template's dimension, and convex.
    fn admissible(&self, p: &QpProblem) -> bool {
        p.validate().is_ok() && p.dim() == self.template.dim() && p.is_convex()
    }

    fn sample(&self, seed: u64, n: usize) -> Vec<QpProblem> {
        match &self.source {
            ProblemSource::Fixed(list) if list.is_empty() => Vec::new(),
            ProblemSource::Fixed(list) => list.iter().cycle().take(n).cloned().collect(),
            ProblemSource::RandomLinear { scale } => {
                let mut rng = seeded_rng(seed, SAMPLE_STREAM);
                let dim = self.template.dim();
                (0..n)
                    .map(|_| {
                        let c = DVector::from_fn(dim, |_, _| rng.random_range(-*scale..=*scale));
                        self.template.with_c(c)
                    })
                    .collect()
            }
        }
    }

    fn distance(&self, a: &QpProblem, b: &QpProblem) -> f64 {
        if a.dim() != b.dim() {
            return f64::INFINITY;
        }
        let mismatch = if a.same_geometry(b) { 0.0 } else { 1.0 };
        (&a.c - &b.c).norm() + mismatch
    }

    fn enumerate(&self) -> Option<Vec<QpProblem>> {
        match &self.source {
            ProblemSource::Fixed(list) => Some(list.clone()),
            ProblemSource::RandomLinear { .. } => None,
        }
    }

    /// Same geometry, `c` moved by at most `radius` in the 2-norm.
    fn probes(&self, p: &QpProblem, radius: f64, seed: u64, n: usize) -> Vec<QpProblem> {
        let mut rng = seeded_rng(seed, PROBE_STREAM);
        let dim = p.dim();
        let per_coord = radius / (dim as f64).sqrt();
        (0..n)
            .map(|_| {
                let shift = DVector::from_fn(dim, |_, _| rng.random_range(-per_coord..=per_coord));
                p.with_c(&p.c + shift)
            })
            .collect()
    }
}

/// Explanations: solutions under the 2-norm distance of `x`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct SolutionSpace;

impl ExplanationSpace for SolutionSpace {
    type Item = QpSolution;

    fn id(&self) -> &str {
        "qp-solutions"
    }

    fn distance(&self, a: &QpSolution, b: &QpSolution) -> f64 {
        if a.x.len() != b.x.len() {
            return f64::INFINITY;
        }
        (&a.x - &b.x).norm()
    }

    fn is_trivial(&self, e: &QpSolution) -> bool {
        e.x.is_empty()
    }
}

pub type OptPrinciples = PrincipleSystem<QpProblem, QpSolution>;

fn kkt_principle(id: &str, part: fn(&KktResidual) -> f64) -> Principle<QpProblem, QpSolution> {
    let residual = move |e: &QpSolution, p: Option<&QpProblem>| {
        p.and_then(|p| kkt_residual(p, e).ok()).map(|r| part(&r))
    };
    Principle::hard(id, Scope::Pair, move |e, p| match residual(e, p) {
        Some(r) if r <= KKT_THRESHOLD => Verdict::Satisfied,
        Some(_) => Verdict::Violated,
        None => Verdict::Inapplicable,
    })
    .with_soft_penalty(1.0)
    .with_measure(move |e, p| residual(e, p).unwrap_or(0.0))
}

/// Stationarity, primal feasibility and complementary slackness, each Hard
/// at [`KKT_THRESHOLD`].
pub fn kkt_principles() -> OptPrinciples {
    PrincipleSystem::new(vec![
        kkt_principle("kkt_stationarity", |r| r.stationarity),
        kkt_principle("kkt_primal_feasibility", |r| r.primal_infeasibility),
        kkt_principle("kkt_complementary_slackness", |r| r.complementary_slackness),
    ])
    .expect("distinct ids")
}

/// Optimisation as reasoning: `f` solves by projected gradient, `g` rebuilds
/// the linear term that makes the solution a KKT point of the template geometry.
#[derive(Debug, Clone)]
pub struct OptSystem {
    phenomena: ProblemSpace,
    explanations: SolutionSpace,
    solver: SolverConfig,
    principles: OptPrinciples,
}

impl OptSystem {
    pub fn new(template: QpProblem, source: ProblemSource, solver: SolverConfig) -> Result<Self, OptError> {
        template.validate()?;
        if !template.is_convex() {
            return Err(OptError::InvalidProblem("template Q is not positive semidefinite".into()));
        }
        if let ProblemSource::RandomLinear { scale } = source {
            if !(scale.is_finite() && scale > 0.0) {
                return Err(OptError::InvalidProblem(format!("scale must be positive, got {scale}")));
            }
        }
        Ok(Self {
            phenomena: ProblemSpace { template, source },
            explanations: SolutionSpace,
            solver,
            principles: kkt_principles(),
        })
    }

    pub fn with_principles(mut self, principles: OptPrinciples) -> Self {
        self.principles = principles;
        self
    }

    pub fn solver(&self) -> &SolverConfig {
        &self.solver
    }

    pub fn template(&self) -> &QpProblem {
        &self.phenomena.template
    }
}

impl ReasoningSystem for OptSystem {
    type Phenomena = ProblemSpace;
    type Explanations = SolutionSpace;

    fn phenomena(&self) -> &ProblemSpace {
        &self.phenomena
    }

    fn explanations(&self) -> &SolutionSpace {
        &self.explanations
    }

    fn inference(&self, p: &QpProblem) -> Partial<QpSolution> {
        match solve_projected_gradient(p, &self.solver) {
            Ok(out) => out,
            Err(e) => Partial::undefined(e.to_string()),
        }
    }

    fn generation(&self, e: &QpSolution) -> Partial<QpProblem> {
        match reconstruct_problem(e, &self.phenomena.template) {
            Ok(p) => Partial::Defined(p),
            Err(err) => Partial::undefined(err.to_string()),
        }
    }

    fn principles(&self) -> &OptPrinciples {
        &self.principles
    }

    fn set_principles(&mut self, principles: Principles<Self>) {
        self.principles = principles;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::principle::satisfies;
    use nalgebra::DMatrix;

    fn boxed() -> QpProblem {
        QpProblem::unconstrained(DMatrix::identity(2, 2), DVector::from_vec(vec![-2.0, 0.0]))
            .unwrap()
            .with_box(vec![(0.0, 1.0), (0.0, 1.0)])
            .unwrap()
    }

    #[test]
    fn kkt_principles_accept_solver_output() {
        let s = OptSystem::new(boxed(), ProblemSource::RandomLinear { scale: 3.0 }, SolverConfig::default()).unwrap();
        for p in s.phenomena().sample(3, 20) {
            let e = s.inference(&p).defined().unwrap();
            let report = satisfies(s.principles(), &e, Some(&p)).unwrap();
            assert!(report.overall_sound, "{:?}", report);
        }
    }

    #[test]
    fn kkt_principles_reject_wrong_point() {
        let p = boxed();
        let wrong = QpSolution {
            x: DVector::from_vec(vec![0.5, 0.5]),
            multipliers: crate::opt::Multipliers::zeros(2, 0),
            iterations: 0,
            converged: true,
        };
        let report = satisfies(&kkt_principles(), &wrong, Some(&p)).unwrap();
        assert!(!report.overall_sound);
        assert_eq!(report.hard_violations().count(), 1);
    }

    #[test]
    fn probes_respect_radius_and_geometry() {
        let s = OptSystem::new(boxed(), ProblemSource::Fixed(vec![boxed()]), SolverConfig::default()).unwrap();
        let p = boxed();
        for q in s.phenomena().probes(&p, 0.5, 9, 16) {
            assert!(q.same_geometry(&p));
            assert!(s.phenomena().distance(&p, &q) <= 0.5);
        }
        assert_eq!(s.phenomena().distance(&p, &p.clone().with_halfspace(DVector::from_vec(vec![1.0, 1.0]), 9.0).unwrap()), 1.0);
    }

    #[test]
    fn nonconvex_template_rejected() {
        let q = DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, -1.0]);
        let t = QpProblem::unconstrained(q, DVector::zeros(2)).unwrap();
        assert!(OptSystem::new(t, ProblemSource::RandomLinear { scale: 1.0 }, SolverConfig::default()).is_err());
    }
}
