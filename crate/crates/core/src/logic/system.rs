use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::principle::{Principle, PrincipleSystem, Scope, Verdict};
use crate::space::{seeded_rng, ExplanationSpace, PhenomenonSpace};
use crate::system::{Partial, Principles, ReasoningSystem};

use super::deduce::{deduce, reconstruct_premises, Derivation, PremiseSet};
use super::formula::Formula;
use super::oracle::{entails_bruteforce, is_tautology, satisfiable, MAX_ATOMS};
use super::LogicError;

const SAMPLE_STREAM: u64 = 0x4c4f_4749_43;
const PROBE_STREAM: u64 = 0x4c4f_4749_44;

/// Shape of randomly generated premise sets.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RandomPremises {
    pub atoms: usize,
    pub max_premises: usize,
    pub max_formula_depth: usize,
    /// Resample until the oracle finds the set satisfiable.
    pub consistent_only: bool,
}

impl Default for RandomPremises {
    fn default() -> Self {
        Self {
            atoms: 3,
            max_premises: 5,
            max_formula_depth: 2,
            consistent_only: true,
        }
    }
}

/// Atom names `A`..`Z`, then `X26`, `X27`, ...
pub fn atom_names(n: usize) -> Vec<String> {
    (0..n)
        .map(|i| match u8::try_from(i) {
            Ok(i) if i < 26 => char::from(b'A' + i).to_string(),
            _ => format!("X{i}"),
        })
        .collect()
}

pub fn random_formula(rng: &mut ChaCha8Rng, atoms: &[String], max_depth: usize) -> Formula {
    if max_depth == 0 || rng.random_bool(0.35) {
        let a = Formula::Atom(atoms[rng.random_range(0..atoms.len())].clone());
        return if rng.random_bool(0.2) { Formula::Not(Box::new(a)) } else { a };
    }
    let sub = |rng: &mut ChaCha8Rng| Box::new(random_formula(rng, atoms, max_depth - 1));
    match rng.random_range(0..20) {
        0..=6 => Formula::Implies(sub(rng), sub(rng)),
        7..=10 => Formula::And(sub(rng), sub(rng)),
        11..=14 => Formula::Or(sub(rng), sub(rng)),
        _ => Formula::Not(sub(rng)),
    }
}

impl RandomPremises {
    pub fn generate(&self, rng: &mut ChaCha8Rng) -> PremiseSet {
        let names = atom_names(self.atoms.max(1));
        let mut last = PremiseSet::default();
        for _ in 0..1000 {
            let n = rng.random_range(1..=self.max_premises.max(1));
            last = PremiseSet::new(
                (0..n).map(|_| random_formula(rng, &names, self.max_formula_depth)),
            );
            if !self.consistent_only || satisfiable(last.formulas()).unwrap_or(false) {
                break;
            }
        }
        last
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum PremiseSource {
    /// A finite list, checked exhaustively.
    Fixed(Vec<PremiseSet>),
    Random(RandomPremises),
}

/// Phenomena: premise sets under symmetric-difference distance.
#[derive(Debug, Clone, PartialEq)]
pub struct PremiseSpace {
    source: PremiseSource,
}

impl PremiseSpace {
    pub fn new(source: PremiseSource) -> Self {
        Self { source }
    }

    pub fn source(&self) -> &PremiseSource {
        &self.source
    }
}

impl PhenomenonSpace for PremiseSpace {
    type Item = PremiseSet;

    fn id(&self) -> &str {
        "premise-sets"
    }

    fn admissible(&self, p: &PremiseSet) -> bool {
        p.atom_count() <= MAX_ATOMS
    }

    fn sample(&self, seed: u64, n: usize) -> Vec<PremiseSet> {
        match &self.source {
            PremiseSource::Fixed(sets) if sets.is_empty() => Vec::new(),
            PremiseSource::Fixed(sets) => sets.iter().cycle().take(n).cloned().collect(),
            PremiseSource::Random(shape) => {
                let mut rng = seeded_rng(seed, SAMPLE_STREAM);
                (0..n).map(|_| shape.generate(&mut rng)).collect()
            }
        }
    }

    fn distance(&self, a: &PremiseSet, b: &PremiseSet) -> f64 {
        a.distance(b) as f64
    }

    fn enumerate(&self) -> Option<Vec<PremiseSet>> {
        match &self.source {
            PremiseSource::Fixed(sets) => Some(sets.clone()),
            PremiseSource::Random(_) => None,
        }
    }

    /// Neighbours at distance 1: one premise dropped or one literal added.
    fn probes(&self, p: &PremiseSet, radius: f64, seed: u64, n: usize) -> Vec<PremiseSet> {
        if radius < 1.0 {
            return Vec::new();
        }
        let mut names: Vec<String> = p
            .formulas()
            .iter()
            .flat_map(|f| f.atoms().into_iter().map(str::to_string).collect::<Vec<_>>())
            .collect();
        names.sort();
        names.dedup();
        if names.is_empty() {
            names.push("A".into());
        }
        let mut rng = seeded_rng(seed, PROBE_STREAM);
        let mut out = Vec::with_capacity(n);
        for _ in 0..n.saturating_mul(4) {
            if out.len() == n {
                break;
            }
            let mut fs = p.formulas().to_vec();
            if !fs.is_empty() && rng.random_bool(0.5) {
                fs.remove(rng.random_range(0..fs.len()));
            } else {
                let a = Formula::Atom(names[rng.random_range(0..names.len())].clone());
                let lit = if rng.random_bool(0.5) { Formula::Not(Box::new(a)) } else { a };
                if p.contains(&lit) {
                    continue;
                }
                fs.push(lit);
            }
            out.push(PremiseSet::new(fs));
        }
        out
    }
}

/// Explanations: derivations under symmetric difference of theorem formulas.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct TheoremSpace;

impl ExplanationSpace for TheoremSpace {
    type Item = Derivation;

    fn id(&self) -> &str {
        "theorem-sets"
    }

    fn distance(&self, a: &Derivation, b: &Derivation) -> f64 {
        a.formulas().symmetric_difference(&b.formulas()).count() as f64
    }

    /// Empty, or nothing but tautologies.
    fn is_trivial(&self, e: &Derivation) -> bool {
        e.theorems
            .iter()
            .all(|t| is_tautology(&t.formula).unwrap_or(false))
    }
}

pub type LogicPrinciples = PrincipleSystem<PremiseSet, Derivation>;

/// `consistency` and `derivation_soundness`, both Hard.
pub fn standard_principles() -> LogicPrinciples {
    let consistency = Principle::hard("consistency", Scope::Explanation, |e: &Derivation, _| {
        match satisfiable(e.premises.formulas()) {
            Ok(true) => Verdict::Satisfied,
            Ok(false) => Verdict::Violated,
            Err(_) => Verdict::Inapplicable,
        }
    })
    .with_soft_penalty(1.0);
    let soundness = Principle::hard(
        "derivation_soundness",
        Scope::Explanation,
        |e: &Derivation, _| {
            for t in &e.theorems {
                let Ok(support) = reconstruct_premises(std::slice::from_ref(t), &e.premises) else {
                    return Verdict::Violated;
                };
                match entails_bruteforce(support.formulas(), &t.formula) {
                    Ok(true) => {}
                    Ok(false) => return Verdict::Violated,
                    Err(_) => return Verdict::Inapplicable,
                }
            }
            Verdict::Satisfied
        },
    )
    .with_soft_penalty(1.0);
    PrincipleSystem::new(vec![consistency, soundness]).expect("distinct ids")
}

/// Deductive reasoning: `f` is bounded forward chaining, `g` reads premises
/// back from support sets.
#[derive(Debug, Clone)]
pub struct LogicSystem {
    phenomena: PremiseSpace,
    explanations: TheoremSpace,
    depth_bound: usize,
    targets: Vec<Formula>,
    principles: LogicPrinciples,
}

impl LogicSystem {
    pub fn new(source: PremiseSource, depth_bound: usize) -> Result<Self, LogicError> {
        if depth_bound == 0 {
            return Err(LogicError::InvalidDepthBound);
        }
        Ok(Self {
            phenomena: PremiseSpace::new(source),
            explanations: TheoremSpace,
            depth_bound,
            targets: Vec::new(),
            principles: standard_principles(),
        })
    }

    /// Formulas whose oracle entailment `f` is expected to reach.
    pub fn with_targets(mut self, targets: Vec<Formula>) -> Self {
        self.targets = targets;
        self
    }

    pub fn with_principles(mut self, principles: LogicPrinciples) -> Self {
        self.principles = principles;
        self
    }

    pub fn depth_bound(&self) -> usize {
        self.depth_bound
    }

    pub fn targets(&self) -> &[Formula] {
        &self.targets
    }
}

impl ReasoningSystem for LogicSystem {
    type Phenomena = PremiseSpace;
    type Explanations = TheoremSpace;

    fn phenomena(&self) -> &PremiseSpace {
        &self.phenomena
    }

    fn explanations(&self) -> &TheoremSpace {
        &self.explanations
    }

    fn inference(&self, p: &PremiseSet) -> Partial<Derivation> {
        match deduce(p, self.depth_bound) {
            Ok(d) => Partial::Defined(d),
            Err(e) => Partial::undefined(e.to_string()),
        }
    }

    fn generation(&self, e: &Derivation) -> Partial<PremiseSet> {
        match reconstruct_premises(&e.theorems, &e.premises) {
            Ok(p) => Partial::Defined(p),
            Err(err) => Partial::undefined(err.to_string()),
        }
    }

    fn principles(&self) -> &LogicPrinciples {
        &self.principles
    }

    fn set_principles(&mut self, principles: Principles<Self>) {
        self.principles = principles;
    }

    fn coverage_gap(&self, p: &PremiseSet, e: &Derivation) -> Option<String> {
        let missing: Vec<String> = self
            .targets
            .iter()
            .filter(|t| !e.contains(t))
            .filter(|t| entails_bruteforce(p.formulas(), t).unwrap_or(false))
            .map(ToString::to_string)
            .collect();
        (!missing.is_empty()).then(|| {
            format!(
                "entailed but not derived within depth {}: {}",
                self.depth_bound,
                missing.join(", ")
            )
        })
    }
}
