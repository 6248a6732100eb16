//! Small systems on the real line with closed-form behaviour.
//!
//! They exist to pin down the diagnostics: identity is coherent, sound and
//! complete; a constant offset in `g` is sound but incoherent; a constant `f`
//! is deadlocked; negation cycles and doubling diverges under refinement.

use std::sync::Arc;

use rand::Rng;

use crate::principle::PrincipleSystem;
use crate::space::{seeded_rng, ExplanationSpace, PhenomenonSpace};
use crate::system::{Partial, Principles, ReasoningSystem};

/// Finite reals in `[-half_width, half_width]`, absolute-difference metric.
#[derive(Debug, Clone, PartialEq)]
pub struct RealLine {
    id: String,
    half_width: f64,
}

impl RealLine {
    pub fn new(id: impl Into<String>, half_width: f64) -> Self {
        Self {
            id: id.into(),
            half_width,
        }
    }
}

impl PhenomenonSpace for RealLine {
    type Item = f64;

    fn id(&self) -> &str {
        &self.id
    }

    fn admissible(&self, p: &f64) -> bool {
        p.is_finite()
    }

    fn sample(&self, seed: u64, n: usize) -> Vec<f64> {
        let mut rng = seeded_rng(seed, 0);
        (0..n)
            .map(|_| rng.random_range(-self.half_width..=self.half_width))
            .collect()
    }

    fn distance(&self, a: &f64, b: &f64) -> f64 {
        (a - b).abs()
    }

    fn probes(&self, p: &f64, radius: f64, seed: u64, n: usize) -> Vec<f64> {
        let mut rng = seeded_rng(seed, 1);
        (0..n).map(|_| p + rng.random_range(-radius..=radius)).collect()
    }
}

impl ExplanationSpace for RealLine {
    type Item = f64;

    fn id(&self) -> &str {
        &self.id
    }

    fn distance(&self, a: &f64, b: &f64) -> f64 {
        (a - b).abs()
    }

    fn is_trivial(&self, e: &f64) -> bool {
        !e.is_finite()
    }
}

type RealMap = dyn Fn(f64) -> Partial<f64> + Send + Sync;

/// A system on the reals defined by two closures.
#[derive(Clone)]
pub struct RealLineSystem {
    name: String,
    space: RealLine,
    infer: Arc<RealMap>,
    generate: Arc<RealMap>,
    principles: PrincipleSystem<f64, f64>,
}

impl std::fmt::Debug for RealLineSystem {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("RealLineSystem")
            .field("name", &self.name)
            .field("principles", &self.principles)
            .finish()
    }
}

impl RealLineSystem {
    pub fn new<F, G>(name: impl Into<String>, infer: F, generate: G) -> Self
    where
        F: Fn(f64) -> Partial<f64> + Send + Sync + 'static,
        G: Fn(f64) -> Partial<f64> + Send + Sync + 'static,
    {
        let name = name.into();
        Self {
            space: RealLine::new(name.clone(), 10.0),
            name,
            infer: Arc::new(infer),
            generate: Arc::new(generate),
            principles: PrincipleSystem::empty(),
        }
    }

    pub fn identity() -> Self {
        Self::new("identity", Partial::Defined, Partial::Defined)
    }

    /// `f = id`, `g(e) = e + offset`.
    pub fn offset(offset: f64) -> Self {
        Self::new("offset", Partial::Defined, move |e| Partial::Defined(e + offset))
    }

    /// `f(p) = value` everywhere, `g = id`.
    pub fn constant(value: f64) -> Self {
        Self::new("constant", move |_| Partial::Defined(value), Partial::Defined)
    }

    /// `f∘g` is negation.
    pub fn negation() -> Self {
        Self::new("negation", Partial::Defined, |e| Partial::Defined(-e))
    }

    /// `f∘g` doubles its argument.
    pub fn doubling() -> Self {
        Self::new("doubling", Partial::Defined, |e| Partial::Defined(2.0 * e))
    }

    /// `f∘g` multiplies by `factor`.
    pub fn scaling(factor: f64) -> Self {
        Self::new("scaling", Partial::Defined, move |e| Partial::Defined(factor * e))
    }

    pub fn with_half_width(mut self, half_width: f64) -> Self {
        self.space = RealLine::new(self.name.clone(), half_width);
        self
    }

    pub fn with_principles(mut self, principles: PrincipleSystem<f64, f64>) -> Self {
        self.principles = principles;
        self
    }

    pub fn name(&self) -> &str {
        &self.name
    }
}

impl ReasoningSystem for RealLineSystem {
    type Phenomena = RealLine;
    type Explanations = RealLine;

    fn phenomena(&self) -> &RealLine {
        &self.space
    }

    fn explanations(&self) -> &RealLine {
        &self.space
    }

    fn inference(&self, p: &f64) -> Partial<f64> {
        (self.infer)(*p)
    }

    fn generation(&self, e: &f64) -> Partial<f64> {
        (self.generate)(*e)
    }

    fn principles(&self) -> &Principles<Self> {
        &self.principles
    }

    fn set_principles(&mut self, principles: Principles<Self>) {
        self.principles = principles;
    }
}
