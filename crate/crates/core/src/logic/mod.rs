//! Propositional deduction as a reasoning system.
//!
//! Phenomena are premise sets, explanations are bounded derivations. `g` reads
//! the premises back from the support sets of the derived theorems, and a
//! truth-table oracle supplies the entailment ground truth.

mod deduce;
mod formula;
mod oracle;
mod parser;
mod system;

pub use deduce::{deduce, reconstruct_premises, Derivation, PremiseSet, TheoremRecord};
pub use formula::{and, atom, implies, not, or, Formula};
pub use oracle::{entails_bruteforce, is_tautology, satisfiable, MAX_ATOMS};
pub use parser::{parse_formula, ParseError};
pub use system::{
    atom_names, random_formula, standard_principles, LogicPrinciples, LogicSystem, PremiseSource,
    PremiseSpace, RandomPremises, TheoremSpace,
};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum LogicError {
    #[error("line {line}: {error}")]
    Parse { line: usize, error: ParseError },
    #[error("{count} distinct atoms exceed the truth-table limit of 16")]
    TooManyAtoms { count: usize },
    #[error("support index {index} out of range for {len} premises")]
    IndexOutOfRange { index: usize, len: usize },
    #[error("depth bound must be at least 1")]
    InvalidDepthBound,
}
