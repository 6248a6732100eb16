//! Bounded forward chaining with support tracking, and premise readback.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::Serialize;

use super::formula::Formula;
use super::parser::parse_formula;
use super::LogicError;

/// Ordered premises without structural duplicates. Support sets index into it.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct PremiseSet {
    formulas: Vec<Formula>,
}

impl PremiseSet {
    /// Keeps the first occurrence of each formula.
    pub fn new(formulas: impl IntoIterator<Item = Formula>) -> Self {
        let mut seen = BTreeSet::new();
        let formulas = formulas
            .into_iter()
            .filter(|f| seen.insert(f.clone()))
            .collect();
        Self { formulas }
    }

    pub fn parse<'a>(formulas: impl IntoIterator<Item = &'a str>) -> Result<Self, LogicError> {
        let parsed = formulas
            .into_iter()
            .enumerate()
            .map(|(i, s)| {
                parse_formula(s).map_err(|error| LogicError::Parse { line: i + 1, error })
            })
            .collect::<Result<Vec<_>, _>>()?;
        Ok(Self::new(parsed))
    }

    /// Premise-file syntax: one formula per line, `#` starts a comment.
    pub fn from_text(text: &str) -> Result<Self, LogicError> {
        let mut formulas = Vec::new();
        for (i, line) in text.lines().enumerate() {
            let body = line.split('#').next().unwrap_or("");
            if body.trim().is_empty() {
                continue;
            }
            let f = parse_formula(body).map_err(|error| LogicError::Parse { line: i + 1, error })?;
            formulas.push(f);
        }
        Ok(Self::new(formulas))
    }

    pub fn formulas(&self) -> &[Formula] {
        &self.formulas
    }

    pub fn len(&self) -> usize {
        self.formulas.len()
    }

    pub fn is_empty(&self) -> bool {
        self.formulas.is_empty()
    }

    pub fn contains(&self, f: &Formula) -> bool {
        self.formulas.contains(f)
    }

    pub fn atom_count(&self) -> usize {
        let mut atoms = BTreeSet::new();
        for f in &self.formulas {
            f.collect_atoms(&mut atoms);
        }
        atoms.len()
    }

    /// Size of the symmetric difference of the two formula sets.
    pub fn distance(&self, other: &Self) -> usize {
        let a: BTreeSet<_> = self.formulas.iter().collect();
        let b: BTreeSet<_> = other.formulas.iter().collect();
        a.symmetric_difference(&b).count()
    }
}

impl fmt::Display for PremiseSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (i, p) in self.formulas.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{p}")?;
        }
        f.write_str("}")
    }
}

impl Serialize for PremiseSet {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_seq(self.formulas.iter().map(ToString::to_string))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
pub struct TheoremRecord {
    pub formula: Formula,
    /// Indices of the premises the derivation rests on.
    pub support: BTreeSet<usize>,
    pub depth: usize,
}

/// Output of [`deduce`]: the theorems plus the premises their supports index.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Derivation {
    pub premises: PremiseSet,
    /// Sorted by depth, then formula.
    pub theorems: Vec<TheoremRecord>,
    pub depth_bound: usize,
    /// The bound stopped chaining before a fixpoint.
    pub exhausted: bool,
}

impl Derivation {
    pub fn get(&self, f: &Formula) -> Option<&TheoremRecord> {
        self.theorems.iter().find(|t| &t.formula == f)
    }

    pub fn contains(&self, f: &Formula) -> bool {
        self.get(f).is_some()
    }

    pub fn formulas(&self) -> BTreeSet<&Formula> {
        self.theorems.iter().map(|t| &t.formula).collect()
    }
}

fn smaller(a: &BTreeSet<usize>, b: &BTreeSet<usize>) -> bool {
    (a.len(), a) < (b.len(), b)
}

fn union(a: &BTreeSet<usize>, b: &BTreeSet<usize>) -> BTreeSet<usize> {
    a.union(b).copied().collect()
}

/// Everything derivable in one more step, with its smallest support.
fn step(
    known: &BTreeMap<Formula, TheoremRecord>,
    universe: &BTreeSet<Formula>,
) -> BTreeMap<Formula, BTreeSet<usize>> {
    let mut fresh: BTreeMap<Formula, BTreeSet<usize>> = BTreeMap::new();
    let mut offer = |f: &Formula, support: BTreeSet<usize>| {
        if known.contains_key(f) {
            return;
        }
        match fresh.get_mut(f) {
            Some(existing) if smaller(&support, existing) => *existing = support,
            Some(_) => {}
            None => {
                fresh.insert(f.clone(), support);
            }
        }
    };

    for (f, rec) in known {
        match f {
            Formula::And(a, b) => {
                offer(a, rec.support.clone());
                offer(b, rec.support.clone());
            }
            Formula::Implies(a, b) => {
                if let Some(ra) = known.get(a.as_ref()) {
                    offer(b, union(&rec.support, &ra.support));
                }
            }
            _ => {}
        }
    }
    // Introduction rules only build formulas already present as subformulas.
    for u in universe {
        match u {
            Formula::And(a, b) => {
                if let (Some(ra), Some(rb)) = (known.get(a.as_ref()), known.get(b.as_ref())) {
                    offer(u, union(&ra.support, &rb.support));
                }
            }
            Formula::Or(a, b) => {
                let best = match (known.get(a.as_ref()), known.get(b.as_ref())) {
                    (Some(ra), Some(rb)) if smaller(&rb.support, &ra.support) => Some(&rb.support),
                    (Some(ra), _) => Some(&ra.support),
                    (None, Some(rb)) => Some(&rb.support),
                    (None, None) => None,
                };
                if let Some(s) = best {
                    offer(u, s.clone());
                }
            }
            _ => {}
        }
    }
    fresh
}

/// Forward chaining from `premises` for at most `depth_bound` rounds.
///
/// Rules: modus ponens, conjunction elimination, and conjunction and
/// disjunction introduction limited to subformulas of the premises. A theorem
/// first found in round `k` has depth `k`.
pub fn deduce(premises: &PremiseSet, depth_bound: usize) -> Result<Derivation, LogicError> {
    if depth_bound == 0 {
        return Err(LogicError::InvalidDepthBound);
    }
    let mut universe = BTreeSet::new();
    for p in premises.formulas() {
        p.collect_subformulas(&mut universe);
    }
    let mut known: BTreeMap<Formula, TheoremRecord> = BTreeMap::new();
    for (i, p) in premises.formulas().iter().enumerate() {
        known.insert(
            p.clone(),
            TheoremRecord {
                formula: p.clone(),
                support: BTreeSet::from([i]),
                depth: 0,
            },
        );
    }

    let mut exhausted = false;
    for depth in 1..=depth_bound + 1 {
        let fresh = step(&known, &universe);
        if fresh.is_empty() {
            break;
        }
        if depth > depth_bound {
            exhausted = true;
            break;
        }
        for (formula, support) in fresh {
            known.insert(
                formula.clone(),
                TheoremRecord {
                    formula,
                    support,
                    depth,
                },
            );
        }
    }

    let mut theorems: Vec<TheoremRecord> = known.into_values().collect();
    theorems.sort_by(|a, b| (a.depth, &a.formula).cmp(&(b.depth, &b.formula)));
    Ok(Derivation {
        premises: premises.clone(),
        theorems,
        depth_bound,
        exhausted,
    })
}

/// The sub-premise-set indexed by the union of the theorems' supports, in original order.
pub fn reconstruct_premises(
    theorems: &[TheoremRecord],
    original: &PremiseSet,
) -> Result<PremiseSet, LogicError> {
    let mut used = BTreeSet::new();
    for t in theorems {
        for &i in &t.support {
            if i >= original.len() {
                return Err(LogicError::IndexOutOfRange {
                    index: i,
                    len: original.len(),
                });
            }
            used.insert(i);
        }
    }
    Ok(PremiseSet::new(
        used.into_iter().map(|i| original.formulas()[i].clone()),
    ))
}
