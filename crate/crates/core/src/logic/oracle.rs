//! Truth-table entailment by enumerating every assignment.

use std::collections::BTreeSet;

use super::formula::Formula;
use super::LogicError;

/// Largest atom count the truth table will enumerate.
pub const MAX_ATOMS: usize = 16;

fn atom_table<'a>(formulas: impl IntoIterator<Item = &'a Formula>) -> Result<Vec<&'a str>, LogicError> {
    let mut atoms = BTreeSet::new();
    for f in formulas {
        f.collect_atoms(&mut atoms);
    }
    if atoms.len() > MAX_ATOMS {
        return Err(LogicError::TooManyAtoms { count: atoms.len() });
    }
    Ok(atoms.into_iter().collect())
}

fn assignments<'a>(atoms: &'a [&'a str]) -> impl Iterator<Item = impl Fn(&str) -> bool + 'a> + 'a {
    (0u32..(1u32 << atoms.len())).map(move |mask| {
        move |name: &str| {
            let i = atoms.binary_search(&name).expect("atom collected up front");
            mask & (1 << i) != 0
        }
    })
}

/// True iff every assignment satisfying all of `premises` satisfies `phi`.
pub fn entails_bruteforce(premises: &[Formula], phi: &Formula) -> Result<bool, LogicError> {
    let atoms = atom_table(premises.iter().chain(std::iter::once(phi)))?;
    let holds = assignments(&atoms).all(|v| !premises.iter().all(|p| p.eval(&v)) || phi.eval(&v));
    Ok(holds)
}

/// True iff some assignment satisfies every formula.
pub fn satisfiable(formulas: &[Formula]) -> Result<bool, LogicError> {
    let atoms = atom_table(formulas)?;
    let sat = assignments(&atoms).any(|v| formulas.iter().all(|f| f.eval(&v)));
    Ok(sat)
}

pub fn is_tautology(phi: &Formula) -> Result<bool, LogicError> {
    entails_bruteforce(&[], phi)
}
