//! Decision procedure for transition stability of homogeneous equations
//! over cyclic groups: zeros, spanning sets, derived substitutions,
//! realizations, and counterexample construction.

mod decide;
mod derive;
mod spanning;
mod zero;

pub use decide::{
    check_implements, counterexample_marking, decide_stability, realize, Decomposition,
    StabilityVerdict, UnstableWitness,
};
pub use decide::decompose_marking;
pub use derive::{derive_substitutions, DerivedSubstitution};
pub use spanning::{minimize_spanning, spanning_set, spanning_set_sequential, SpanningSet};
pub use zero::{check_zero, NotAZero, Zero, ZeroCheck};

use thiserror::Error;

use crate::equation::{EquationError, HomogeneousEquation};
use crate::group::GroupError;
use crate::net::NetError;
use crate::poly::PolyError;
use crate::term::{Substitution, Term};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum StabilityError {
    #[error(transparent)]
    Group(#[from] GroupError),
    #[error(transparent)]
    Poly(#[from] PolyError),
    #[error(transparent)]
    Equation(#[from] EquationError),
    #[error(transparent)]
    Net(#[from] NetError),
    #[error("enumeration bound overflows the supported integer range")]
    BoundOverflow,
    #[error("coefficient pattern at place `{place}` uses several variables; \
             counterexample construction requires a consistent token and found none")]
    AmbiguousPattern { place: String },
    #[error("constructed counterexample failed verification: {0}")]
    ConstructionFailed(String),
}

/// The coefficient term of a place, with its variables renamed to
/// place-derived names so terms of different places never share variables.
/// A single variable becomes the place name itself; further variables get
/// an index suffix in a namespace the parser rejects.
pub(crate) fn standardized_kappa(eq: &HomogeneousEquation, place: &str) -> Option<Term> {
    let (term, _) = eq.monomial(place)?;
    let vars: Vec<String> = term.variables().into_iter().collect();
    let renaming = if vars.len() == 1 {
        Substitution::from_bindings([(vars[0].clone(), Term::var(place))])
    } else {
        Substitution::from_bindings(vars.iter().enumerate().map(|(i, v)| {
            (v.clone(), Term::var(format!("{}~{}", place, i)))
        }))
    };
    Some(renaming.apply(term))
}

/// Renames every variable of a term to one placeholder, exposing only its
/// shape. Used to group interchangeable unification results.
pub(crate) fn collapse_variables(term: &Term) -> Term {
    match term {
        Term::Var(_) => Term::var("%0"),
        Term::App(f, args) => Term::App(f.clone(), args.iter().map(collapse_variables).collect()),
    }
}
