//! Zeros of an equation: count vectors whose weighted coefficient sum
//! vanishes and whose coefficient terms unify.

use std::collections::BTreeMap;

use crate::equation::HomogeneousEquation;
use crate::group::{weighted_coeff_sum, GroupElement};
use crate::stability::{collapse_variables, standardized_kappa, StabilityError};
use crate::term::{Substitution, Term};
use crate::unify::{unify, UnifyFailure};

/// A count vector abstracting a family of satisfying markings: the
/// weighted coefficient sum vanishes and the active coefficient terms
/// share a most general unifier.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Zero {
    // Strictly positive counts on constrained places only.
    counts: BTreeMap<String, u64>,
    mgu: Substitution,
    // The common image of the active coefficient terms under the MGU.
    // None for the trivial zero.
    result: Option<Term>,
}

impl Zero {
    pub(crate) fn assemble(
        counts: BTreeMap<String, u64>,
        mgu: Substitution,
        result: Option<Term>,
    ) -> Zero {
        debug_assert!(counts.values().all(|c| *c > 0));
        debug_assert_eq!(counts.is_empty(), result.is_none());
        Zero {
            counts,
            mgu,
            result,
        }
    }

    pub fn trivial() -> Zero {
        Zero {
            counts: BTreeMap::new(),
            mgu: Substitution::empty(),
            result: None,
        }
    }

    pub fn is_trivial(&self) -> bool {
        self.counts.is_empty()
    }

    pub fn count(&self, place: &str) -> u64 {
        self.counts.get(place).copied().unwrap_or(0)
    }

    pub fn counts(&self) -> &BTreeMap<String, u64> {
        &self.counts
    }

    /// Counts as a dense vector over the given place order.
    pub fn count_vec(&self, places: &[String]) -> Vec<u64> {
        places.iter().map(|p| self.count(p)).collect()
    }

    pub fn total(&self) -> u64 {
        self.counts.values().sum()
    }

    pub fn mgu(&self) -> &Substitution {
        &self.mgu
    }

    /// The unification result; None for the trivial zero.
    pub fn result(&self) -> Option<&Term> {
        self.result.as_ref()
    }

    /// The result with all variables collapsed to one placeholder; zeros
    /// with equal collapsed results are interchangeable for derivation.
    pub fn collapsed_result(&self) -> Option<Term> {
        self.result.as_ref().map(collapse_variables)
    }
}

/// Why a count vector is not a zero.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum NotAZero {
    SumNonzero { sum: GroupElement },
    UnificationFailed(UnifyFailure),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ZeroCheck {
    Zero(Zero),
    NotAZero(NotAZero),
}

impl ZeroCheck {
    pub fn into_zero(self) -> Option<Zero> {
        match self {
            ZeroCheck::Zero(z) => Some(z),
            ZeroCheck::NotAZero(_) => None,
        }
    }
}

/// Checks whether a count vector is a zero of the equation. Counts on
/// unconstrained places are ignored: they multiply a zero coefficient and
/// never enter the unification problem.
pub fn check_zero(
    nu: &BTreeMap<String, u64>,
    eq: &HomogeneousEquation,
) -> Result<ZeroCheck, StabilityError> {
    let group = eq.group();
    let constrained = eq.constrained_places();

    let mut counts = BTreeMap::new();
    let mut gammas: Vec<(u64, GroupElement)> = Vec::new();
    let mut active_kappas: Vec<Term> = Vec::new();
    for place in &constrained {
        let n = nu.get(place).copied().unwrap_or(0);
        if n == 0 {
            continue;
        }
        let (_, gamma) = eq.monomial(place).expect("constrained place has monomial");
        counts.insert(place.clone(), n);
        gammas.push((n, gamma));
        active_kappas.push(standardized_kappa(eq, place).expect("constrained place has term"));
    }

    let sum = weighted_coeff_sum(group, gammas.iter().map(|(n, g)| (*n, g)))?;
    if !sum.is_zero() {
        return Ok(ZeroCheck::NotAZero(NotAZero::SumNonzero { sum }));
    }

    // Chained pairs are equivalent to the full pair set for solvability.
    let pairs: Vec<(Term, Term)> = active_kappas
        .windows(2)
        .map(|w| (w[0].clone(), w[1].clone()))
        .collect();
    let mgu = match unify(&pairs) {
        Ok(mgu) => mgu,
        Err(failure) => {
            return Ok(ZeroCheck::NotAZero(NotAZero::UnificationFailed(failure)))
        }
    };

    let result = active_kappas.first().map(|k| mgu.apply(k));
    if cfg!(debug_assertions) {
        for k in &active_kappas {
            debug_assert_eq!(Some(mgu.apply(k)), result, "unifier image not common");
        }
    }

    Ok(ZeroCheck::Zero(Zero::assemble(counts, mgu, result)))
}
