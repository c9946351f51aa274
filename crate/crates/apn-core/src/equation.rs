//! Homogeneous linear place equations: satisfaction, the place-invariant
//! sufficient criterion, and validity via per-transition stability.

use std::collections::BTreeMap;

use thiserror::Error;

use crate::group::{CyclicGroup, GroupElement};
use crate::net::{Net, Transition};
use crate::poly::{pvec_dot, PVector, PolyError};
use crate::term::Term;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EquationError {
    #[error(transparent)]
    Poly(#[from] PolyError),
    #[error("equation vector must be simple (monomial or empty per place)")]
    NotSimple,
}

/// An equation k . m = 0 over a cyclic group, with at most one monomial
/// coefficient per place.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HomogeneousEquation {
    name: String,
    vector: PVector,
}

impl HomogeneousEquation {
    pub fn new(name: String, vector: PVector) -> Result<HomogeneousEquation, EquationError> {
        if !vector.is_simple() {
            return Err(EquationError::NotSimple);
        }
        Ok(HomogeneousEquation { name, vector })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn vector(&self) -> &PVector {
        &self.vector
    }

    pub fn group(&self) -> CyclicGroup {
        self.vector.group()
    }

    /// The monomial at a place: its term and coefficient, if nonempty.
    pub fn monomial(&self, place: &str) -> Option<(&Term, GroupElement)> {
        let poly = self.vector.get(place)?;
        let (term, coeff) = poly.iter().next()?;
        let elem = self
            .group()
            .element(coeff)
            .expect("stored coefficients are canonical");
        Some((term, elem))
    }

    /// Places with a nonzero coefficient, in place order.
    pub fn constrained_places(&self) -> Vec<String> {
        self.vector
            .support_places()
            .map(str::to_string)
            .collect()
    }
}

/// True iff the marking satisfies the equation: k . m is the empty
/// polynomial.
pub fn satisfies(m: &PVector, eq: &HomogeneousEquation) -> Result<bool, EquationError> {
    Ok(pvec_dot(&eq.vector, m)?.is_zero())
}

/// Place-invariant test: k . effect(t) vanishes symbolically. Sufficient
/// for stability, not necessary.
pub fn invariant_check(eq: &HomogeneousEquation, t: &Transition) -> Result<bool, EquationError> {
    Ok(pvec_dot(&eq.vector, &t.effect())?.is_zero())
}

/// Outcome of the stability-based validity criterion.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Validity {
    Valid,
    /// The criterion is sufficient only; Unknown never means invalid.
    Unknown { reason: String },
}

/// Valid iff the initial marking satisfies the equation and every
/// transition is stable per the supplied verdicts.
pub fn validity_by_stability(
    net: &Net,
    eq: &HomogeneousEquation,
    stable: &BTreeMap<String, bool>,
) -> Result<Validity, EquationError> {
    if !satisfies(net.initial(), eq)? {
        return Ok(Validity::Unknown {
            reason: format!("initial marking does not satisfy {}", eq.name),
        });
    }
    for t in net.structure().transitions() {
        if !stable.get(t.name()).copied().unwrap_or(false) {
            return Ok(Validity::Unknown {
                reason: format!("transition {} not known stable", t.name()),
            });
        }
    }
    Ok(Validity::Valid)
}
