//! Algebraic Petri net structures, enabling, firing, and runs.

use std::collections::BTreeSet;

use thiserror::Error;

use crate::group::CyclicGroup;
use crate::poly::{pvec_add, pvec_scalar, pvec_substitute, PVector, PolyError};
use crate::term::{Signature, SignatureError, Substitution, Term};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum NetError {
    #[error(transparent)]
    Poly(#[from] PolyError),
    #[error(transparent)]
    Signature(#[from] SignatureError),
    #[error("transition `{transition}`: {side} side must be a simple semi-positive integer vector")]
    NotSimpleSemiPositive {
        transition: String,
        side: &'static str,
    },
    #[error("net must have at least one place")]
    NoPlaces,
    #[error("duplicate place `{0}`")]
    DuplicatePlace(String),
    #[error("duplicate transition `{0}`")]
    DuplicateTransition(String),
    #[error("unknown transition `{0}`")]
    UnknownTransition(String),
    #[error("initial marking must be ground and semi-positive")]
    BadInitialMarking,
    #[error("firing mode leaves variable `{0}` without a ground binding")]
    UnboundVariable(String),
    #[error("transition `{transition}` not enabled: place `{place}` lacks token {term}")]
    NotEnabled {
        transition: String,
        place: String,
        term: Term,
    },
    #[error("step {index}: {source}")]
    StepFailed {
        index: usize,
        #[source]
        source: Box<NetError>,
    },
}

/// A transition: what it consumes and what it produces, both simple
/// semi-positive integer vectors over the net's places.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Transition {
    name: String,
    consume: PVector,
    produce: PVector,
}

impl Transition {
    pub fn new(name: String, consume: PVector, produce: PVector) -> Result<Transition, NetError> {
        consume.same_places(&produce)?;
        for (vec, side) in [(&consume, "consume"), (&produce, "produce")] {
            if vec.group() != CyclicGroup::Int || !vec.is_simple() || !vec.is_semi_positive() {
                return Err(NetError::NotSimpleSemiPositive {
                    transition: name,
                    side,
                });
            }
        }
        Ok(Transition {
            name,
            consume,
            produce,
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn consume(&self) -> &PVector {
        &self.consume
    }

    pub fn produce(&self) -> &PVector {
        &self.produce
    }

    /// Net effect of one firing: produce minus consume.
    pub fn effect(&self) -> PVector {
        let neg = pvec_scalar(-1, &self.consume).expect("negation cannot overflow arc weights");
        pvec_add(&neg, &self.produce).expect("place sets match by construction")
    }

    /// Places the transition consumes from.
    pub fn preset(&self) -> BTreeSet<String> {
        self.consume
            .support_places()
            .map(str::to_string)
            .collect()
    }

    /// All variables occurring on either side.
    pub fn variables(&self) -> BTreeSet<String> {
        let mut vars = BTreeSet::new();
        for vec in [&self.consume, &self.produce] {
            for place in vec.support_places() {
                if let Some(poly) = vec.get(place) {
                    for term in poly.support() {
                        vars.extend(term.variables());
                    }
                }
            }
        }
        vars
    }
}

/// Net structure: signature, places, transitions, no initial marking.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NetStructure {
    signature: Signature,
    places: Vec<String>,
    transitions: Vec<Transition>,
}

impl NetStructure {
    pub fn new(
        signature: Signature,
        places: Vec<String>,
        transitions: Vec<Transition>,
    ) -> Result<NetStructure, NetError> {
        if places.is_empty() {
            return Err(NetError::NoPlaces);
        }
        let mut seen = BTreeSet::new();
        for p in &places {
            if !seen.insert(p.clone()) {
                return Err(NetError::DuplicatePlace(p.clone()));
            }
        }
        let mut tnames = BTreeSet::new();
        for t in &transitions {
            if !tnames.insert(t.name.clone()) {
                return Err(NetError::DuplicateTransition(t.name.clone()));
            }
            if t.consume.places() != places.as_slice() {
                return Err(PolyError::PlaceMismatch(
                    t.consume.places().to_vec(),
                    places.clone(),
                )
                .into());
            }
            for vec in [&t.consume, &t.produce] {
                for place in vec.support_places() {
                    for term in vec.get(place).into_iter().flat_map(|p| p.support()) {
                        signature.validate_term(term)?;
                    }
                }
            }
        }
        Ok(NetStructure {
            signature,
            places,
            transitions,
        })
    }

    pub fn signature(&self) -> &Signature {
        &self.signature
    }

    pub fn places(&self) -> &[String] {
        &self.places
    }

    pub fn transitions(&self) -> &[Transition] {
        &self.transitions
    }

    pub fn transition(&self, name: &str) -> Result<&Transition, NetError> {
        self.transitions
            .iter()
            .find(|t| t.name == name)
            .ok_or_else(|| NetError::UnknownTransition(name.to_string()))
    }

    pub fn empty_marking(&self) -> PVector {
        PVector::zero(CyclicGroup::Int, self.places.clone())
    }
}

/// A net structure together with an initial marking.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Net {
    structure: NetStructure,
    initial: PVector,
}

impl Net {
    pub fn new(structure: NetStructure, initial: PVector) -> Result<Net, NetError> {
        initial.same_places(&PVector::zero(CyclicGroup::Int, structure.places.clone()))?;
        if !initial.is_marking() {
            return Err(NetError::BadInitialMarking);
        }
        Ok(Net { structure, initial })
    }

    pub fn structure(&self) -> &NetStructure {
        &self.structure
    }

    pub fn initial(&self) -> &PVector {
        &self.initial
    }
}

fn require_mode(t: &Transition, sigma: &Substitution) -> Result<(), NetError> {
    let vars = t.variables();
    if let Some(v) = sigma.first_unbound(vars.iter().map(String::as_str)) {
        return Err(NetError::UnboundVariable(v.to_string()));
    }
    Ok(())
}

// First (place, term) where m falls short of the instantiated consume
// vector, scanning places then support terms in order.
fn first_deficit(
    m: &PVector,
    t: &Transition,
    sigma: &Substitution,
) -> Result<Option<(String, Term)>, NetError> {
    let need = pvec_substitute(t.consume(), sigma)?;
    for place in need.support_places() {
        let need_p = need.get(place).expect("support place has entry");
        for (term, count) in need_p.iter() {
            let have = m.get(place).map(|p| p.coeff(term)).unwrap_or(0);
            if have < count {
                return Ok(Some((place.to_string(), term.clone())));
            }
        }
    }
    Ok(None)
}

/// True iff the marking covers the instantiated consume vector.
pub fn enabled(m: &PVector, t: &Transition, sigma: &Substitution) -> Result<bool, NetError> {
    require_mode(t, sigma)?;
    m.same_places(t.consume())?;
    Ok(first_deficit(m, t, sigma)?.is_none())
}

/// Fires the transition, returning the successor marking.
pub fn fire(m: &PVector, t: &Transition, sigma: &Substitution) -> Result<PVector, NetError> {
    require_mode(t, sigma)?;
    m.same_places(t.consume())?;
    if let Some((place, term)) = first_deficit(m, t, sigma)? {
        return Err(NetError::NotEnabled {
            transition: t.name.clone(),
            place,
            term,
        });
    }
    let delta = pvec_substitute(&t.effect(), sigma)?;
    Ok(pvec_add(m, &delta)?)
}

/// Runs a script of (transition name, firing mode) steps from the initial
/// marking, returning the whole trajectory.
pub fn run(net: &Net, script: &[(String, Substitution)]) -> Result<Vec<PVector>, NetError> {
    let mut trajectory = vec![net.initial.clone()];
    for (index, (tname, sigma)) in script.iter().enumerate() {
        let t = net
            .structure
            .transition(tname)
            .map_err(|e| NetError::StepFailed {
                index,
                source: Box::new(e),
            })?;
        let current = trajectory.last().expect("trajectory nonempty");
        let next = fire(current, t, sigma).map_err(|e| NetError::StepFailed {
            index,
            source: Box::new(e),
        })?;
        trajectory.push(next);
    }
    Ok(trajectory)
}
