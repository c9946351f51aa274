//! Polynomials over terms with group coefficients, and place-indexed
//! vectors of them.

use std::collections::BTreeMap;
use std::fmt;

use thiserror::Error;

use crate::group::{g_add, scalar_mul, CyclicGroup, GroupError};
use crate::term::{term_product, Substitution, Term};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PolyError {
    #[error(transparent)]
    Group(#[from] GroupError),
    #[error("multiplicity vector must be over the integers, got {0}")]
    NotIntegerMultiplicities(CyclicGroup),
    #[error("place sets differ: {0:?} vs {1:?}")]
    PlaceMismatch(Vec<String>, Vec<String>),
    #[error("unknown place `{0}`")]
    UnknownPlace(String),
}

/// A finitely supported map from terms to nonzero group coefficients.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Polynomial {
    group: CyclicGroup,
    // Values are canonical for the group and never zero.
    entries: BTreeMap<Term, i128>,
}

impl Polynomial {
    pub fn zero(group: CyclicGroup) -> Polynomial {
        Polynomial {
            group,
            entries: BTreeMap::new(),
        }
    }

    pub fn monomial(group: CyclicGroup, term: Term, coeff: i128) -> Result<Polynomial, PolyError> {
        let mut p = Polynomial::zero(group);
        p.add_term(term, coeff)?;
        Ok(p)
    }

    pub fn from_entries<I>(group: CyclicGroup, entries: I) -> Result<Polynomial, PolyError>
    where
        I: IntoIterator<Item = (Term, i128)>,
    {
        let mut p = Polynomial::zero(group);
        for (term, coeff) in entries {
            p.add_term(term, coeff)?;
        }
        Ok(p)
    }

    fn add_term(&mut self, term: Term, coeff: i128) -> Result<(), PolyError> {
        let canonical = self.group.canon(coeff)?;
        if canonical == 0 {
            return Ok(());
        }
        match self.entries.get(&term).copied() {
            None => {
                self.entries.insert(term, canonical);
            }
            Some(existing) => {
                let sum = g_add(
                    self.group.element(existing)?,
                    self.group.element(canonical)?,
                )?;
                if sum.is_zero() {
                    self.entries.remove(&term);
                } else {
                    self.entries.insert(term, sum.value());
                }
            }
        }
        Ok(())
    }

    pub fn group(&self) -> CyclicGroup {
        self.group
    }

    pub fn is_zero(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn coeff(&self, term: &Term) -> i128 {
        self.entries.get(term).copied().unwrap_or(0)
    }

    pub fn support(&self) -> impl Iterator<Item = &Term> {
        self.entries.keys()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Term, i128)> {
        self.entries.iter().map(|(t, c)| (t, *c))
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Monomial or empty.
    pub fn is_simple(&self) -> bool {
        self.entries.len() <= 1
    }

    /// All coefficients strictly positive (meaningful over the integers).
    pub fn is_semi_positive(&self) -> bool {
        self.entries.values().all(|c| *c > 0)
    }

    pub fn is_ground(&self) -> bool {
        self.entries.keys().all(Term::is_ground)
    }

    /// Total coefficient mass, for token counting.
    pub fn total(&self) -> i128 {
        self.entries.values().sum()
    }
}

impl fmt::Display for Polynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.entries.is_empty() {
            return write!(f, "0");
        }
        for (i, (term, coeff)) in self.entries.iter().enumerate() {
            if i == 0 {
                if *coeff < 0 {
                    write!(f, "-")?;
                }
            } else if *coeff < 0 {
                write!(f, " - ")?;
            } else {
                write!(f, " + ")?;
            }
            let mag = coeff.unsigned_abs();
            if mag == 1 {
                write!(f, "{}", term)?;
            } else {
                write!(f, "{}*{}", mag, term)?;
            }
        }
        Ok(())
    }
}

pub fn poly_add(p1: &Polynomial, p2: &Polynomial) -> Result<Polynomial, PolyError> {
    if p1.group != p2.group {
        return Err(GroupError::Mismatch(p1.group, p2.group).into());
    }
    let mut out = p1.clone();
    for (term, coeff) in p2.iter() {
        out.add_term(term.clone(), coeff)?;
    }
    Ok(out)
}

pub fn poly_neg(p: &Polynomial) -> Result<Polynomial, PolyError> {
    poly_scalar(-1, p)
}

pub fn poly_scalar(z: i128, p: &Polynomial) -> Result<Polynomial, PolyError> {
    let mut out = Polynomial::zero(p.group);
    for (term, coeff) in p.iter() {
        let scaled = scalar_mul(z, p.group.element(coeff)?)?;
        out.add_term(term.clone(), scaled.value())?;
    }
    Ok(out)
}

/// Cauchy product of a group polynomial with an integer-multiplicity
/// polynomial: every pair of monomials contributes the term product with
/// the scaled coefficient, re-aggregated.
pub fn cauchy_product(p1: &Polynomial, p2: &Polynomial) -> Result<Polynomial, PolyError> {
    if p2.group != CyclicGroup::Int {
        return Err(PolyError::NotIntegerMultiplicities(p2.group));
    }
    let mut out = Polynomial::zero(p1.group);
    for (m1, a) in p1.iter() {
        let a = p1.group.element(a)?;
        for (m2, z) in p2.iter() {
            let coeff = scalar_mul(z, a)?;
            out.add_term(term_product(m1, m2), coeff.value())?;
        }
    }
    Ok(out)
}

/// Applies a substitution to every support term, merging coefficients of
/// terms that collapse to the same image.
pub fn poly_substitute(p: &Polynomial, sigma: &Substitution) -> Result<Polynomial, PolyError> {
    let mut out = Polynomial::zero(p.group);
    for (term, coeff) in p.iter() {
        out.add_term(sigma.apply(term), coeff)?;
    }
    Ok(out)
}

/// A place-indexed family of polynomials over a shared group. Absent
/// entries are the empty polynomial.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct PVector {
    group: CyclicGroup,
    places: Vec<String>,
    entries: BTreeMap<String, Polynomial>,
}

impl PVector {
    pub fn zero(group: CyclicGroup, places: Vec<String>) -> PVector {
        PVector {
            group,
            places,
            entries: BTreeMap::new(),
        }
    }

    pub fn from_entries<I>(
        group: CyclicGroup,
        places: Vec<String>,
        entries: I,
    ) -> Result<PVector, PolyError>
    where
        I: IntoIterator<Item = (String, Polynomial)>,
    {
        let mut v = PVector::zero(group, places);
        for (place, poly) in entries {
            v.set(place, poly)?;
        }
        Ok(v)
    }

    pub fn set(&mut self, place: String, poly: Polynomial) -> Result<(), PolyError> {
        if poly.group != self.group {
            return Err(GroupError::Mismatch(self.group, poly.group).into());
        }
        if !self.places.contains(&place) {
            return Err(PolyError::UnknownPlace(place));
        }
        if poly.is_zero() {
            self.entries.remove(&place);
        } else {
            self.entries.insert(place, poly);
        }
        Ok(())
    }

    pub fn group(&self) -> CyclicGroup {
        self.group
    }

    pub fn places(&self) -> &[String] {
        &self.places
    }

    pub fn get(&self, place: &str) -> Option<&Polynomial> {
        self.entries.get(place)
    }

    /// Places with a nonempty entry, in place order.
    pub fn support_places(&self) -> impl Iterator<Item = &str> {
        self.places
            .iter()
            .filter(|p| self.entries.contains_key(*p))
            .map(String::as_str)
    }

    pub fn is_zero(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn is_simple(&self) -> bool {
        self.entries.values().all(Polynomial::is_simple)
    }

    pub fn is_semi_positive(&self) -> bool {
        self.entries.values().all(Polynomial::is_semi_positive)
    }

    /// A marking: integer coefficients, strictly positive, ground tokens.
    pub fn is_marking(&self) -> bool {
        self.group == CyclicGroup::Int
            && self.is_semi_positive()
            && self.entries.values().all(Polynomial::is_ground)
    }

    pub fn same_places(&self, other: &PVector) -> Result<(), PolyError> {
        if self.places != other.places {
            return Err(PolyError::PlaceMismatch(
                self.places.clone(),
                other.places.clone(),
            ));
        }
        Ok(())
    }
}

impl fmt::Display for PVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        let mut first = true;
        for place in &self.places {
            if let Some(poly) = self.entries.get(place) {
                if !first {
                    write!(f, ", ")?;
                }
                first = false;
                write!(f, "{}: {}", place, poly)?;
            }
        }
        write!(f, "}}")
    }
}

pub fn pvec_add(v1: &PVector, v2: &PVector) -> Result<PVector, PolyError> {
    v1.same_places(v2)?;
    let mut out = v1.clone();
    for (place, poly) in &v2.entries {
        let sum = match out.entries.get(place) {
            Some(existing) => poly_add(existing, poly)?,
            None => poly.clone(),
        };
        out.set(place.clone(), sum)?;
    }
    Ok(out)
}

pub fn pvec_scalar(z: i128, v: &PVector) -> Result<PVector, PolyError> {
    let mut out = PVector::zero(v.group, v.places.clone());
    for (place, poly) in &v.entries {
        out.set(place.clone(), poly_scalar(z, poly)?)?;
    }
    Ok(out)
}

pub fn pvec_substitute(v: &PVector, sigma: &Substitution) -> Result<PVector, PolyError> {
    let mut out = PVector::zero(v.group, v.places.clone());
    for (place, poly) in &v.entries {
        out.set(place.clone(), poly_substitute(poly, sigma)?)?;
    }
    Ok(out)
}

/// Dot product of a group vector with an integer-multiplicity vector:
/// the sum over places of the per-place Cauchy products.
pub fn pvec_dot(k: &PVector, v: &PVector) -> Result<Polynomial, PolyError> {
    k.same_places(v)?;
    let mut out = Polynomial::zero(k.group);
    for (place, kp) in &k.entries {
        if let Some(vp) = v.entries.get(place) {
            out = poly_add(&out, &cauchy_product(kp, vp)?)?;
        }
    }
    Ok(out)
}
