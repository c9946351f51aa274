//! The stability verdict: residual evaluation per derived substitution,
//! distinctness-preserving realizations, and counterexample markings.

use std::collections::{BTreeMap, BTreeSet};

use crate::equation::{satisfies, HomogeneousEquation};
use crate::net::{enabled, fire, Transition};
use crate::poly::{poly_substitute, pvec_dot, pvec_substitute, PVector, Polynomial};
use crate::stability::derive::{derive_substitutions, DerivedSubstitution};
use crate::stability::spanning::{minimize_spanning, spanning_set};
use crate::stability::zero::Zero;
use crate::stability::{standardized_kappa, StabilityError};
use crate::term::{match_term, term_product, Signature, Substitution, Term};

/// Outcome of the stability decision.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum StabilityVerdict {
    Stable,
    Unstable(Box<UnstableWitness>),
}

impl StabilityVerdict {
    pub fn is_stable(&self) -> bool {
        matches!(self, StabilityVerdict::Stable)
    }
}

/// A verified witness of instability: a derived substitution with nonzero
/// residual, a realization, and a satisfying marking whose successor
/// violates the equation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UnstableWitness {
    pub delta: DerivedSubstitution,
    /// The symbolic residual after applying delta to the dotted effect.
    pub residual: Polynomial,
    pub realization: Substitution,
    pub marking: PVector,
    pub successor: PVector,
    /// The nonzero value of the equation on the successor.
    pub violation: Polynomial,
}

/// Decides transition stability. Stable iff every substitution derivable
/// from a spanning set annihilates the dotted effect; otherwise packages a
/// verified counterexample for the first failing substitution in key order.
pub fn decide_stability(
    sig: &Signature,
    eq: &HomogeneousEquation,
    t: &Transition,
) -> Result<StabilityVerdict, StabilityError> {
    let set = minimize_spanning(&spanning_set(eq)?);
    let deltas = derive_substitutions(&set, t, eq)?;
    let kdot = pvec_dot(eq.vector(), &t.effect())?;

    let mut failing: Vec<(DerivedSubstitution, Polynomial)> = Vec::new();
    for d in deltas {
        let residual = poly_substitute(&kdot, d.delta())?;
        if !residual.is_zero() {
            failing.push((d, residual));
        }
    }
    if failing.is_empty() {
        return Ok(StabilityVerdict::Stable);
    }

    if sig.first_non_constant().is_none() {
        return decide_finite_terms(sig, eq, t, &failing);
    }

    let (d, residual) = &failing[0];
    let delta_effect = pvec_substitute(&t.effect(), d.delta())?;
    for spacing in 1..=50 {
        let (sigma, sigma_prime) = realize(sig, d, t, spacing)?;
        if !preserves_distinctness(&delta_effect, residual, &sigma_prime)? {
            continue;
        }
        let (marking, successor) = counterexample_marking(eq, t, d, &sigma, &sigma_prime)?;
        if !satisfies(&marking, eq)? || !enabled(&marking, t, &sigma)? {
            continue;
        }
        let violation = pvec_dot(eq.vector(), &successor)?;
        if violation.is_zero() {
            continue;
        }
        return Ok(StabilityVerdict::Unstable(Box::new(UnstableWitness {
            delta: d.clone(),
            residual: residual.clone(),
            realization: sigma,
            marking,
            successor,
            violation,
        })));
    }
    Err(StabilityError::ConstructionFailed(
        "no realization preserved distinctness".to_string(),
    ))
}

// With only constants in the signature the ground terms are finite, so a
// nonzero symbolic residual does not yet witness instability; evaluate
// every ground instantiation instead.
fn decide_finite_terms(
    sig: &Signature,
    eq: &HomogeneousEquation,
    t: &Transition,
    failing: &[(DerivedSubstitution, Polynomial)],
) -> Result<StabilityVerdict, StabilityError> {
    let constants: Vec<Term> = sig.constants().map(Term::constant).collect();
    for (d, residual) in failing {
        let free = free_variables(d, t, residual);
        let mut choice = vec![0usize; free.len()];
        loop {
            let sigma_prime = Substitution::from_bindings(
                free.iter()
                    .zip(&choice)
                    .map(|(v, i)| (v.clone(), constants[*i].clone())),
            );
            let instance = poly_substitute(residual, &sigma_prime)?;
            if !instance.is_zero() {
                let sigma = compose_realization(d, t, &sigma_prime);
                let (marking, successor) =
                    counterexample_marking(eq, t, d, &sigma, &sigma_prime)?;
                if satisfies(&marking, eq)? && enabled(&marking, t, &sigma)? {
                    let violation = pvec_dot(eq.vector(), &successor)?;
                    if !violation.is_zero() {
                        return Ok(StabilityVerdict::Unstable(Box::new(UnstableWitness {
                            delta: d.clone(),
                            residual: residual.clone(),
                            realization: sigma,
                            marking,
                            successor,
                            violation,
                        })));
                    }
                }
            }
            let mut i = 0;
            loop {
                if i == choice.len() {
                    break;
                }
                choice[i] += 1;
                if choice[i] < constants.len() {
                    break;
                }
                choice[i] = 0;
                i += 1;
            }
            if i == choice.len() {
                break;
            }
        }
    }
    Ok(StabilityVerdict::Stable)
}

// Variables needing a ground value: whatever remains free in the images
// of the transition's variables and of the per-place fresh variables.
fn free_variables(d: &DerivedSubstitution, t: &Transition, residual: &Polynomial) -> Vec<String> {
    let mut free: BTreeSet<String> = BTreeSet::new();
    for x in t.variables() {
        let image = d
            .delta()
            .get(&x)
            .cloned()
            .unwrap_or_else(|| Term::var(x.clone()));
        free.extend(image.variables());
    }
    for q in d.chosen().keys() {
        let x_q = d.fresh_var_for(q).expect("chosen place has fresh variable");
        let image = d
            .delta()
            .get(x_q)
            .cloned()
            .unwrap_or_else(|| Term::var(x_q));
        free.extend(image.variables());
    }
    for term in residual.support() {
        free.extend(term.variables());
    }
    free.into_iter().collect()
}

fn compose_realization(
    d: &DerivedSubstitution,
    t: &Transition,
    sigma_prime: &Substitution,
) -> Substitution {
    Substitution::from_bindings(t.variables().into_iter().map(|x| {
        let image = d
            .delta()
            .get(&x)
            .cloned()
            .unwrap_or_else(|| Term::var(x.clone()));
        (x, sigma_prime.apply(&image))
    }))
}

/// Builds a ground realization of the derived substitution: free variables
/// receive tower terms of pairwise distinct depths, spaced apart to avoid
/// collisions between instantiated support terms.
pub fn realize(
    sig: &Signature,
    d: &DerivedSubstitution,
    t: &Transition,
    spacing: usize,
) -> Result<(Substitution, Substitution), StabilityError> {
    // The residual's variables are a subset of the image variables, so an
    // empty polynomial loses nothing here.
    let free = free_variables(d, t, &Polynomial::zero(crate::group::CyclicGroup::Int));
    let sigma_prime = Substitution::from_bindings(
        free
            .iter()
            .enumerate()
            .map(|(i, v)| (v.clone(), ground_tower(sig, (i + 1) * spacing))),
    );
    let sigma = compose_realization(d, t, &sigma_prime);
    Ok((sigma, sigma_prime))
}

// The constant wrapped in `depth` layers of the first non-constant symbol,
// extra argument slots filled with the constant.
fn ground_tower(sig: &Signature, depth: usize) -> Term {
    let constant = Term::constant(
        sig.constants()
            .next()
            .expect("signature has a constant")
            .to_string(),
    );
    let Some((wrap, arity)) = sig.first_non_constant() else {
        return constant;
    };
    let mut term = constant.clone();
    for _ in 0..depth {
        let mut args = vec![term];
        args.extend(std::iter::repeat(constant.clone()).take(arity - 1));
        term = Term::app(wrap.to_string(), args);
    }
    term
}

// Distinct support terms must stay distinct after grounding, both in the
// substituted effect and in the residual; distinct residual monomials then
// cannot cancel, keeping the violation nonzero.
fn preserves_distinctness(
    delta_effect: &PVector,
    residual: &Polynomial,
    sigma_prime: &Substitution,
) -> Result<bool, StabilityError> {
    let mut families: Vec<Vec<&Term>> = vec![residual.support().collect()];
    for place in delta_effect.support_places() {
        let poly = delta_effect.get(place).expect("support place has entry");
        families.push(poly.support().collect());
    }
    for family in families {
        let mut seen = BTreeSet::new();
        for term in family {
            if !seen.insert(sigma_prime.apply(term)) {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// Materializes a satisfying marking that enables the transition in the
/// realized mode: scaled implementations of the chosen zeros for the
/// constrained pre-places, plus the literal consume tokens elsewhere.
pub fn counterexample_marking(
    eq: &HomogeneousEquation,
    t: &Transition,
    d: &DerivedSubstitution,
    sigma: &Substitution,
    sigma_prime: &Substitution,
) -> Result<(PVector, PVector), StabilityError> {
    let places = eq.vector().places().to_vec();
    let mut tokens: BTreeMap<String, BTreeMap<Term, i128>> = BTreeMap::new();
    let mut add = |place: &str, token: Term, count: i128| {
        *tokens
            .entry(place.to_string())
            .or_default()
            .entry(token)
            .or_insert(0) += count;
    };

    for (q, zero) in d.chosen() {
        let x_q = d.fresh_var_for(q).expect("chosen place has fresh variable");
        let x_image = d
            .delta()
            .get(x_q)
            .cloned()
            .unwrap_or_else(|| Term::var(x_q));
        // The common ground product of this implementation's tokens.
        let seed = sigma_prime.apply(&x_image);

        let consume = t.consume().get(q).expect("chosen place is in the preset");
        let (theta, mult) = consume.iter().next().expect("consume entry is a monomial");

        for (p, n) in zero.counts() {
            let token = if p == q {
                sigma.apply(theta)
            } else {
                implementation_token(eq, zero, p, &seed)?
            };
            add(p, token, (*n as i128) * mult);
        }
    }

    // Unconstrained pre-places: supply the consumed tokens directly; they
    // carry no coefficient and cannot disturb satisfaction.
    for q in t.preset() {
        if d.chosen().contains_key(&q) || eq.monomial(&q).is_some() {
            continue;
        }
        let consume = t.consume().get(&q).expect("preset place has consume entry");
        for (theta, mult) in consume.iter() {
            add(&q, sigma.apply(theta), mult);
        }
    }

    let mut marking = PVector::zero(crate::group::CyclicGroup::Int, places);
    for (place, entry) in tokens {
        marking.set(
            place,
            Polynomial::from_entries(crate::group::CyclicGroup::Int, entry)?,
        )?;
    }
    let successor = fire(&marking, t, sigma)?;
    Ok((marking, successor))
}

// A token for a non-consumed active place of a zero: the place pattern's
// variable image under the zero's unifier, with its remaining variables
// replaced by the seed term.
fn implementation_token(
    eq: &HomogeneousEquation,
    zero: &Zero,
    place: &str,
    seed: &Term,
) -> Result<Term, StabilityError> {
    let kappa = standardized_kappa(eq, place).expect("active place has pattern");
    let vars: Vec<String> = kappa.variables().into_iter().collect();
    if vars.is_empty() {
        // Ground pattern: the token itself is arbitrary.
        return Ok(seed.clone());
    }
    let mut token: Option<Term> = None;
    for v in vars {
        let image = zero
            .mgu()
            .get(&v)
            .cloned()
            .unwrap_or_else(|| Term::var(v.clone()));
        let candidate = term_product(&image, seed);
        match &token {
            None => token = Some(candidate),
            Some(existing) if *existing != candidate => {
                return Err(StabilityError::AmbiguousPattern {
                    place: place.to_string(),
                })
            }
            _ => {}
        }
    }
    Ok(token.expect("at least one variable"))
}

/// Checks that the marking realizes the zero's counts up to one uniform
/// positive integer factor, with all tokens projecting onto a common
/// ground product matched by the zero's unification result.
pub fn check_implements(
    m: &PVector,
    zero: &Zero,
    eq: &HomogeneousEquation,
) -> Result<bool, StabilityError> {
    let mut scale: Option<i128> = None;
    for p in eq.constrained_places() {
        let have = m.get(&p).map(Polynomial::total).unwrap_or(0);
        let want = zero.count(&p) as i128;
        if want == 0 {
            if have != 0 {
                return Ok(false);
            }
            continue;
        }
        if have < want || have % want != 0 {
            return Ok(false);
        }
        let c = have / want;
        match scale {
            None => scale = Some(c),
            Some(s) if s != c => return Ok(false),
            _ => {}
        }
    }
    let Some(rho) = zero.result() else {
        // Trivial zero: constrained places must be empty, checked above.
        return Ok(true);
    };
    debug_assert!(scale.is_some());

    let mut omega: Option<Term> = None;
    for (p, _) in zero.counts() {
        let kappa = standardized_kappa(eq, p).expect("active place has pattern");
        let poly = m.get(p).expect("counts were verified nonzero");
        let mut products: BTreeSet<Term> =
            poly.support().map(|theta| term_product(&kappa, theta)).collect();
        if products.len() != 1 {
            return Ok(false);
        }
        let w = products.pop_first().expect("singleton");
        match &omega {
            None => omega = Some(w),
            Some(o) if *o != w => return Ok(false),
            _ => {}
        }
    }
    let omega = omega.expect("nontrivial zero has an active place");
    Ok(match_term(rho, &omega).is_some())
}

/// Result of splitting a satisfying marking into zero implementations.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Decomposition {
    NotSatisfying,
    /// Implementation parts grouped by common ground product, followed by
    /// the remainder on unconstrained places paired with the trivial zero.
    Parts(Vec<(Zero, PVector)>),
}

/// Splits a satisfying marking into implementations of zeros, grouping
/// constrained tokens by their ground product with the place pattern.
pub fn decompose_marking(
    m: &PVector,
    eq: &HomogeneousEquation,
) -> Result<Decomposition, StabilityError> {
    if !satisfies(m, eq)? {
        return Ok(Decomposition::NotSatisfying);
    }
    let places = m.places().to_vec();
    let constrained: BTreeSet<String> = eq.constrained_places().into_iter().collect();

    let mut groups: BTreeMap<Term, (BTreeMap<String, u64>, BTreeMap<String, Vec<(Term, i128)>>)> =
        BTreeMap::new();
    let mut remainder: Vec<(String, Polynomial)> = Vec::new();
    for place in m.support_places() {
        let poly = m.get(place).expect("support place has entry");
        if !constrained.contains(place) {
            remainder.push((place.to_string(), poly.clone()));
            continue;
        }
        let kappa = standardized_kappa(eq, place).expect("constrained place has pattern");
        for (theta, count) in poly.iter() {
            let omega = term_product(&kappa, theta);
            let (counts, parts) = groups.entry(omega).or_default();
            *counts.entry(place.to_string()).or_insert(0) += count as u64;
            parts
                .entry(place.to_string())
                .or_default()
                .push((theta.clone(), count));
        }
    }

    let mut out = Vec::new();
    for (omega, (counts, parts)) in groups {
        let check = crate::stability::check_zero(&counts, eq)?;
        let zero = check.into_zero().ok_or_else(|| {
            StabilityError::ConstructionFailed(format!(
                "token group at {} does not form a zero",
                omega
            ))
        })?;
        let mut part = PVector::zero(crate::group::CyclicGroup::Int, places.clone());
        for (place, entries) in parts {
            part.set(
                place,
                Polynomial::from_entries(crate::group::CyclicGroup::Int, entries)?,
            )?;
        }
        out.push((zero, part));
    }

    let mut rest = PVector::zero(crate::group::CyclicGroup::Int, places);
    for (place, poly) in remainder {
        rest.set(place, poly)?;
    }
    out.push((Zero::trivial(), rest));
    Ok(Decomposition::Parts(out))
}
