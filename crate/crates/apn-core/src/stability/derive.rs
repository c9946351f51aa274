//! Substitutions derived from a spanning set: abstract descriptions of
//! every firing mode enabled by some satisfying marking.

use std::collections::{BTreeMap, BTreeSet};

use crate::equation::HomogeneousEquation;
use crate::net::Transition;
use crate::stability::spanning::SpanningSet;
use crate::stability::zero::Zero;
use crate::stability::StabilityError;
use crate::term::{fresh_var, term_product, Substitution, Term};
use crate::unify::unify;

/// A most general unifier matching chosen zeros' results against the
/// transition's consume terms, together with the choices that produced it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DerivedSubstitution {
    delta: Substitution,
    // Pre-place -> the zero chosen for it (constrained pre-places only).
    chosen: BTreeMap<String, Zero>,
    // Pre-place -> its fresh variable name.
    fresh: BTreeMap<String, String>,
    key: String,
}

impl DerivedSubstitution {
    pub fn delta(&self) -> &Substitution {
        &self.delta
    }

    pub fn chosen(&self) -> &BTreeMap<String, Zero> {
        &self.chosen
    }

    pub fn fresh_var_for(&self, place: &str) -> Option<&str> {
        self.fresh.get(place).map(String::as_str)
    }

    /// Canonical form of the substitution restricted to the transition's
    /// variables; equal keys mean interchangeable substitutions.
    pub fn key(&self) -> &str {
        &self.key
    }

    pub fn identity() -> DerivedSubstitution {
        DerivedSubstitution {
            delta: Substitution::empty(),
            chosen: BTreeMap::new(),
            fresh: BTreeMap::new(),
            key: String::new(),
        }
    }
}

// Formats delta restricted to the transition's variables, renaming the
// remaining free variables to "%0", "%1", ... in order of first
// occurrence. A binding to a lone fresh variable is a pure renaming, so
// it is dropped unless that variable links several bindings.
fn dedup_key(delta: &Substitution, tvars: &BTreeSet<String>) -> String {
    let restricted: Vec<(&String, &Term)> = tvars
        .iter()
        .filter_map(|var| delta.get(var).map(|image| (var, image)))
        .collect();
    let mut occurrences: BTreeMap<String, usize> = BTreeMap::new();
    for (_, image) in &restricted {
        for v in image.variables() {
            if !tvars.contains(&v) {
                *occurrences.entry(v).or_insert(0) += 1;
            }
        }
    }
    let mut renaming: BTreeMap<String, String> = BTreeMap::new();
    let mut parts = Vec::new();
    for (var, image) in restricted {
        if let Term::Var(v) = image {
            if !tvars.contains(v) && occurrences.get(v) == Some(&1) {
                continue;
            }
        }
        let canonical = canonicalize(image, tvars, &mut renaming);
        parts.push(format!("{}:={}", var, canonical));
    }
    parts.join(";")
}

fn canonicalize(
    term: &Term,
    tvars: &BTreeSet<String>,
    renaming: &mut BTreeMap<String, String>,
) -> Term {
    match term {
        Term::Var(v) => {
            if tvars.contains(v) {
                term.clone()
            } else {
                let next = format!("%{}", renaming.len());
                Term::Var(renaming.entry(v.clone()).or_insert(next).clone())
            }
        }
        Term::App(f, args) => Term::App(
            f.clone(),
            args.iter()
                .map(|a| canonicalize(a, tvars, renaming))
                .collect(),
        ),
    }
}

/// All substitutions derivable from the spanning set for the transition,
/// deduplicated up to renaming of non-transition variables and sorted by
/// their canonical key.
pub fn derive_substitutions(
    set: &SpanningSet,
    t: &Transition,
    eq: &HomogeneousEquation,
) -> Result<Vec<DerivedSubstitution>, StabilityError> {
    let tvars = t.variables();

    // Constrained pre-places in place order; unconstrained pre-places put
    // no requirement on satisfying markings and contribute no equation.
    let preset = t.preset();
    let constrained_pre: Vec<String> = eq
        .vector()
        .places()
        .iter()
        .filter(|p| preset.contains(*p) && eq.monomial(p).is_some())
        .cloned()
        .collect();

    if constrained_pre.is_empty() {
        return Ok(vec![DerivedSubstitution::identity()]);
    }

    // Candidate zeros per place, one representative per collapsed result:
    // zeros whose results differ only in variable names produce the same
    // constraint.
    let mut candidates: Vec<Vec<&Zero>> = Vec::new();
    for q in &constrained_pre {
        let mut seen: BTreeSet<Term> = BTreeSet::new();
        let mut reps = Vec::new();
        for z in set.members_at(q) {
            let shape = z.collapsed_result().expect("nontrivial zero has result");
            if seen.insert(shape) {
                reps.push(z);
            }
        }
        if reps.is_empty() {
            // No zero supplies tokens on q: no satisfying marking enables
            // t, so nothing is derivable.
            return Ok(Vec::new());
        }
        candidates.push(reps);
    }

    let mut out: Vec<DerivedSubstitution> = Vec::new();
    let mut seen_keys: BTreeSet<String> = BTreeSet::new();
    let mut choice = vec![0usize; constrained_pre.len()];
    loop {
        let mut pairs = Vec::new();
        let mut chosen = BTreeMap::new();
        let mut fresh = BTreeMap::new();
        for (i, q) in constrained_pre.iter().enumerate() {
            let zero = candidates[i][choice[i]];
            let x_q = fresh_var(i);
            let rho = zero.result().expect("nontrivial zero has result");
            let kappa = crate::stability::standardized_kappa(eq, q)
                .expect("constrained place has term");
            let theta = t
                .consume()
                .get(q)
                .and_then(|p| p.support().next())
                .expect("pre-place has consume term")
                .clone();
            pairs.push((
                term_product(rho, &Term::var(x_q.clone())),
                term_product(&kappa, &theta),
            ));
            chosen.insert(q.clone(), zero.clone());
            fresh.insert(q.clone(), x_q);
        }

        if let Ok(delta) = unify(&pairs) {
            let key = dedup_key(&delta, &tvars);
            if seen_keys.insert(key.clone()) {
                out.push(DerivedSubstitution {
                    delta,
                    chosen,
                    fresh,
                    key,
                });
            }
        }

        // Advance the mixed-radix choice vector.
        let mut i = 0;
        loop {
            if i == choice.len() {
                out.sort_by(|a, b| a.key.cmp(&b.key));
                return Ok(out);
            }
            choice[i] += 1;
            if choice[i] < candidates[i].len() {
                break;
            }
            choice[i] = 0;
            i += 1;
        }
    }
}
