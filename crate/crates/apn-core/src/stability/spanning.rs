//! Spanning sets of zeros: finite generating sets for all zeros of an
//! equation under pointwise addition.

use std::collections::{BTreeMap, BTreeSet};

use crate::equation::HomogeneousEquation;
use crate::group::CyclicGroup;
use crate::stability::{standardized_kappa, StabilityError};
use crate::stability::zero::Zero;
use crate::term::Term;
use crate::unify::unify;

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// A finite set of zeros spanning all zeros of the equation, together with
/// the enumeration bound that produced it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SpanningSet {
    zeros: Vec<Zero>,
    bound: u64,
    group: CyclicGroup,
    constrained: Vec<String>,
}

impl SpanningSet {
    pub fn zeros(&self) -> &[Zero] {
        &self.zeros
    }

    /// The enumeration bound: total-count cap over the integers, group
    /// order per place in the finite case.
    pub fn bound(&self) -> u64 {
        self.bound
    }

    pub fn group(&self) -> CyclicGroup {
        self.group
    }

    pub fn constrained_places(&self) -> &[String] {
        &self.constrained
    }

    pub fn len(&self) -> usize {
        self.zeros.len()
    }

    pub fn is_empty(&self) -> bool {
        self.zeros.is_empty()
    }

    pub fn contains_counts(&self, counts: &BTreeMap<String, u64>) -> bool {
        self.zeros.iter().any(|z| z.counts() == counts)
    }

    /// Nontrivial members with a token requirement at the given place.
    pub fn members_at(&self, place: &str) -> impl Iterator<Item = &Zero> {
        let place = place.to_string();
        self.zeros.iter().filter(move |z| z.count(&place) >= 1)
    }
}

struct Enumeration {
    // Constrained places with their canonical coefficient values.
    places: Vec<(String, i128)>,
    kappas: Vec<Term>,
    group: CyclicGroup,
    bound: u64,
}

fn enumeration(eq: &HomogeneousEquation) -> Result<Enumeration, StabilityError> {
    let group = eq.group();
    let mut places = Vec::new();
    let mut kappas = Vec::new();
    for p in eq.constrained_places() {
        let (_, gamma) = eq.monomial(&p).expect("constrained place has monomial");
        kappas.push(standardized_kappa(eq, &p).expect("constrained place has term"));
        places.push((p, gamma.value()));
    }
    let bound = match group {
        CyclicGroup::Int => {
            // Indecomposable zeros keep their total count below
            // 2 * |P| * (max positive) * (max negative magnitude).
            let pos = places.iter().map(|(_, g)| *g).filter(|g| *g > 0).max().unwrap_or(0);
            let neg = places
                .iter()
                .map(|(_, g)| -*g)
                .filter(|g| *g > 0)
                .max()
                .unwrap_or(0);
            let total_places = eq.vector().places().len() as i128;
            let bound = 2i128
                .checked_mul(total_places)
                .and_then(|b| b.checked_mul(pos))
                .and_then(|b| b.checked_mul(neg))
                .ok_or(StabilityError::BoundOverflow)?;
            u64::try_from(bound).map_err(|_| StabilityError::BoundOverflow)?
        }
        CyclicGroup::Mod(o) => o,
    };
    Ok(Enumeration {
        places,
        kappas,
        group,
        bound,
    })
}

// All zeros whose active places are exactly the given index subset,
// with positive counts per member. The subset's coefficient terms have
// already unified to `mgu`/`result`.
fn subset_zeros(
    ctx: &Enumeration,
    subset: &[usize],
    mgu: &crate::term::Substitution,
    result: &Term,
) -> Vec<Zero> {
    let mut out = Vec::new();
    let mut counts = vec![0u64; subset.len()];
    search(ctx, subset, 0, 0, 0, &mut counts, mgu, result, &mut out);
    out
}

#[allow(clippy::too_many_arguments)]
fn search(
    ctx: &Enumeration,
    subset: &[usize],
    idx: usize,
    weighted: i128,
    used: u64,
    counts: &mut Vec<u64>,
    mgu: &crate::term::Substitution,
    result: &Term,
    out: &mut Vec<Zero>,
) {
    let finite_order = match ctx.group {
        CyclicGroup::Int => None,
        CyclicGroup::Mod(o) => Some(o),
    };
    let remaining = subset.len() - idx;
    if remaining == 0 {
        unreachable!("last coordinate is solved directly");
    }
    let gamma = ctx.places[subset[idx]].1;

    if remaining == 1 {
        // Solve the final coordinate exactly instead of scanning it.
        match finite_order {
            None => {
                // weighted + n * gamma = 0 with 1 <= n <= capacity.
                if gamma != 0 && weighted % gamma == 0 {
                    let n = -weighted / gamma;
                    let capacity = (ctx.bound - used) as i128;
                    if n >= 1 && n <= capacity {
                        counts[idx] = n as u64;
                        out.push(make_zero(ctx, subset, counts, mgu, result));
                    }
                }
            }
            Some(o) => {
                for n in 1..=o {
                    let total = weighted + (n as i128) * gamma;
                    if total.rem_euclid(o as i128) == 0 {
                        counts[idx] = n;
                        out.push(make_zero(ctx, subset, counts, mgu, result));
                    }
                }
            }
        }
        return;
    }

    let rest = &subset[idx + 1..];
    let has_pos = rest.iter().any(|i| ctx.places[*i].1 > 0);
    let has_neg = rest.iter().any(|i| ctx.places[*i].1 < 0);
    let max_abs_rest = rest
        .iter()
        .map(|i| ctx.places[*i].1.unsigned_abs())
        .max()
        .unwrap_or(0) as i128;

    let max_n = match finite_order {
        // Leave at least one count for every remaining place.
        None => ctx.bound.saturating_sub(used + remaining as u64 - 1),
        Some(o) => o,
    };
    for n in 1..=max_n {
        let w = weighted + (n as i128) * gamma;
        if finite_order.is_none() {
            // Remaining places must be able to cancel w.
            if w > 0 && !has_neg {
                if gamma > 0 {
                    break;
                }
                continue;
            }
            if w < 0 && !has_pos {
                if gamma < 0 {
                    break;
                }
                continue;
            }
            let capacity = (ctx.bound - used - n) as i128;
            if w.abs() > capacity * max_abs_rest {
                if (gamma > 0) == (w > 0) {
                    break;
                }
                continue;
            }
        }
        counts[idx] = n;
        search(ctx, subset, idx + 1, w, used + n, counts, mgu, result, out);
    }
    counts[idx] = 0;
}

fn make_zero(
    ctx: &Enumeration,
    subset: &[usize],
    counts: &[u64],
    mgu: &crate::term::Substitution,
    result: &Term,
) -> Zero {
    let map: BTreeMap<String, u64> = subset
        .iter()
        .zip(counts)
        .map(|(i, n)| (ctx.places[*i].0.clone(), *n))
        .collect();
    Zero::assemble(map, mgu.clone(), Some(result.clone()))
}

fn unifiable_subsets(ctx: &Enumeration) -> Vec<(Vec<usize>, crate::term::Substitution, Term)> {
    let k = ctx.places.len();
    let mut out = Vec::new();
    // Nonempty subsets in bitmask order; skip any whose coefficient terms
    // do not unify (a clash there rules out every count choice at once).
    for mask in 1u64..(1u64 << k) {
        let subset: Vec<usize> = (0..k).filter(|i| mask & (1 << i) != 0).collect();
        let pairs: Vec<(Term, Term)> = subset
            .windows(2)
            .map(|w| (ctx.kappas[w[0]].clone(), ctx.kappas[w[1]].clone()))
            .collect();
        if let Ok(mgu) = unify(&pairs) {
            let result = mgu.apply(&ctx.kappas[subset[0]]);
            out.push((subset, mgu, result));
        }
    }
    out
}

fn assemble_set(eq: &HomogeneousEquation, ctx: Enumeration, mut zeros: Vec<Zero>) -> SpanningSet {
    zeros.push(Zero::trivial());
    let constrained: Vec<String> = eq.constrained_places();
    zeros.sort_by_key(|z| z.count_vec(&constrained));
    zeros.dedup_by(|a, b| a.counts() == b.counts());
    SpanningSet {
        zeros,
        bound: ctx.bound,
        group: ctx.group,
        constrained,
    }
}

/// Computes a finite spanning set of zeros by bounded enumeration,
/// processing active-place subsets in parallel when available.
#[cfg(feature = "parallel")]
pub fn spanning_set(eq: &HomogeneousEquation) -> Result<SpanningSet, StabilityError> {
    let ctx = enumeration(eq)?;
    let subsets = unifiable_subsets(&ctx);
    let zeros: Vec<Zero> = subsets
        .par_iter()
        .map(|(subset, mgu, result)| subset_zeros(&ctx, subset, mgu, result))
        .reduce(Vec::new, |mut acc, mut part| {
            acc.append(&mut part);
            acc
        });
    Ok(assemble_set(eq, ctx, zeros))
}

#[cfg(not(feature = "parallel"))]
pub fn spanning_set(eq: &HomogeneousEquation) -> Result<SpanningSet, StabilityError> {
    spanning_set_sequential(eq)
}

/// Single-threaded enumeration with identical results; the baseline for
/// benchmarking the parallel version.
pub fn spanning_set_sequential(eq: &HomogeneousEquation) -> Result<SpanningSet, StabilityError> {
    let ctx = enumeration(eq)?;
    let subsets = unifiable_subsets(&ctx);
    let mut zeros = Vec::new();
    for (subset, mgu, result) in &subsets {
        zeros.append(&mut subset_zeros(&ctx, subset, mgu, result));
    }
    Ok(assemble_set(eq, ctx, zeros))
}

/// Drops every member that is the sum of two nonzero members of the set,
/// witnessed constructively; the remainder still spans.
pub fn minimize_spanning(set: &SpanningSet) -> SpanningSet {
    let vectors: BTreeSet<Vec<u64>> = set
        .zeros
        .iter()
        .map(|z| z.count_vec(&set.constrained))
        .collect();
    let nonzero: Vec<Vec<u64>> = vectors
        .iter()
        .filter(|v| v.iter().any(|n| *n > 0))
        .cloned()
        .collect();

    let kept: Vec<Zero> = set
        .zeros
        .iter()
        .filter(|z| {
            let v = z.count_vec(&set.constrained);
            if v.iter().all(|n| *n == 0) {
                return true;
            }
            let decomposable = nonzero.iter().any(|v1| {
                if v1 == &v || v1.iter().zip(&v).any(|(a, b)| a > b) {
                    return false;
                }
                let rest: Vec<u64> = v.iter().zip(v1).map(|(a, b)| a - b).collect();
                rest.iter().any(|n| *n > 0) && vectors.contains(&rest)
            });
            !decomposable
        })
        .cloned()
        .collect();

    SpanningSet {
        zeros: kept,
        bound: set.bound,
        group: set.group,
        constrained: set.constrained.clone(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group::CyclicGroup;
    use crate::poly::{PVector, Polynomial};
    use crate::term::Term;

    const Z: CyclicGroup = CyclicGroup::Int;

    fn f(arg: Term) -> Term {
        Term::app("f", vec![arg])
    }

    fn g(arg: Term) -> Term {
        Term::app("g", vec![arg])
    }

    fn places() -> Vec<String> {
        ["A", "B", "C", "D", "E"].iter().map(|s| s.to_string()).collect()
    }

    fn e1() -> HomogeneousEquation {
        HomogeneousEquation::new(
            "E1".to_string(),
            PVector::from_entries(
                Z,
                places(),
                [
                    ("A".to_string(), Polynomial::monomial(Z, f(Term::var("x")), 4).unwrap()),
                    ("B".to_string(), Polynomial::monomial(Z, g(Term::var("x")), 3).unwrap()),
                    (
                        "C".to_string(),
                        Polynomial::monomial(Z, f(g(Term::var("x"))), -5).unwrap(),
                    ),
                    ("D".to_string(), Polynomial::monomial(Z, Term::var("x"), -1).unwrap()),
                ],
            )
            .unwrap(),
        )
        .unwrap()
    }

    fn e2() -> HomogeneousEquation {
        let g7 = CyclicGroup::Mod(7);
        HomogeneousEquation::new(
            "E2".to_string(),
            PVector::from_entries(
                g7,
                places(),
                [
                    (
                        "A".to_string(),
                        Polynomial::monomial(g7, Term::constant("c"), 3).unwrap(),
                    ),
                    ("D".to_string(), Polynomial::monomial(g7, Term::var("x"), 2).unwrap()),
                ],
            )
            .unwrap(),
        )
        .unwrap()
    }

    fn counts(entries: &[(&str, u64)]) -> BTreeMap<String, u64> {
        entries.iter().map(|(p, n)| (p.to_string(), *n)).collect()
    }

    #[test]
    fn bound_for_the_integer_equation() {
        let set = spanning_set(&e1()).unwrap();
        assert_eq!(set.bound(), 200);
        assert!(set.contains_counts(&counts(&[("B", 1), ("D", 3)])));
        assert!(set.contains_counts(&counts(&[("A", 5), ("C", 4)])));
        assert!(set.contains_counts(&counts(&[])));
        // Clashing subsets never appear.
        assert!(!set
            .zeros()
            .iter()
            .any(|z| z.count("A") > 0 && z.count("B") > 0));
    }

    #[test]
    fn sequential_enumeration_matches_parallel() {
        for eq in [e1(), e2()] {
            assert_eq!(spanning_set(&eq).unwrap(), spanning_set_sequential(&eq).unwrap());
        }
    }

    #[test]
    fn finite_group_uses_order_bound() {
        let set = spanning_set(&e2()).unwrap();
        assert_eq!(set.bound(), 7);
        assert!(set.contains_counts(&counts(&[("A", 1), ("D", 2)])));
        assert!(set.contains_counts(&counts(&[("A", 2), ("D", 4)])));
        // Single-place zeros from the group order.
        assert!(set.contains_counts(&counts(&[("A", 7)])));
        assert!(set.contains_counts(&counts(&[("D", 7)])));
        // Counts never exceed the order.
        assert!(set
            .zeros()
            .iter()
            .all(|z| z.counts().values().all(|n| *n <= 7)));
    }

    #[test]
    fn same_sign_equations_have_only_the_trivial_zero() {
        let eq = HomogeneousEquation::new(
            "pos".to_string(),
            PVector::from_entries(
                Z,
                places(),
                [
                    ("A".to_string(), Polynomial::monomial(Z, Term::var("x"), 2).unwrap()),
                    ("B".to_string(), Polynomial::monomial(Z, Term::var("x"), 3).unwrap()),
                ],
            )
            .unwrap(),
        )
        .unwrap();
        let set = spanning_set(&eq).unwrap();
        assert_eq!(set.bound(), 0);
        assert_eq!(set.len(), 1);
        assert!(set.zeros()[0].is_trivial());
    }

    #[test]
    fn every_member_passes_the_zero_check() {
        for eq in [e1(), e2()] {
            let set = spanning_set(&eq).unwrap();
            for z in set.zeros() {
                let check = crate::stability::check_zero(z.counts(), &eq).unwrap();
                let rechecked = check.into_zero().expect("member must be a zero");
                assert_eq!(rechecked.counts(), z.counts());
            }
        }
    }

    #[test]
    fn minimization_drops_doubled_zero() {
        let set = spanning_set(&e1()).unwrap();
        assert!(set.contains_counts(&counts(&[("B", 2), ("D", 6)])));
        let min = minimize_spanning(&set);
        assert!(!min.contains_counts(&counts(&[("B", 2), ("D", 6)])));
        assert!(min.contains_counts(&counts(&[("B", 1), ("D", 3)])));
        assert!(min.contains_counts(&counts(&[("A", 5), ("C", 4)])));
        assert!(min.contains_counts(&counts(&[])));
    }

    #[test]
    fn minimization_of_trivial_set_is_identity() {
        let eq = e2();
        let set = spanning_set(&eq).unwrap();
        let min = minimize_spanning(&set);
        assert!(min.contains_counts(&counts(&[])));
        assert!(min.len() <= set.len());
        // The doubled modular zero decomposes.
        assert!(!min.contains_counts(&counts(&[("A", 2), ("D", 4)])));
    }
}
