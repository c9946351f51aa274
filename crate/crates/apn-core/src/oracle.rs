//! Brute-force oracles at desk scale: ground-term enumeration, exhaustive
//! zero search, direct stability counterexample search, and bounded
//! reachability. Ground truth for the decision procedure.

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use thiserror::Error;

use crate::equation::{satisfies, EquationError, HomogeneousEquation};
use crate::net::{fire, Net, NetError, Transition};
use crate::poly::{pvec_add, pvec_dot, pvec_substitute, PVector, PolyError, Polynomial};
use crate::stability::{check_zero, standardized_kappa, StabilityError, Zero};
use crate::term::{match_term, Signature, Substitution, Term};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum OracleError {
    #[error(transparent)]
    Poly(#[from] PolyError),
    #[error(transparent)]
    Equation(#[from] EquationError),
    #[error(transparent)]
    Net(#[from] NetError),
    #[error(transparent)]
    Stability(#[from] StabilityError),
}

/// Search limits. The candidate cap is a hard stop surfacing as an
/// explicit Exhausted outcome, never as silent truncation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Bounds {
    pub term_depth: usize,
    pub tokens_per_place: u64,
    pub search_depth: usize,
    pub candidate_cap: usize,
}

impl Default for Bounds {
    fn default() -> Bounds {
        Bounds {
            term_depth: 2,
            tokens_per_place: 6,
            search_depth: 6,
            candidate_cap: 1_000_000,
        }
    }
}

/// All ground terms of depth at most `depth`, in depth-level order and
/// structurally sorted within each level.
pub fn enumerate_ground_terms(sig: &Signature, depth: usize) -> Vec<Term> {
    let mut levels: Vec<Vec<Term>> = vec![sig.constants().map(Term::constant).collect()];
    levels[0].sort();
    let mut all: Vec<Term> = levels[0].clone();
    for d in 1..=depth {
        let mut level: Vec<Term> = Vec::new();
        let shallower: Vec<Term> = all.clone();
        for (symbol, arity) in sig.symbols() {
            if *arity == 0 {
                continue;
            }
            // Argument tuples over already-built terms, at least one from
            // the deepest previous level, give exactly the next level.
            // Term::depth counts a constant as 1, hence the comparison
            // against d rather than d - 1.
            let mut choice = vec![0usize; *arity];
            loop {
                let args: Vec<Term> =
                    choice.iter().map(|i| shallower[*i].clone()).collect();
                if args.iter().map(Term::depth).max() == Some(d) {
                    level.push(Term::app(symbol.to_string(), args));
                }
                let mut i = 0;
                loop {
                    if i == choice.len() {
                        break;
                    }
                    choice[i] += 1;
                    if choice[i] < shallower.len() {
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
        level.sort();
        level.dedup();
        all.extend(level.iter().cloned());
        levels.push(level);
    }
    all
}

/// Outcome of a bounded exhaustive search.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Exhaustible<T> {
    Done(T),
    /// The candidate cap was hit before the search space was covered.
    Exhausted,
}

/// All zeros with total count at most `sum_bound`, by direct enumeration
/// of count vectors. No spanning shortcut: this is the reference search.
pub fn brute_zeros(
    eq: &HomogeneousEquation,
    sum_bound: u64,
    bounds: &Bounds,
) -> Result<Exhaustible<Vec<Zero>>, OracleError> {
    let constrained = eq.constrained_places();
    let mut out = Vec::new();
    let mut counts = vec![0u64; constrained.len()];
    let mut explored = 0usize;
    loop {
        explored += 1;
        if explored > bounds.candidate_cap {
            return Ok(Exhaustible::Exhausted);
        }
        let nu: BTreeMap<String, u64> = constrained
            .iter()
            .cloned()
            .zip(counts.iter().copied())
            .filter(|(_, n)| *n > 0)
            .collect();
        if let Some(zero) = check_zero(&nu, eq)?.into_zero() {
            out.push(zero);
        }
        // Advance to the next count vector with total <= sum_bound.
        let mut i = 0;
        loop {
            if i == counts.len() {
                return Ok(Exhaustible::Done(out));
            }
            counts[i] += 1;
            if counts.iter().sum::<u64>() <= sum_bound {
                break;
            }
            counts[i] = 0;
            i += 1;
        }
    }
}

/// A concrete stability violation found by search.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BruteWitness {
    pub marking: PVector,
    pub mode: Substitution,
    pub successor: PVector,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum BruteStability {
    NoCounterexampleWithinBounds,
    Counterexample(Box<BruteWitness>),
    Exhausted,
}

/// Direct search over the stability definition: enumerate ground modes,
/// and for each mode with a nonzero equation residual try to complete the
/// consumed tokens into a satisfying marking within the token bounds.
///
/// Completeness at the given bounds: a satisfying superset of the consumed
/// tokens exists iff one exists whose extra tokens contribute only to the
/// monomials the consumed tokens leave uncancelled (token groups summing
/// to zero elsewhere can be dropped), so the per-monomial exact search
/// below misses nothing expressible within the token bounds.
pub fn brute_stability(
    sig: &Signature,
    eq: &HomogeneousEquation,
    t: &Transition,
    bounds: &Bounds,
) -> Result<BruteStability, OracleError> {
    let terms = enumerate_ground_terms(sig, bounds.term_depth);
    let vars: Vec<String> = t.variables().into_iter().collect();
    let kdot = pvec_dot(eq.vector(), &t.effect())?;

    let mut budget = bounds.candidate_cap;
    let mut choice = vec![0usize; vars.len()];
    loop {
        if budget == 0 {
            return Ok(BruteStability::Exhausted);
        }
        budget -= 1;
        let sigma = Substitution::from_bindings(
            vars.iter()
                .zip(&choice)
                .map(|(v, i)| (v.clone(), terms[*i].clone())),
        );
        let residual = crate::poly::poly_substitute(&kdot, &sigma)?;
        if !residual.is_zero() {
            let base = pvec_substitute(t.consume(), &sigma)?;
            if let Some(marking) = complete_to_satisfying(eq, &base, bounds, &mut budget)? {
                if satisfies(&marking, eq)? {
                    let successor = fire(&marking, t, &sigma)?;
                    if !satisfies(&successor, eq)? {
                        return Ok(BruteStability::Counterexample(Box::new(BruteWitness {
                            marking,
                            mode: sigma,
                            successor,
                        })));
                    }
                }
            }
            if budget == 0 {
                return Ok(BruteStability::Exhausted);
            }
        }
        let mut i = 0;
        loop {
            if i == choice.len() {
                return Ok(BruteStability::NoCounterexampleWithinBounds);
            }
            choice[i] += 1;
            if choice[i] < terms.len() {
                break;
            }
            choice[i] = 0;
            i += 1;
        }
    }
}

// Finds the least extra tokens turning `base` into a satisfying marking,
// respecting the per-place token bound. Works monomial by monomial: each
// uncancelled ground product must be brought to zero by tokens whose own
// product equals it, since distinct ground products cannot cancel.
fn complete_to_satisfying(
    eq: &HomogeneousEquation,
    base: &PVector,
    bounds: &Bounds,
    budget: &mut usize,
) -> Result<Option<PVector>, OracleError> {
    let needed = {
        let value = pvec_dot(eq.vector(), base)?;
        crate::poly::poly_neg(&value)?
    };
    let constrained = eq.constrained_places();

    // Remaining capacity per constrained place after the base tokens.
    let mut capacity: BTreeMap<String, u64> = BTreeMap::new();
    for p in &constrained {
        let used = base.get(p).map(Polynomial::total).unwrap_or(0);
        if used > bounds.tokens_per_place as i128 {
            return Ok(None);
        }
        capacity.insert(p.clone(), bounds.tokens_per_place - used as u64);
    }

    let omegas: Vec<(Term, i128)> = needed.iter().map(|(t, c)| (t.clone(), c)).collect();
    // Per monomial, the places that can contribute to it with a token.
    let mut options: Vec<Vec<(String, Term, i128)>> = Vec::new();
    for (omega, _) in &omegas {
        let mut opts = Vec::new();
        for p in &constrained {
            let (_, gamma) = eq.monomial(p).expect("constrained place has monomial");
            if let Some(token) = token_with_product(eq, p, omega) {
                opts.push((p.clone(), token, gamma.value()));
            }
        }
        options.push(opts);
    }

    let mut extra: Vec<(String, Term, u64)> = Vec::new();
    if !solve_monomials(eq, &omegas, &options, 0, &mut capacity, &mut extra, budget) {
        return Ok(None);
    }
    let mut add = PVector::zero(base.group(), base.places().to_vec());
    for (place, token, n) in extra {
        let poly = pvec_entry(&add, &place, &token, n as i128)?;
        add.set(place, poly)?;
    }
    Ok(Some(pvec_add(base, &add)?))
}

fn pvec_entry(
    v: &PVector,
    place: &str,
    token: &Term,
    count: i128,
) -> Result<Polynomial, OracleError> {
    let mut entries: Vec<(Term, i128)> = v
        .get(place)
        .map(|p| p.iter().map(|(t, c)| (t.clone(), c)).collect())
        .unwrap_or_default();
    entries.push((token.clone(), count));
    Ok(Polynomial::from_entries(v.group(), entries)?)
}

// A ground token whose product with the place's pattern equals omega, if
// any: the pattern's variables must all match the same subterm.
fn token_with_product(eq: &HomogeneousEquation, place: &str, omega: &Term) -> Option<Term> {
    let kappa = standardized_kappa(eq, place).expect("constrained place has pattern");
    if kappa.is_ground() {
        // Any token works under a ground pattern; omega itself is a
        // convenient ground choice.
        return if &kappa == omega { Some(omega.clone()) } else { None };
    }
    let binding = match_term(&kappa, omega)?;
    let mut images = binding.iter().map(|(_, t)| t);
    let first = images.next()?.clone();
    if images.all(|t| *t == first) && first.is_ground() {
        Some(first)
    } else {
        None
    }
}

// Depth-first search over token counts, one monomial at a time: pick how
// many tokens each capable place contributes so the weighted sum hits the
// required coefficient, then recurse into the next monomial.
#[allow(clippy::too_many_arguments)]
fn solve_monomials(
    eq: &HomogeneousEquation,
    omegas: &[(Term, i128)],
    options: &[Vec<(String, Term, i128)>],
    index: usize,
    capacity: &mut BTreeMap<String, u64>,
    extra: &mut Vec<(String, Term, u64)>,
    budget: &mut usize,
) -> bool {
    if index == omegas.len() {
        return true;
    }
    let target = omegas[index].1;
    solve_one(
        eq, omegas, options, index, 0, target, capacity, extra, budget,
    )
}

#[allow(clippy::too_many_arguments)]
fn solve_one(
    eq: &HomogeneousEquation,
    omegas: &[(Term, i128)],
    options: &[Vec<(String, Term, i128)>],
    index: usize,
    opt: usize,
    remaining: i128,
    capacity: &mut BTreeMap<String, u64>,
    extra: &mut Vec<(String, Term, u64)>,
    budget: &mut usize,
) -> bool {
    if *budget == 0 {
        return false;
    }
    *budget -= 1;
    let group = eq.group();
    if opt == options[index].len() {
        let settled = group.canon(remaining).expect("canon of small value");
        return settled == 0
            && solve_monomials(eq, omegas, options, index + 1, capacity, extra, budget);
    }
    let (place, token, gamma) = &options[index][opt];
    let cap = *capacity.get(place).expect("constrained place has capacity");
    for n in 0..=cap {
        let rest = remaining - (n as i128) * gamma;
        *capacity.get_mut(place).expect("present") = cap - n;
        if n > 0 {
            extra.push((place.clone(), token.clone(), n));
        }
        if solve_one(
            eq, omegas, options, index, opt + 1, rest, capacity, extra, budget,
        ) {
            return true;
        }
        if n > 0 {
            extra.pop();
        }
        *capacity.get_mut(place).expect("present") = cap;
    }
    false
}

/// Outcome of the bounded reachability search.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Reachability {
    HoldsUpToBound,
    ViolatedAt {
        run: Vec<(String, Substitution)>,
        marking: PVector,
    },
    Exhausted,
}

/// Breadth-first search over reachable markings with modes drawn from the
/// enumerated ground terms, reporting the first marking violating the
/// equation together with the run that reaches it.
pub fn bounded_reachability(
    net: &Net,
    eq: &HomogeneousEquation,
    bounds: &Bounds,
) -> Result<Reachability, OracleError> {
    let terms = enumerate_ground_terms(net.structure().signature(), bounds.term_depth);
    let mut visited: BTreeSet<PVector> = BTreeSet::new();
    let mut frontier: VecDeque<(PVector, Vec<(String, Substitution)>, usize)> = VecDeque::new();
    frontier.push_back((net.initial().clone(), Vec::new(), 0));
    visited.insert(net.initial().clone());
    let mut budget = bounds.candidate_cap;

    while let Some((marking, run, depth)) = frontier.pop_front() {
        if !satisfies(&marking, eq)? {
            return Ok(Reachability::ViolatedAt { run, marking });
        }
        if depth == bounds.search_depth {
            continue;
        }
        for t in net.structure().transitions() {
            let vars: Vec<String> = t.variables().into_iter().collect();
            let mut choice = vec![0usize; vars.len()];
            loop {
                if budget == 0 {
                    return Ok(Reachability::Exhausted);
                }
                budget -= 1;
                let sigma = Substitution::from_bindings(
                    vars.iter()
                        .zip(&choice)
                        .map(|(v, i)| (v.clone(), terms[*i].clone())),
                );
                if let Ok(next) = fire(&marking, t, &sigma) {
                    if visited.insert(next.clone()) {
                        let mut next_run = run.clone();
                        next_run.push((t.name().to_string(), sigma.clone()));
                        frontier.push_back((next, next_run, depth + 1));
                    }
                }
                let mut i = 0;
                loop {
                    if i == choice.len() {
                        break;
                    }
                    choice[i] += 1;
                    if choice[i] < terms.len() {
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
    }
    Ok(Reachability::HoldsUpToBound)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group::CyclicGroup;
    use crate::net::{enabled, NetStructure};

    const Z: CyclicGroup = CyclicGroup::Int;

    fn f(arg: Term) -> Term {
        Term::app("f", vec![arg])
    }

    fn g(arg: Term) -> Term {
        Term::app("g", vec![arg])
    }

    fn c() -> Term {
        Term::constant("c")
    }

    fn sig() -> Signature {
        Signature::new(vec![("f".into(), 1), ("g".into(), 1), ("c".into(), 0)]).unwrap()
    }

    fn places() -> Vec<String> {
        ["A", "B", "C", "D", "E"].iter().map(|s| s.to_string()).collect()
    }

    fn pvector(group: CyclicGroup, entries: &[(&str, Term, i128)]) -> PVector {
        PVector::from_entries(
            group,
            places(),
            entries.iter().map(|(p, t, z)| {
                (
                    p.to_string(),
                    Polynomial::monomial(group, t.clone(), *z).unwrap(),
                )
            }),
        )
        .unwrap()
    }

    fn e1() -> HomogeneousEquation {
        HomogeneousEquation::new(
            "E1".to_string(),
            pvector(
                Z,
                &[
                    ("A", f(Term::var("x")), 4),
                    ("B", g(Term::var("x")), 3),
                    ("C", f(g(Term::var("x"))), -5),
                    ("D", Term::var("x"), -1),
                ],
            ),
        )
        .unwrap()
    }

    fn e2() -> HomogeneousEquation {
        let g7 = CyclicGroup::Mod(7);
        HomogeneousEquation::new(
            "E2".to_string(),
            pvector(g7, &[("A", c(), 3), ("D", Term::var("x"), 2)]),
        )
        .unwrap()
    }

    fn example_transition() -> Transition {
        Transition::new(
            "t".to_string(),
            pvector(
                Z,
                &[
                    ("A", g(Term::var("W")), 1),
                    ("B", f(Term::var("Y")), 1),
                    ("C", Term::var("W"), 1),
                    ("D", Term::var("Z"), 2),
                ],
            ),
            pvector(Z, &[("E", f(Term::var("W")), 1)]),
        )
        .unwrap()
    }

    #[test]
    fn ground_terms_by_depth() {
        let terms = enumerate_ground_terms(&sig(), 0);
        assert_eq!(terms, vec![c()]);
        let terms = enumerate_ground_terms(&sig(), 1);
        assert_eq!(terms, vec![c(), f(c()), g(c())]);
        let terms = enumerate_ground_terms(&sig(), 2);
        assert_eq!(terms.len(), 7);
        assert!(terms.contains(&f(g(c()))));
    }

    #[test]
    fn brute_zeros_recovers_the_zero_table() {
        let bounds = Bounds::default();
        let Exhaustible::Done(zeros) = brute_zeros(&e1(), 9, &bounds).unwrap() else {
            panic!("cap hit");
        };
        let counts: Vec<Vec<u64>> = zeros.iter().map(|z| z.count_vec(&places())).collect();
        assert!(counts.contains(&vec![0, 1, 0, 3, 0]));
        assert!(counts.contains(&vec![0, 2, 0, 6, 0]));
        assert!(counts.contains(&vec![5, 0, 4, 0, 0]));
        assert!(!counts.contains(&vec![2, 0, 0, 4, 0]));

        let Exhaustible::Done(zeros) = brute_zeros(&e2(), 6, &bounds).unwrap() else {
            panic!("cap hit");
        };
        let counts: Vec<Vec<u64>> = zeros.iter().map(|z| z.count_vec(&places())).collect();
        assert!(counts.contains(&vec![1, 0, 0, 2, 0]));
        assert!(counts.contains(&vec![2, 0, 0, 4, 0]));
    }

    #[test]
    fn all_positive_equation_has_only_the_trivial_zero() {
        let eq = HomogeneousEquation::new(
            "pos".to_string(),
            pvector(Z, &[("A", Term::var("x"), 1), ("B", Term::var("x"), 2)]),
        )
        .unwrap();
        let Exhaustible::Done(zeros) = brute_zeros(&eq, 8, &Bounds::default()).unwrap() else {
            panic!("cap hit");
        };
        assert_eq!(zeros.len(), 1);
        assert!(zeros[0].is_trivial());
    }

    #[test]
    fn brute_zeros_respects_the_candidate_cap() {
        let bounds = Bounds {
            candidate_cap: 3,
            ..Bounds::default()
        };
        assert_eq!(
            brute_zeros(&e1(), 9, &bounds).unwrap(),
            Exhaustible::Exhausted
        );
    }

    #[test]
    fn integer_equation_counterexample_found_within_small_bounds() {
        let eq = e1();
        let t = example_transition();
        let bounds = Bounds::default();
        let BruteStability::Counterexample(w) = brute_stability(&sig(), &eq, &t, &bounds).unwrap()
        else {
            panic!("expected counterexample");
        };
        assert!(w.marking.is_marking());
        assert!(satisfies(&w.marking, &eq).unwrap());
        assert!(enabled(&w.marking, &t, &w.mode).unwrap());
        assert_eq!(fire(&w.marking, &t, &w.mode).unwrap(), w.successor);
        assert!(!satisfies(&w.successor, &eq).unwrap());
    }

    #[test]
    fn modular_equation_has_no_counterexample_at_six_tokens() {
        // The cheapest violation needs seven same-shape tokens plus two
        // constants on one place, out of reach at six tokens per place.
        let verdict = brute_stability(&sig(), &e2(), &example_transition(), &Bounds::default())
            .unwrap();
        assert_eq!(verdict, BruteStability::NoCounterexampleWithinBounds);
    }

    #[test]
    fn modular_equation_counterexample_appears_at_nine_tokens() {
        let eq = e2();
        let t = example_transition();
        let bounds = Bounds {
            tokens_per_place: 9,
            ..Bounds::default()
        };
        let BruteStability::Counterexample(w) = brute_stability(&sig(), &eq, &t, &bounds).unwrap()
        else {
            panic!("expected counterexample");
        };
        assert!(satisfies(&w.marking, &eq).unwrap());
        assert!(!satisfies(&w.successor, &eq).unwrap());
        // The mode leaves D with a deficit the remaining tokens cannot
        // cancel mod 7.
        assert_ne!(w.mode.get("Z"), Some(&c()));
    }

    #[test]
    fn empty_effect_never_violates() {
        let t = Transition::new(
            "noop".to_string(),
            pvector(Z, &[("D", Term::var("X"), 1)]),
            pvector(Z, &[("D", Term::var("X"), 1)]),
        )
        .unwrap();
        let verdict =
            brute_stability(&sig(), &e1(), &t, &Bounds::default()).unwrap();
        assert_eq!(verdict, BruteStability::NoCounterexampleWithinBounds);
    }

    #[test]
    fn reachability_reports_initial_violation_with_empty_run() {
        let eq = HomogeneousEquation::new(
            "empty_a".to_string(),
            pvector(Z, &[("A", Term::var("x"), 1)]),
        )
        .unwrap();
        let structure = NetStructure::new(sig(), places(), vec![]).unwrap();
        let net = Net::new(structure, pvector(Z, &[("A", c(), 1)])).unwrap();
        let Reachability::ViolatedAt { run, marking } =
            bounded_reachability(&net, &eq, &Bounds::default()).unwrap()
        else {
            panic!("expected violation");
        };
        assert!(run.is_empty());
        assert_eq!(marking, pvector(Z, &[("A", c(), 1)]));
    }

    #[test]
    fn reachability_holds_for_the_stalled_example_net() {
        // The transition needs a token on B, which the initial marking
        // lacks and nothing produces: no step is ever enabled.
        let structure =
            NetStructure::new(sig(), places(), vec![example_transition()]).unwrap();
        let m4 = pvector(Z, &[("A", g(c()), 2), ("D", c(), 4)]);
        let net = Net::new(structure, m4).unwrap();
        let verdict = bounded_reachability(&net, &e2(), &Bounds::default()).unwrap();
        assert_eq!(verdict, Reachability::HoldsUpToBound);
    }

    #[test]
    fn reachability_follows_steps_to_a_violation() {
        // Moving the token off A violates the conservation equation on A
        // after exactly one step.
        let t = Transition::new(
            "move".to_string(),
            pvector(Z, &[("A", Term::var("X"), 1)]),
            pvector(Z, &[("E", Term::var("X"), 1)]),
        )
        .unwrap();
        let eq = HomogeneousEquation::new(
            "keep_a".to_string(),
            pvector(Z, &[("A", Term::var("x"), 1), ("B", Term::var("x"), -1)]),
        )
        .unwrap();
        let structure = NetStructure::new(sig(), places(), vec![t]).unwrap();
        let initial = pvector(Z, &[("A", c(), 1), ("B", c(), 1)]);
        let net = Net::new(structure, initial).unwrap();
        let Reachability::ViolatedAt { run, .. } =
            bounded_reachability(&net, &eq, &Bounds::default()).unwrap()
        else {
            panic!("expected violation");
        };
        assert_eq!(run.len(), 1);
        assert_eq!(run[0].0, "move");
    }
}
