//! Property tests: algebraic laws on random inputs and agreement between
//! the decision procedure and the brute-force oracles.

use std::collections::BTreeSet;

use proptest::prelude::*;

use apn_core::equation::{invariant_check, satisfies};
use apn_core::gen::{random_equation, random_transition, rng_from_seed, small_signature};
use apn_core::group::{g_add, g_neg, CyclicGroup};
use apn_core::net::{enabled, fire};
use apn_core::oracle::{brute_stability, brute_zeros, Bounds, BruteStability, Exhaustible};
use apn_core::poly::{poly_substitute, pvec_dot, pvec_substitute, PVector, Polynomial};
use apn_core::stability::{
    decide_stability, spanning_set, spanning_set_sequential, StabilityVerdict,
};
use apn_core::term::{term_product, Substitution, Term};
use apn_core::unify::unify;

fn term_strategy() -> impl Strategy<Value = Term> {
    let leaf = prop_oneof![
        Just(Term::constant("c")),
        prop_oneof![Just("U"), Just("V"), Just("W")].prop_map(Term::var),
    ];
    leaf.prop_recursive(3, 12, 1, |inner| {
        (prop_oneof![Just("f"), Just("g")], inner)
            .prop_map(|(s, t)| Term::app(s, vec![t]))
    })
}

fn ground_term_strategy() -> impl Strategy<Value = Term> {
    Just(Term::constant("c")).prop_recursive(3, 8, 1, |inner| {
        (prop_oneof![Just("f"), Just("g")], inner)
            .prop_map(|(s, t)| Term::app(s, vec![t]))
    })
}

fn substitution_strategy() -> impl Strategy<Value = Substitution> {
    proptest::collection::btree_map(
        prop_oneof![Just("U".to_string()), Just("V".to_string()), Just("W".to_string())],
        term_strategy(),
        0..3,
    )
    .prop_map(|m| Substitution::from_bindings(m))
}

proptest! {
    #[test]
    fn term_product_is_associative(a in term_strategy(), b in term_strategy(), c in term_strategy()) {
        prop_assert_eq!(
            term_product(&term_product(&a, &b), &c),
            term_product(&a, &term_product(&b, &c))
        );
    }

    #[test]
    fn unifier_is_sound_and_idempotent(a in term_strategy(), b in term_strategy()) {
        if let Ok(mgu) = unify(&[(a.clone(), b.clone())]) {
            let left = mgu.apply(&a);
            let right = mgu.apply(&b);
            prop_assert_eq!(&left, &right);
            prop_assert_eq!(mgu.apply(&left), left.clone());
        }
    }

    #[test]
    fn unifier_is_most_general(a in term_strategy(), b in term_strategy(), grounding in substitution_strategy()) {
        // Any common instance factors through the MGU: if some sigma
        // equalizes the terms, the MGU must succeed, and sigma's effect
        // is reproducible on the unified form.
        let ga = grounding.apply(&a);
        let gb = grounding.apply(&b);
        if ga == gb {
            let mgu = unify(&[(a.clone(), b.clone())]);
            prop_assert!(mgu.is_ok());
        }
    }

    #[test]
    fn group_addition_laws(x in -1000i128..1000, y in -1000i128..1000, m in 1u64..30) {
        for group in [CyclicGroup::Int, CyclicGroup::Mod(m)] {
            let gx = group.element(x).unwrap();
            let gy = group.element(y).unwrap();
            let sum = g_add(gx, gy).unwrap();
            prop_assert_eq!(g_add(gy, gx).unwrap(), sum);
            prop_assert_eq!(g_add(sum, g_neg(sum).unwrap()).unwrap(), group.zero());
        }
    }

    #[test]
    fn substitution_commutes_with_dot(
        terms in proptest::collection::vec(term_strategy(), 1..4),
        coeffs in proptest::collection::vec(-3i128..=3, 1..4),
        sigma in substitution_strategy(),
    ) {
        let places: Vec<String> = ["A", "B", "C"].iter().map(|s| s.to_string()).collect();
        let k = PVector::from_entries(
            CyclicGroup::Int,
            places.clone(),
            places.iter().map(|p| (
                p.clone(),
                Polynomial::monomial(CyclicGroup::Int, Term::var("x"), 1).unwrap(),
            )),
        ).unwrap();
        let entries: Vec<(String, Polynomial)> = terms
            .iter()
            .zip(&coeffs)
            .zip(&places)
            .filter(|((_, c), _)| **c != 0)
            .map(|((t, c), p)| (
                p.clone(),
                Polynomial::monomial(CyclicGroup::Int, t.clone(), *c).unwrap(),
            ))
            .collect();
        let v = PVector::from_entries(CyclicGroup::Int, places, entries).unwrap();
        let dotted_then_substituted =
            poly_substitute(&pvec_dot(&k, &v).unwrap(), &sigma).unwrap();
        let substituted_then_dotted =
            pvec_dot(&k, &pvec_substitute(&v, &sigma).unwrap()).unwrap();
        prop_assert_eq!(dotted_then_substituted, substituted_then_dotted);
    }

    #[test]
    fn firing_subtracts_then_adds(token in ground_term_strategy()) {
        use apn_core::net::Transition;
        let places: Vec<String> = ["A", "B"].iter().map(|s| s.to_string()).collect();
        let mono = |p: &str, t: Term| (
            p.to_string(),
            Polynomial::monomial(CyclicGroup::Int, t, 1).unwrap(),
        );
        let t = Transition::new(
            "move".to_string(),
            PVector::from_entries(CyclicGroup::Int, places.clone(), [mono("A", Term::var("X"))]).unwrap(),
            PVector::from_entries(CyclicGroup::Int, places.clone(), [mono("B", Term::var("X"))]).unwrap(),
        ).unwrap();
        let m = PVector::from_entries(
            CyclicGroup::Int,
            places.clone(),
            [mono("A", token.clone())],
        ).unwrap();
        let sigma = Substitution::from_bindings([("X".to_string(), token.clone())]);
        prop_assert!(enabled(&m, &t, &sigma).unwrap());
        let m2 = fire(&m, &t, &sigma).unwrap();
        prop_assert!(m2.get("A").is_none());
        prop_assert_eq!(m2.get("B").unwrap().coeff(&token), 1);
    }
}

fn small_places() -> Vec<String> {
    ["A", "B", "C"].iter().map(|s| s.to_string()).collect()
}

fn group_for(index: usize) -> CyclicGroup {
    if index % 2 == 0 {
        CyclicGroup::Int
    } else {
        CyclicGroup::Mod(5)
    }
}

// Symbolic invariance implies the stability verdict; the reverse fails,
// so only one direction is asserted.
#[test]
fn invariance_implies_stability() {
    let sig = small_signature();
    let places = small_places();
    let mut rng = rng_from_seed(2024);
    let mut checked = 0;
    for i in 0..400 {
        let eq = random_equation(&mut rng, group_for(i), &places);
        let t = random_transition(&mut rng, &places);
        if invariant_check(&eq, &t).unwrap() {
            checked += 1;
            assert_eq!(
                decide_stability(&sig, &eq, &t).unwrap(),
                StabilityVerdict::Stable,
                "equation {} transition {:?}",
                eq.vector(),
                t
            );
        }
    }
    assert!(checked >= 5, "only {} invariant instances seen", checked);
}

// The decision procedure against the direct search: an instability
// verdict must come with a verified witness, and the oracle must confirm
// stability by finding nothing within bounds.
#[test]
fn verdict_agrees_with_oracle_on_random_instances() {
    let sig = small_signature();
    let places = small_places();
    let mut rng = rng_from_seed(77);
    let bounds = Bounds {
        term_depth: 2,
        tokens_per_place: 12,
        search_depth: 4,
        candidate_cap: 2_000_000,
    };
    let mut unstable = 0;
    let mut stable = 0;
    for i in 0..120 {
        let eq = random_equation(&mut rng, group_for(i), &places);
        let t = random_transition(&mut rng, &places);
        let verdict = decide_stability(&sig, &eq, &t).unwrap();
        let oracle = brute_stability(&sig, &eq, &t, &bounds).unwrap();
        match verdict {
            StabilityVerdict::Stable => {
                stable += 1;
                assert_eq!(
                    oracle,
                    BruteStability::NoCounterexampleWithinBounds,
                    "oracle refutes stability of {} vs {:?}",
                    eq.vector(),
                    t
                );
            }
            StabilityVerdict::Unstable(w) => {
                unstable += 1;
                assert!(satisfies(&w.marking, &eq).unwrap());
                assert!(enabled(&w.marking, &t, &w.realization).unwrap());
                assert!(!satisfies(&w.successor, &eq).unwrap());
                // The oracle may miss deep witnesses; when it does find
                // one it must be genuine.
                if let BruteStability::Counterexample(bw) = oracle {
                    assert!(satisfies(&bw.marking, &eq).unwrap());
                    assert!(!satisfies(&bw.successor, &eq).unwrap());
                }
            }
        }
    }
    assert!(stable >= 10 && unstable >= 10, "skewed sample: {} stable, {} unstable", stable, unstable);
}

// Every zero found by direct enumeration up to the spanning bound is a
// member of the spanning set, and vice versa.
#[test]
fn spanning_set_matches_brute_zeros_up_to_bound() {
    let places = small_places();
    let mut rng = rng_from_seed(4096);
    let bounds = Bounds::default();
    for i in 0..40 {
        let eq = random_equation(&mut rng, group_for(i), &places);
        let set = spanning_set(&eq).unwrap();
        let cap = set.bound().min(8);
        let Exhaustible::Done(brute) = brute_zeros(&eq, cap, &bounds).unwrap() else {
            panic!("cap hit");
        };
        let brute_counts: BTreeSet<Vec<u64>> =
            brute.iter().map(|z| z.count_vec(&places)).collect();
        let span_counts: BTreeSet<Vec<u64>> = set
            .zeros()
            .iter()
            .filter(|z| z.total() <= cap)
            .map(|z| z.count_vec(&places))
            .collect();
        assert_eq!(brute_counts, span_counts, "equation {}", eq.vector());
    }
}

#[test]
fn parallel_and_sequential_spanning_agree_on_random_equations() {
    let places = small_places();
    let mut rng = rng_from_seed(31337);
    for i in 0..30 {
        let eq = random_equation(&mut rng, group_for(i), &places);
        let par = spanning_set(&eq).unwrap();
        let seq = spanning_set_sequential(&eq).unwrap();
        assert_eq!(par.zeros(), seq.zeros());
    }
}

// Satisfaction is additive, so sums of witnesses stay inside the
// solution set; exercised through random satisfying pairs found by the
// oracle machinery.
#[test]
fn satisfying_markings_are_closed_under_sum() {
    use apn_core::poly::pvec_add;
    let places = small_places();
    let mut rng = rng_from_seed(555);
    for i in 0..40 {
        let eq = random_equation(&mut rng, group_for(i), &places);
        let set = spanning_set(&eq).unwrap();
        let mut implementations: Vec<PVector> = Vec::new();
        for zero in set.zeros().iter().filter(|z| !z.is_trivial()).take(3) {
            // Token for place p: the unifier's image of p's pattern
            // variable, grounded at the constant. All patterns then share
            // one ground product, so the weighted sum inherits the zero.
            let mut entries = Vec::new();
            for (p, n) in zero.counts() {
                let image = zero
                    .mgu()
                    .get(p)
                    .cloned()
                    .unwrap_or_else(|| Term::var(p.clone()));
                let grounding = Substitution::from_bindings(
                    image
                        .variables()
                        .into_iter()
                        .map(|v| (v, Term::constant("c"))),
                );
                entries.push((
                    p.clone(),
                    Polynomial::monomial(CyclicGroup::Int, grounding.apply(&image), *n as i128)
                        .unwrap(),
                ));
            }
            let candidate =
                PVector::from_entries(CyclicGroup::Int, places.clone(), entries).unwrap();
            assert!(satisfies(&candidate, &eq).unwrap(), "equation {}", eq.vector());
            implementations.push(candidate);
        }
        for a in &implementations {
            for b in &implementations {
                let sum = pvec_add(a, b).unwrap();
                assert!(satisfies(&sum, &eq).unwrap());
            }
        }
    }
}

#[test]
fn halting_equation_tracks_machine_runs() {
    use apn_core::gen::random_machine;
    use apn_core::minsky::{
        encode, halting_equation, machine_run, MachineState,
    };
    use apn_core::oracle::{bounded_reachability, Reachability};
    let mut rng = rng_from_seed(909);
    for _ in 0..20 {
        let m = random_machine(&mut rng, 2, 5);
        let net = encode(&m).unwrap();
        let eq = halting_equation(&m).unwrap();
        let (trace, halted) = machine_run(&MachineState::initial(&m), &m, 6);
        // One BFS level per simulated machine step: the net's reachable
        // markings then mirror the trace exactly.
        let bounds = Bounds {
            term_depth: 7,
            search_depth: trace.len() - 1,
            candidate_cap: 2_000_000,
            ..Bounds::default()
        };
        match bounded_reachability(&net, &eq, &bounds).unwrap() {
            Reachability::ViolatedAt { .. } => {
                assert!(halted, "net halts but machine does not: {:?}", m)
            }
            Reachability::HoldsUpToBound => {
                assert!(!halted, "machine halts but net does not: {:?}", m)
            }
            Reachability::Exhausted => panic!("cap hit"),
        }
    }
}
