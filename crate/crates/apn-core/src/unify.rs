//! Syntactic unification producing idempotent most general unifiers.

use std::collections::BTreeMap;

use crate::term::{Substitution, Term};

/// Why a unification problem has no solution.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum UnifyFailure {
    /// Two applications with different head symbols or arities.
    Clash { left: Term, right: Term },
    /// A variable would be bound to a term containing it.
    OccursCheck { var: String, term: Term },
}

/// Solves a set of term equations by the Martelli-Montanari rules with an
/// occurs check. The result is an idempotent MGU with bound variables
/// eliminated from images.
///
/// Deterministic: pairs are sorted before processing and variable-variable
/// equations are oriented so the lexicographically larger name is bound.
/// Equal problems therefore yield identical unifiers.
pub fn unify(pairs: &[(Term, Term)]) -> Result<Substitution, UnifyFailure> {
    let mut work: Vec<(Term, Term)> = pairs.to_vec();
    work.sort();
    work.reverse();
    // solved maps vars to terms free of every solved var.
    let mut solved: BTreeMap<String, Term> = BTreeMap::new();

    while let Some((l, r)) = work.pop() {
        match (l, r) {
            (l, r) if l == r => {}
            (Term::App(f, xs), Term::App(g, ys)) => {
                if f != g || xs.len() != ys.len() {
                    return Err(UnifyFailure::Clash {
                        left: Term::App(f, xs),
                        right: Term::App(g, ys),
                    });
                }
                work.extend(xs.into_iter().zip(ys));
            }
            (Term::Var(x), t) | (t, Term::Var(x)) => {
                let (x, t) = orient(x, t);
                let t = apply_solved(&solved, &t);
                let x_resolved = apply_solved(&solved, &Term::Var(x.clone()));
                match x_resolved {
                    Term::Var(y) => {
                        if t == Term::Var(y.clone()) {
                            continue;
                        }
                        let (y, t) = match t {
                            Term::Var(z) => orient(y, Term::Var(z)),
                            t => (y, t),
                        };
                        if t.contains_var(&y) {
                            return Err(UnifyFailure::OccursCheck { var: y, term: t });
                        }
                        eliminate(&mut solved, y, t);
                    }
                    bound => {
                        // x already resolves to a non-variable; unify that
                        // with t instead.
                        work.push((bound, t));
                    }
                }
            }
        }
    }

    Ok(Substitution::from_bindings(solved))
}

// Variable-variable pairs bind the lexicographically larger name, so the
// smaller name survives in images.
fn orient(x: String, t: Term) -> (String, Term) {
    match t {
        Term::Var(y) => {
            if x <= y {
                (y, Term::Var(x))
            } else {
                (x, Term::Var(y))
            }
        }
        t => (x, t),
    }
}

fn apply_solved(solved: &BTreeMap<String, Term>, term: &Term) -> Term {
    match term {
        Term::Var(v) => solved.get(v).cloned().unwrap_or_else(|| term.clone()),
        Term::App(f, args) => Term::App(
            f.clone(),
            args.iter().map(|a| apply_solved(solved, a)).collect(),
        ),
    }
}

// Adds x -> t and substitutes t for x throughout existing images, keeping
// the solved set triangular and idempotent.
fn eliminate(solved: &mut BTreeMap<String, Term>, x: String, t: Term) {
    let single = Substitution::from_bindings([(x.clone(), t.clone())]);
    for image in solved.values_mut() {
        *image = single.apply(image);
    }
    solved.insert(x, t);
}

#[cfg(test)]
mod tests {
    use super::*;

    fn f(arg: Term) -> Term {
        Term::app("f", vec![arg])
    }

    fn g(arg: Term) -> Term {
        Term::app("g", vec![arg])
    }

    fn c() -> Term {
        Term::constant("c")
    }

    #[test]
    fn binds_variable_to_term() {
        let sigma = unify(&[(g(Term::var("B")), Term::var("D"))]).unwrap();
        assert_eq!(sigma.get("D"), Some(&g(Term::var("B"))));
        assert_eq!(sigma.len(), 1);
    }

    #[test]
    fn clash_on_distinct_symbols() {
        let err = unify(&[(f(Term::var("A")), g(Term::var("B")))]).unwrap_err();
        assert!(matches!(err, UnifyFailure::Clash { .. }));
    }

    #[test]
    fn occurs_check_rejected() {
        let err = unify(&[(Term::var("X"), f(Term::var("X")))]).unwrap_err();
        assert!(matches!(err, UnifyFailure::OccursCheck { .. }));
    }

    #[test]
    fn mgu_unifies_every_pair() {
        let pairs = vec![
            (f(Term::var("X")), f(g(Term::var("Y")))),
            (Term::var("Y"), c()),
        ];
        let sigma = unify(&pairs).unwrap();
        for (l, r) in &pairs {
            assert_eq!(sigma.apply(l), sigma.apply(r));
        }
        assert_eq!(sigma.get("X"), Some(&g(c())));
    }

    #[test]
    fn mgu_is_idempotent() {
        let pairs = vec![
            (Term::var("X"), f(Term::var("Y"))),
            (Term::var("Y"), g(Term::var("Z"))),
        ];
        let sigma = unify(&pairs).unwrap();
        for (x, image) in sigma.iter() {
            assert_eq!(&sigma.apply(image), image, "non-idempotent at {}", x);
        }
    }

    #[test]
    fn variable_variable_orientation_is_lexicographic() {
        let sigma = unify(&[(Term::var("B"), Term::var("A"))]).unwrap();
        assert_eq!(sigma.get("B"), Some(&Term::var("A")));
        assert_eq!(sigma.get("A"), None);
    }

    #[test]
    fn deterministic_under_pair_order() {
        let a = unify(&[
            (Term::var("X"), f(c())),
            (Term::var("Y"), g(Term::var("X"))),
        ])
        .unwrap();
        let b = unify(&[
            (Term::var("Y"), g(Term::var("X"))),
            (Term::var("X"), f(c())),
        ])
        .unwrap();
        assert_eq!(a, b);
        assert_eq!(b.get("Y"), Some(&g(f(c()))));
    }

    #[test]
    fn chained_variables_resolve() {
        // X = Y, Y = c forces X -> c as well.
        let sigma = unify(&[
            (Term::var("X"), Term::var("Y")),
            (Term::var("Y"), c()),
        ])
        .unwrap();
        assert_eq!(sigma.apply(&Term::var("X")), c());
        assert_eq!(sigma.apply(&Term::var("Y")), c());
    }

    #[test]
    fn conflicting_bindings_clash() {
        let err = unify(&[
            (Term::var("X"), f(c())),
            (Term::var("X"), g(c())),
        ])
        .unwrap_err();
        assert!(matches!(err, UnifyFailure::Clash { .. }));
    }
}
