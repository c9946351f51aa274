//! First-order terms over a fixed signature, substitutions, and the term
//! product.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use thiserror::Error;

/// A function signature: finitely many symbols, each with a fixed arity.
///
/// At least one symbol of arity 0 is required so that ground terms exist.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Signature {
    symbols: Vec<(String, usize)>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SignatureError {
    #[error("signature must declare at least one symbol")]
    Empty,
    #[error("duplicate symbol `{0}`")]
    DuplicateSymbol(String),
    #[error("signature has no arity-0 symbol, so no ground term exists")]
    NoConstant,
    #[error("unknown symbol `{0}`")]
    UnknownSymbol(String),
    #[error("symbol `{name}` has arity {expected}, applied to {found} arguments")]
    ArityMismatch {
        name: String,
        expected: usize,
        found: usize,
    },
}

impl Signature {
    pub fn new(symbols: Vec<(String, usize)>) -> Result<Self, SignatureError> {
        if symbols.is_empty() {
            return Err(SignatureError::Empty);
        }
        let mut seen = BTreeSet::new();
        for (name, _) in &symbols {
            if !seen.insert(name.clone()) {
                return Err(SignatureError::DuplicateSymbol(name.clone()));
            }
        }
        if !symbols.iter().any(|(_, a)| *a == 0) {
            return Err(SignatureError::NoConstant);
        }
        Ok(Signature { symbols })
    }

    pub fn symbols(&self) -> &[(String, usize)] {
        &self.symbols
    }

    pub fn arity(&self, name: &str) -> Option<usize> {
        self.symbols
            .iter()
            .find(|(n, _)| n == name)
            .map(|(_, a)| *a)
    }

    /// Arity-0 symbols, in declaration order.
    pub fn constants(&self) -> impl Iterator<Item = &str> {
        self.symbols
            .iter()
            .filter(|(_, a)| *a == 0)
            .map(|(n, _)| n.as_str())
    }

    /// The first symbol of arity >= 1, if any.
    pub fn first_non_constant(&self) -> Option<(&str, usize)> {
        self.symbols
            .iter()
            .find(|(_, a)| *a >= 1)
            .map(|(n, a)| (n.as_str(), *a))
    }

    /// Checks that every application in `term` uses a declared symbol with
    /// the declared arity.
    pub fn validate_term(&self, term: &Term) -> Result<(), SignatureError> {
        match term {
            Term::Var(_) => Ok(()),
            Term::App(name, args) => {
                let expected = self
                    .arity(name)
                    .ok_or_else(|| SignatureError::UnknownSymbol(name.clone()))?;
                if expected != args.len() {
                    return Err(SignatureError::ArityMismatch {
                        name: name.clone(),
                        expected,
                        found: args.len(),
                    });
                }
                args.iter().try_for_each(|a| self.validate_term(a))
            }
        }
    }
}

/// A first-order term: a variable or a symbol application.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Term {
    Var(String),
    App(String, Vec<Term>),
}

impl Term {
    pub fn var(name: impl Into<String>) -> Term {
        Term::Var(name.into())
    }

    pub fn app(name: impl Into<String>, args: Vec<Term>) -> Term {
        Term::App(name.into(), args)
    }

    /// An arity-0 application.
    pub fn constant(name: impl Into<String>) -> Term {
        Term::App(name.into(), Vec::new())
    }

    pub fn is_ground(&self) -> bool {
        match self {
            Term::Var(_) => false,
            Term::App(_, args) => args.iter().all(Term::is_ground),
        }
    }

    pub fn depth(&self) -> usize {
        match self {
            Term::Var(_) => 0,
            Term::App(_, args) => 1 + args.iter().map(Term::depth).max().unwrap_or(0),
        }
    }

    pub fn variables(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.collect_variables(&mut out);
        out
    }

    fn collect_variables(&self, out: &mut BTreeSet<String>) {
        match self {
            Term::Var(v) => {
                out.insert(v.clone());
            }
            Term::App(_, args) => args.iter().for_each(|a| a.collect_variables(out)),
        }
    }

    pub fn contains_var(&self, var: &str) -> bool {
        match self {
            Term::Var(v) => v == var,
            Term::App(_, args) => args.iter().any(|a| a.contains_var(var)),
        }
    }
}

// Canonical term order: variables before applications, variables by name,
// applications by symbol, then arity, then arguments. Gives polynomials a
// structural, deterministic normal form.
impl Ord for Term {
    fn cmp(&self, other: &Term) -> Ordering {
        match (self, other) {
            (Term::Var(a), Term::Var(b)) => a.cmp(b),
            (Term::Var(_), Term::App(..)) => Ordering::Less,
            (Term::App(..), Term::Var(_)) => Ordering::Greater,
            (Term::App(f, xs), Term::App(g, ys)) => f
                .cmp(g)
                .then_with(|| xs.len().cmp(&ys.len()))
                .then_with(|| xs.cmp(ys)),
        }
    }
}

impl PartialOrd for Term {
    fn partial_cmp(&self, other: &Term) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Var(v) => write!(f, "{}", v),
            Term::App(name, args) => {
                write!(f, "{}", name)?;
                if !args.is_empty() {
                    write!(f, "(")?;
                    for (i, a) in args.iter().enumerate() {
                        if i > 0 {
                            write!(f, ",")?;
                        }
                        write!(f, "{}", a)?;
                    }
                    write!(f, ")")?;
                }
                Ok(())
            }
        }
    }
}

/// A substitution: a finite binding of variables to terms. Variables outside
/// the domain are bound to themselves.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Substitution {
    bindings: BTreeMap<String, Term>,
}

impl Substitution {
    pub fn empty() -> Substitution {
        Substitution::default()
    }

    pub fn from_bindings<I>(bindings: I) -> Substitution
    where
        I: IntoIterator<Item = (String, Term)>,
    {
        Substitution {
            bindings: bindings.into_iter().collect(),
        }
    }

    pub fn bind(&mut self, var: impl Into<String>, term: Term) {
        self.bindings.insert(var.into(), term);
    }

    pub fn get(&self, var: &str) -> Option<&Term> {
        self.bindings.get(var)
    }

    pub fn domain(&self) -> impl Iterator<Item = &str> {
        self.bindings.keys().map(String::as_str)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &Term)> {
        self.bindings.iter().map(|(k, v)| (k.as_str(), v))
    }

    pub fn is_empty(&self) -> bool {
        self.bindings.is_empty()
    }

    pub fn len(&self) -> usize {
        self.bindings.len()
    }

    /// Simultaneous substitution: bound variables are replaced by their
    /// images, which are not themselves re-substituted.
    pub fn apply(&self, term: &Term) -> Term {
        match term {
            Term::Var(v) => self.bindings.get(v).cloned().unwrap_or_else(|| term.clone()),
            Term::App(name, args) => {
                Term::App(name.clone(), args.iter().map(|a| self.apply(a)).collect())
            }
        }
    }

    /// True if every variable in `vars` is bound to a ground term.
    pub fn is_assignment_for<'a, I>(&self, vars: I) -> bool
    where
        I: IntoIterator<Item = &'a str>,
    {
        vars.into_iter()
            .all(|v| self.bindings.get(v).map(Term::is_ground).unwrap_or(false))
    }

    /// The first variable in `vars` lacking a ground binding, if any.
    pub fn first_unbound<'a, I>(&self, vars: I) -> Option<&'a str>
    where
        I: IntoIterator<Item = &'a str>,
    {
        vars.into_iter()
            .find(|v| !self.bindings.get(*v).map(Term::is_ground).unwrap_or(false))
    }
}

/// The product of two terms: every variable occurrence in `left` is
/// replaced by `right`.
pub fn term_product(left: &Term, right: &Term) -> Term {
    match left {
        Term::Var(_) => right.clone(),
        Term::App(name, args) => Term::App(
            name.clone(),
            args.iter().map(|a| term_product(a, right)).collect(),
        ),
    }
}

/// Syntactic matching: finds a substitution sending `pattern` to `target`,
/// binding only variables of `pattern`. `target` need not be ground.
pub fn match_term(pattern: &Term, target: &Term) -> Option<Substitution> {
    let mut out = Substitution::empty();
    if match_into(pattern, target, &mut out) {
        Some(out)
    } else {
        None
    }
}

fn match_into(pattern: &Term, target: &Term, out: &mut Substitution) -> bool {
    match pattern {
        Term::Var(v) => match out.get(v) {
            Some(bound) => bound == target,
            None => {
                out.bind(v.clone(), target.clone());
                true
            }
        },
        Term::App(f, args) => match target {
            Term::App(g, targs) if f == g && args.len() == targs.len() => args
                .iter()
                .zip(targs)
                .all(|(p, t)| match_into(p, t, out)),
            _ => false,
        },
    }
}

/// Reserved namespace for machine-generated variables; the parser rejects
/// identifiers of this shape.
pub fn fresh_var(index: usize) -> String {
    format!("#{}", index)
}

pub fn is_reserved_var(name: &str) -> bool {
    name.starts_with('#') || name.starts_with('%')
}
