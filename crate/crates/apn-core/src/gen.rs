//! Seeded random instances at desk scale for cross-checking the decision
//! procedure against the brute-force oracles.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::equation::HomogeneousEquation;
use crate::group::CyclicGroup;
use crate::minsky::{Instruction, MinskyMachine};
use crate::net::Transition;
use crate::poly::{PVector, Polynomial};
use crate::term::{Signature, Term};

pub fn rng_from_seed(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn small_signature() -> Signature {
    Signature::new(vec![("f".into(), 1), ("g".into(), 1), ("c".into(), 0)])
        .expect("valid signature")
}

// A term of depth at most `depth` over the unary symbols, ending in the
// given leaf.
fn wrapped(rng: &mut ChaCha8Rng, depth: usize, leaf: Term) -> Term {
    let mut term = leaf;
    for _ in 0..rng.gen_range(0..=depth) {
        let symbol = if rng.gen_bool(0.5) { "f" } else { "g" };
        term = Term::app(symbol, vec![term]);
    }
    term
}

/// A random equation: per place, a coefficient in [-2, 2] (zero drops the
/// place) with a pattern of depth <= 2 over one variable or ground.
pub fn random_equation(
    rng: &mut ChaCha8Rng,
    group: CyclicGroup,
    places: &[String],
) -> HomogeneousEquation {
    loop {
        let mut entries = Vec::new();
        for place in places {
            let coeff: i128 = rng.gen_range(-2..=2);
            if coeff == 0 {
                continue;
            }
            let leaf = if rng.gen_bool(0.3) {
                Term::constant("c")
            } else {
                Term::var("x")
            };
            let term = wrapped(rng, 2, leaf);
            if let Ok(poly) = Polynomial::monomial(group, term, coeff) {
                if !poly.is_zero() {
                    entries.push((place.clone(), poly));
                }
            }
        }
        if entries.is_empty() {
            continue;
        }
        let vector = PVector::from_entries(group, places.to_vec(), entries)
            .expect("places are distinct");
        return HomogeneousEquation::new("random".to_string(), vector)
            .expect("monomial per place");
    }
}

/// A random transition over a small variable pool: up to two consume arcs
/// and up to two produce arcs with multiplicities 1 or 2, at least one
/// consume arc so the transition can be disabled.
pub fn random_transition(rng: &mut ChaCha8Rng, places: &[String]) -> Transition {
    let vars = ["W", "X", "Y"];
    loop {
        let mut consume = Vec::new();
        let mut produce = Vec::new();
        for (side, min_arcs) in [(&mut consume, 1usize), (&mut produce, 0usize)] {
            let arcs = rng.gen_range(min_arcs..=2);
            let mut free: Vec<&String> = places.iter().collect();
            for _ in 0..arcs.min(free.len()) {
                let place = free.remove(rng.gen_range(0..free.len()));
                let leaf = if rng.gen_bool(0.2) {
                    Term::constant("c")
                } else {
                    Term::var(vars[rng.gen_range(0..vars.len())])
                };
                let term = wrapped(rng, 1, leaf);
                let mult = rng.gen_range(1..=2);
                side.push((
                    place.clone(),
                    Polynomial::monomial(CyclicGroup::Int, term, mult)
                        .expect("positive multiplicity"),
                ));
            }
        }
        let consume = PVector::from_entries(CyclicGroup::Int, places.to_vec(), consume)
            .expect("places distinct");
        let produce = PVector::from_entries(CyclicGroup::Int, places.to_vec(), produce)
            .expect("places distinct");
        if let Ok(t) = Transition::new("t".to_string(), consume, produce) {
            return t;
        }
    }
}

/// A random machine with at most `max_registers` registers and at most
/// `max_len` instructions, the last being halt.
pub fn random_machine(rng: &mut ChaCha8Rng, max_registers: usize, max_len: usize) -> MinskyMachine {
    let registers = rng.gen_range(1..=max_registers);
    let n = rng.gen_range(2..=max_len.max(2));
    let mut instructions = Vec::new();
    for _ in 1..n {
        let register = rng.gen_range(1..=registers);
        if rng.gen_bool(0.5) {
            instructions.push(Instruction::Inc {
                register,
                target: rng.gen_range(1..=n),
            });
        } else {
            instructions.push(Instruction::Jz {
                register,
                on_positive: rng.gen_range(1..=n),
                on_zero: rng.gen_range(1..=n),
            });
        }
    }
    instructions.push(Instruction::Halt);
    MinskyMachine::new(registers, instructions).expect("targets in range")
}
