//! Compares the rayon-backed spanning set enumeration against the
//! single-threaded baseline on a small fixed instance and a larger
//! generated one. Run with `cargo bench -p apn-core`.

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

use apn_core::equation::HomogeneousEquation;
use apn_core::gen::{random_equation, rng_from_seed};
use apn_core::group::CyclicGroup;
use apn_core::poly::{PVector, Polynomial};
use apn_core::stability::{spanning_set, spanning_set_sequential};
use apn_core::term::Term;

fn fixed_equation() -> HomogeneousEquation {
    let places: Vec<String> = ["A", "B", "C", "D", "E"]
        .iter()
        .map(|s| s.to_string())
        .collect();
    let x = Term::var("x");
    let mono = |t: Term, c: i128| Polynomial::monomial(CyclicGroup::Int, t, c).unwrap();
    let vector = PVector::from_entries(
        CyclicGroup::Int,
        places,
        [
            ("A".to_string(), mono(Term::app("f", vec![x.clone()]), 4)),
            ("B".to_string(), mono(Term::app("g", vec![x.clone()]), 3)),
            (
                "C".to_string(),
                mono(Term::app("f", vec![Term::app("g", vec![x.clone()])]), -5),
            ),
            ("D".to_string(), mono(x, -1)),
        ],
    )
    .unwrap();
    HomogeneousEquation::new("E1".to_string(), vector).unwrap()
}

// Six constrained places over the integers: subset enumeration is
// exponential in the constrained place count, so this dominates runtime.
fn wide_equation() -> HomogeneousEquation {
    let places: Vec<String> = (0..6).map(|i| format!("P{}", i)).collect();
    let mut rng = rng_from_seed(501);
    loop {
        let eq = random_equation(&mut rng, CyclicGroup::Int, &places);
        if eq.constrained_places().len() == places.len() {
            return eq;
        }
    }
}

fn bench_spanning(c: &mut Criterion) {
    let mut group = c.benchmark_group("spanning_set");
    for (label, eq) in [("fixed5", fixed_equation()), ("wide6", wide_equation())] {
        group.bench_with_input(BenchmarkId::new("parallel", label), &eq, |b, eq| {
            b.iter(|| spanning_set(eq).unwrap())
        });
        group.bench_with_input(BenchmarkId::new("sequential", label), &eq, |b, eq| {
            b.iter(|| spanning_set_sequential(eq).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, bench_spanning);
criterion_main!(benches);
