use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};

use haarwords::montecarlo::experiments::word_poly_operator;
use haarwords::montecarlo::norm::{estimate_norm, NormMethod, NormOptions};
use haarwords::rwalk::{proper_power_stats, return_probability};
use haarwords::symgroup::character;
use haarwords::weingarten::wg_by_type;
use haarwords::wordint::{exact_word_moment, Dimension};
use haarwords::{Group, Partition, TraceMonomial, UnitaryTuple, WalkMeasure, WordPoly};

fn exact(c: &mut Criterion) {
    let m = TraceMonomial::parse("abAB baBA", 2).unwrap();
    c.bench_function("moment abAB baBA symbolic", |b| {
        b.iter(|| exact_word_moment(black_box(&m), Dimension::Symbolic).unwrap())
    });
    let rho = Partition::parse("2,2,1").unwrap();
    c.bench_function("weingarten L=5", |b| b.iter(|| wg_by_type(5, black_box(&rho)).unwrap()));
    let lambda = Partition::parse("4,3,2,1").unwrap();
    let mu = Partition::parse("3,3,2,2").unwrap();
    c.bench_function("character chi^(4321)(3322)", |b| {
        b.iter(|| character(black_box(&lambda), black_box(&mu)).unwrap())
    });
}

fn sampling(c: &mut Criterion) {
    c.bench_function("haar tuple r=2 n=100", |b| {
        let mut i = 0u64;
        b.iter(|| {
            i += 1;
            UnitaryTuple::sample(2, 100, Group::Unitary, 1, i).unwrap()
        })
    });
    let tuple = UnitaryTuple::sample(2, 200, Group::Unitary, 1, 0).unwrap();
    let x = WordPoly::kesten(2).unwrap();
    let op = word_poly_operator(&x, &tuple, 1, 0).unwrap();
    let opts = NormOptions { method: NormMethod::Lanczos, ..NormOptions::default() };
    c.bench_function("lanczos norm n=200", |b| b.iter(|| estimate_norm(black_box(&op), &opts).unwrap()));
}

fn walks(c: &mut Criterion) {
    let mu = WalkMeasure::uniform_generators(2).unwrap();
    c.bench_function("radial return probability 40 steps", |b| {
        b.iter(|| return_probability(black_box(&mu), 40).unwrap())
    });
    c.bench_function("proper powers 30 steps 10k walks", |b| {
        b.iter(|| proper_power_stats(black_box(&mu), 30, 10_000, 7).unwrap())
    });
}

criterion_group!(benches, exact, sampling, walks);
criterion_main!(benches);
