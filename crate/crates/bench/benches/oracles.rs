use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use hstar_core::domains::{PancakeDomain, TspInstance};
use hstar_core::oracles::{astar, held_karp_units, GapHeuristic, TieBreak, DEFAULT_HELD_KARP_CAP};
use hstar_core::rng::rng_from_seed;

fn bench_held_karp(c: &mut Criterion) {
    let mut group = c.benchmark_group("held_karp");
    for n in [8, 10, 12, 14] {
        let inst = TspInstance::random(n, &mut rng_from_seed(n as u64)).unwrap();
        group.bench_with_input(BenchmarkId::from_parameter(n), &inst, |b, inst| {
            b.iter(|| held_karp_units(black_box(inst), DEFAULT_HELD_KARP_CAP).unwrap())
        });
    }
    group.finish();
}

fn bench_pancake_astar(c: &mut Criterion) {
    let mut group = c.benchmark_group("pancake_astar_gap");
    for n in [8, 12, 16] {
        let d = PancakeDomain::new(n).unwrap();
        let mut rng = rng_from_seed(n as u64);
        let starts: Vec<_> = (0..16).map(|_| d.random_walk(2 * n, &mut rng)).collect();
        group.bench_with_input(BenchmarkId::from_parameter(n), &starts, |b, starts| {
            b.iter(|| {
                starts
                    .iter()
                    .map(|s| astar(&d, s.clone(), &GapHeuristic, TieBreak::HighG).unwrap().optimal_cost)
                    .sum::<u64>()
            })
        });
    }
    group.finish();
}

criterion_group!(benches, bench_held_karp, bench_pancake_astar);
criterion_main!(benches);
