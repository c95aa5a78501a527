use criterion::{criterion_group, criterion_main, BatchSize, Criterion};
use geophase::sampling::{degenerate_sp4_generator, random_lie, random_sp4_generator};
use geophase::sp4::{closed_form_exp, generic_exp};
use geophase::symplectic::exp_map;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::hint::black_box;

fn sp4(c: &mut Criterion) {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let generators: Vec<_> = (0..64).map(|_| random_sp4_generator(&mut rng)).collect();
    let degenerate: Vec<_> = (0..64)
        .map(|_| degenerate_sp4_generator(&mut rng))
        .collect();

    let mut group = c.benchmark_group("sp4_exponential");
    group.bench_function("closed_form", |b| {
        b.iter(|| {
            generators
                .iter()
                .map(|g| closed_form_exp(black_box(g)).residual())
                .sum::<f64>()
        })
    });
    group.bench_function("closed_form_degenerate", |b| {
        b.iter(|| {
            degenerate
                .iter()
                .map(|g| closed_form_exp(black_box(g)).residual())
                .sum::<f64>()
        })
    });
    group.bench_function("dense", |b| {
        b.iter(|| {
            generators
                .iter()
                .map(|g| generic_exp(black_box(g)).unwrap()[(0, 0)])
                .sum::<f64>()
        })
    });
    group.finish();
}

fn exp_map_sizes(c: &mut Criterion) {
    let mut group = c.benchmark_group("exp_map");
    for n in [1usize, 2, 4] {
        let mut rng = ChaCha8Rng::seed_from_u64(n as u64);
        group.bench_function(format!("modes_{n}"), |b| {
            b.iter_batched(
                || random_lie(&mut rng, n, 1.0).unwrap(),
                |l| exp_map(&l).unwrap(),
                BatchSize::SmallInput,
            )
        });
    }
    group.finish();
}

criterion_group!(benches, sp4, exp_map_sizes);
criterion_main!(benches);
