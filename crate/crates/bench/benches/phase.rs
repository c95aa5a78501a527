use criterion::{criterion_group, criterion_main, Criterion};
use geophase::phase::integrate_phase;
use geophase::quadrature::QuadSpec;
use geophase::sampling::random_loop;
use geophase::squeeze::squeeze_circle_path;
use geophase::OscParams;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::hint::black_box;

const ADAPTIVE: QuadSpec = QuadSpec::Adaptive {
    abs_tol: 1e-10,
    max_evals: 1_000_000,
};

fn squeeze_circles(c: &mut Criterion) {
    let mut group = c.benchmark_group("squeeze_circle");
    for (modes, r) in [(1, 1.0), (2, 1.0), (2, 2.5)] {
        let params = OscParams::new(1.0, vec![1.0; modes]).unwrap();
        let path = squeeze_circle_path(modes, r, &params).unwrap();
        group.bench_function(format!("modes_{modes}_R_{r}"), |b| {
            b.iter(|| {
                integrate_phase(black_box(&path), &params, &ADAPTIVE)
                    .unwrap()
                    .value
            })
        });
    }
    group.finish();
}

fn random_loops(c: &mut Criterion) {
    let mut group = c.benchmark_group("random_loop");
    group.sample_size(20);
    for n in [1usize, 2] {
        let mut rng = ChaCha8Rng::seed_from_u64(7 + n as u64);
        let path = random_loop(&mut rng, n, 0.5).unwrap();
        let params = OscParams::new(1.0, vec![1.0; n]).unwrap();
        group.bench_function(format!("modes_{n}"), |b| {
            b.iter(|| {
                integrate_phase(black_box(&path), &params, &ADAPTIVE)
                    .unwrap()
                    .value
            })
        });
    }
    group.finish();
}

criterion_group!(benches, squeeze_circles, random_loops);
criterion_main!(benches);
