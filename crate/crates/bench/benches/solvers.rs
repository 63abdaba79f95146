use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use seedfolio_core::gpp::{choose_move, MctsParams};
use seedfolio_core::matrix_game::{solve_approx, solve_exact, LearningRate};
use seedfolio_core::{GameEngine, PayoffMatrix, UcbtState};

fn random_matrix(n: usize, seed: u64) -> PayoffMatrix {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    PayoffMatrix::from_rows(
        (0..n)
            .map(|_| (0..n).map(|_| rng.random::<f64>()).collect())
            .collect(),
    )
    .unwrap()
}

fn binary_matrix(n: usize, seed: u64) -> PayoffMatrix {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    PayoffMatrix::from_rows(
        (0..n)
            .map(|_| {
                (0..n)
                    .map(|_| if rng.random_bool(0.5) { 1.0 } else { 0.0 })
                    .collect()
            })
            .collect(),
    )
    .unwrap()
}

fn exact(c: &mut Criterion) {
    let mut g = c.benchmark_group("solve_exact");
    for n in [8, 32, 64] {
        let m = random_matrix(n, n as u64);
        g.bench_with_input(BenchmarkId::new("uniform", n), &m, |b, m| {
            b.iter(|| solve_exact(black_box(m)).unwrap())
        });
        let m = binary_matrix(n, n as u64);
        g.bench_with_input(BenchmarkId::new("binary", n), &m, |b, m| {
            b.iter(|| solve_exact(black_box(m)).unwrap())
        });
    }
    g.finish();
}

fn approx(c: &mut Criterion) {
    let m = random_matrix(50, 1);
    c.bench_function("solve_approx/50x50/10k", |b| {
        b.iter(|| solve_approx(black_box(&m), 10_000, LearningRate::Anytime).unwrap())
    });
}

fn mcts(c: &mut Criterion) {
    let mut g = c.benchmark_group("mcts_move");
    g.sample_size(20);
    for engine in [GameEngine::DEFAULT_HEX, GameEngine::DEFAULT_CONNECT_FOUR] {
        let state = engine.initial_state();
        let params = MctsParams {
            simulations: 300,
            exploration: std::f64::consts::SQRT_2,
            seed: 1,
        };
        g.bench_function(engine.name(), |b| {
            b.iter(|| choose_move(&engine, black_box(&state), &params, 0).unwrap())
        });
    }
    g.finish();
}

fn ucbt(c: &mut Criterion) {
    c.bench_function("ucbt/32_arms/1k_steps", |b| {
        b.iter(|| {
            let mut s = UcbtState::new(32).unwrap();
            for t in 0..1000u32 {
                let arm = s.select_arm();
                s.update(arm, (arm as u32 + t).is_multiple_of(3)).unwrap();
            }
            s
        })
    });
}

criterion_group!(benches, exact, approx, mcts, ucbt);
criterion_main!(benches);
