use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};

use seqlab::bandit::{cumulative_regret, run_bandit_replication, BanditScenario, PolicyKind};
use seqlab::parallel::replicate;
use seqlab::rng::make_stream;
use seqlab::seq::{cumulative_error, run_sequential_methods, SeqMethod, SequentialScenario};

const REPS: usize = 16;

fn seq_scenario() -> SequentialScenario {
    SequentialScenario::new(
        "bench-seq",
        5,
        100,
        600,
        vec![SeqMethod::opt(0.8, 0.6), SeqMethod::lasso(0.8)],
    )
}

fn bandit_scenario() -> BanditScenario {
    let mut sc = BanditScenario::new("bench-bandit", 5, 100, 5, 1000, 2.0, 0.6);
    sc.policies = vec![PolicyKind::ThreeStage];
    sc
}

fn seq_batch(sc: &SequentialScenario, jobs: usize) -> Vec<f64> {
    let window = sc.window();
    replicate(REPS, jobs, |rep| {
        let recs = run_sequential_methods(sc, &make_stream(1, rep as u32))?;
        Ok(cumulative_error(&recs[0], window, None))
    })
    .unwrap()
}

fn bandit_batch(sc: &BanditScenario, jobs: usize) -> Vec<f64> {
    replicate(REPS, jobs, |rep| {
        let rec = run_bandit_replication(sc, PolicyKind::ThreeStage, &make_stream(1, rep as u32))?;
        Ok(cumulative_regret(&rec, (1, sc.horizon)))
    })
    .unwrap()
}

fn bench(c: &mut Criterion) {
    let seq = seq_scenario();
    let bandit = bandit_scenario();
    let mut g = c.benchmark_group("replications");
    g.sample_size(10);
    // jobs = 0 uses every core; identical to sequential without the feature
    for (name, jobs) in [("sequential", 1), ("parallel", 0)] {
        g.bench_function(format!("seq/{name}"), |b| {
            b.iter(|| black_box(seq_batch(&seq, jobs)))
        });
        g.bench_function(format!("bandit/{name}"), |b| {
            b.iter(|| black_box(bandit_batch(&bandit, jobs)))
        });
    }
    g.finish();
}

criterion_group!(benches, bench);
criterion_main!(benches);
