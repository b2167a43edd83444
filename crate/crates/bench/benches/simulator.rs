use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion, Throughput};
use hybridcache::simulator::{sample_realization, SimOptions};
use hybridcache::{estimate_asp, estimate_association, Regime};
use hybridcache_bench::Scenario;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const RADIUS: f64 = 2500.0;

fn realization(c: &mut Criterion) {
    let s = Scenario::noise_limited();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    c.bench_function("sample_realization", |b| {
        b.iter(|| sample_realization(&s.cfg, black_box(&s.uniform), RADIUS, &mut rng))
    });
}

fn estimates(c: &mut Criterion) {
    let nl = Scenario::noise_limited();
    let il = Scenario::interference_limited();
    let trials = 1000;
    let mut group = c.benchmark_group("estimate");
    group.sample_size(10).throughput(Throughput::Elements(trials));
    group.bench_function("association", |b| {
        b.iter(|| estimate_association(&nl.cfg, trials, black_box(3), RADIUS).unwrap())
    });
    for (name, s, regime) in [("asp_nl", &nl, Regime::NoiseLimited), ("asp_general", &il, Regime::General)] {
        let opts = SimOptions::new(regime, trials, 3).with_radius(RADIUS);
        group.bench_function(name, |b| b.iter(|| estimate_asp(&s.cfg, black_box(&s.uniform), &s.profile, &opts).unwrap()));
    }
    group.finish();
}

criterion_group!(benches, realization, estimates);
criterion_main!(benches);
