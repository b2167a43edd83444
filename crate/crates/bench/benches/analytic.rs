use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};
use hybridcache::asp::nl_constants;
use hybridcache::{asp_il, asp_nl, association_prob_mu, ServingDistanceModel};
use hybridcache_bench::Scenario;

fn association(c: &mut Criterion) {
    let nl = Scenario::noise_limited();
    let il = Scenario::interference_limited();
    c.bench_function("association/baseline", |b| b.iter(|| association_prob_mu(black_box(&nl.cfg)).unwrap()));
    c.bench_function("association/dense_mu", |b| b.iter(|| association_prob_mu(black_box(&il.cfg)).unwrap()));
}

fn noise_limited(c: &mut Criterion) {
    let s = Scenario::noise_limited();
    c.bench_function("nl/constants", |b| b.iter(|| nl_constants(black_box(&s.cfg), 10).unwrap()));
    c.bench_function("nl/asp", |b| b.iter(|| asp_nl(&s.cfg, black_box(&s.uniform), &s.profile).unwrap()));
}

fn bounds(c: &mut Criterion) {
    let s = Scenario::interference_limited();
    let mut group = c.benchmark_group("il_bound");
    for (name, sdm) in [
        ("mean_nearest_station", ServingDistanceModel::MeanNearestStation),
        ("mean_nearest_holder", ServingDistanceModel::MeanNearestHolder),
        ("contact_averaged", ServingDistanceModel::ContactAveraged),
    ] {
        group.bench_function(name, |b| b.iter(|| asp_il(&s.cfg, black_box(&s.uniform), &s.profile, &sdm).unwrap()));
    }
    group.finish();
}

criterion_group!(benches, association, noise_limited, bounds);
criterion_main!(benches);
