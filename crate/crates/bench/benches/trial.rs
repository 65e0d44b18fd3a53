use criterion::{criterion_group, criterion_main, Criterion};

use uhbf_core::harness::{draw_trial_channel, run_trial};
use uhbf_core::ExperimentConfig;

fn desk_trial(c: &mut Criterion) {
    let cfg = ExperimentConfig::desk().with_seed(1);
    let mut group = c.benchmark_group("desk");
    group.sample_size(10);
    group.bench_function("channel_draw", |b| b.iter(|| draw_trial_channel(&cfg, 0).unwrap()));
    group.bench_function("trial_M8_0dBm", |b| b.iter(|| run_trial(&cfg, 8, 0.0, 0).unwrap()));
    group.finish();
}

criterion_group!(benches, desk_trial);
criterion_main!(benches);
