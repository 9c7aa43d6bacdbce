use criterion::{criterion_group, criterion_main, Criterion};
use std::hint::black_box;

use np_universal::classifiers::{exact_error_probs, Rule, RuleContext, RuleSpec};
use np_universal::sequential::{seq_simulate, SequentialConfig};
use np_universal::simulation::{presets, run_fixed_experiment};

fn experiments(c: &mut Criterion) {
    let mut g = c.benchmark_group("experiments");
    g.sample_size(10);

    let cfg = presets::example1_config(vec![200], 2000, 1);
    g.bench_function("fixed_example1_n200_2k_trials", |b| {
        b.iter(|| run_fixed_experiment(black_box(&cfg), 1))
    });

    let (p0, p1, _, e0) = presets::example1();
    let ctx = RuleContext {
        p0: p0.clone(),
        p1: p1.clone(),
        e0,
    };
    let interp = Rule::resolve(&RuleSpec::new("interp"), &ctx).unwrap();
    g.bench_function("exact_interp_n8_k16", |b| {
        b.iter(|| exact_error_probs(&interp, &p0, &p1, black_box(8), 16))
    });

    let (s0, s1, alpha) = presets::example3();
    let seq = SequentialConfig::new(100, alpha, false);
    g.bench_function("sequential_example3_n100_1k_trials", |b| {
        b.iter(|| seq_simulate(&s1, 1, &s0, &s1, black_box(&seq), 1000, 1, 1))
    });
    g.finish();
}

criterion_group!(benches, experiments);
criterion_main!(benches);
