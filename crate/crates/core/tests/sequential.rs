use np_universal::distributions::{cumulative, kl_divergence, perturb_type};
use np_universal::sequential::{
    seq_classifier_run, seq_classifier_run_frozen, seq_simulate, seq_thresholds, sprt_run,
    sprt_run_from, IidSource, Ratio, ReplaySource, SequentialConfig,
};
use np_universal::simulation::presets;
use np_universal::{Distribution, EmpiricalType, RandomStream};

fn bern(p: f64) -> Distribution {
    Distribution::bernoulli(p).unwrap()
}

fn draw(p: &Distribution, len: usize, seed: u64, id: u64) -> Vec<usize> {
    let cdf = cumulative(p);
    let mut s = RandomStream::new(seed, id);
    (0..len).map(|_| s.symbol(&cdf)).collect()
}

#[test]
fn frozen_training_reduces_to_sprt() {
    // P0 with no type of any length on it, so S_t never ties with n·D(P0||P1')
    let (p0, p1) = (bern(0.4537), bern(0.55));
    let n = 100u64;
    // training type equal to P1 exactly
    let train = EmpiricalType::new(vec![45, 55]).unwrap();
    let cfg = SequentialConfig::new(n, Ratio::integer(1).unwrap(), false);
    let p1p = perturb_type(&train, cfg.delta()).unwrap();
    let g0 = n as f64 * kl_divergence(p0.probs(), p1p.probs()).unwrap();
    let g1 = n as f64 * kl_divergence(p1.probs(), p0.probs()).unwrap();
    let mut decided = 0;
    for trial in 0..300 {
        let truth = if trial % 2 == 0 { &p0 } else { &p1 };
        let xs = draw(truth, cfg.budget() as usize, 4, trial);
        let a = seq_classifier_run_frozen(&mut ReplaySource(xs.iter().copied()), &train, &p0, &cfg)
            .unwrap();
        let b = sprt_run_from(
            &mut ReplaySource(xs.iter().copied()),
            &p0,
            &p1p,
            g0,
            g1,
            n,
            cfg.budget(),
        )
        .unwrap();
        assert_eq!((a.decision, a.tau), (b.decision, b.tau), "trial {trial}");
        assert!((a.final_statistic - b.final_statistic).abs() < 1e-9);
        decided += usize::from(a.decision.is_some());
    }
    assert!(decided > 250);
}

#[test]
fn sprt_crossing_rate_respects_wald_bound() {
    let (p0, p1) = (bern(0.45), bern(0.55));
    let trials = 20_000u64;
    let g0 = 50.0 * kl_divergence(p0.probs(), p1.probs()).unwrap();
    let mut rates = Vec::new();
    for g1 in [1.0f64, 2.0, 3.0] {
        let mut wrong = 0u64;
        for i in 0..trials {
            let mut src = IidSource::new(&p0, RandomStream::new(17, i));
            let out = sprt_run(&mut src, &p0, &p1, g0, g1, 100_000).unwrap();
            wrong += u64::from(out.decision == Some(1));
        }
        let r = wrong as f64 / trials as f64;
        let bound = (-g1).exp();
        assert!(
            r <= bound + 3.0 * (bound / trials as f64).sqrt(),
            "γ1 = {g1}: {r} > {bound}"
        );
        rates.push(r);
    }
    assert!(rates.windows(2).all(|w| w[1] < w[0]), "{rates:?}");
}

#[test]
fn alternating_stream_never_stops() {
    let (p0, p1) = (bern(0.4), bern(0.6));
    let mut src = ReplaySource([0usize, 1].into_iter().cycle());
    let out = sprt_run(&mut src, &p0, &p1, 1.0, 1.0, 10_001).unwrap();
    assert!(out.exhausted());
    assert_eq!(out.tau, 10_001);
    // the classifier exhausts its budget the same way when training and
    // test data alternate symmetrically around P0 = Bern(0.5); the
    // penalty keeps both thresholds away from the near-zero statistic
    let half = bern(0.5);
    let mut cfg = SequentialConfig::new(20, Ratio::integer(1).unwrap(), true);
    cfg.budget = Some(2000);
    let mut test = ReplaySource([0usize, 1].into_iter().cycle());
    let mut train = ReplaySource([1usize, 0].into_iter().cycle());
    let out = seq_classifier_run(&mut test, &mut train, &half, &cfg).unwrap();
    assert!(out.decision.is_none());
    assert_eq!(out.tau, 2000);
}

#[test]
fn stopping_time_never_below_n() {
    let (p0, p1, alpha) = presets::example3();
    for (n, penalty) in [(5u64, false), (30, false), (30, true)] {
        let mut cfg = SequentialConfig::new(n, alpha, penalty);
        cfg.budget = Some(200 * n);
        for i in 0..200 {
            let mut test = IidSource::new(&p1, RandomStream::new(2, 2 * i));
            let mut train = IidSource::new(&p1, RandomStream::new(2, 2 * i + 1));
            let out = seq_classifier_run(&mut test, &mut train, &p0, &cfg).unwrap();
            assert!(out.tau >= n);
        }
    }
}

#[test]
fn mean_stopping_time_near_block_length() {
    let (p0, p1, alpha) = presets::example3();
    let cfg = SequentialConfig::new(200, alpha, false);
    let s = seq_simulate(&p1, 1, &p0, &p1, &cfg, 10_000, 8, 1).unwrap();
    let ratio = s.mean_tau / 200.0;
    assert!((0.98..=1.3).contains(&ratio), "mean τ/n = {ratio}");
    assert!(s.tau_q10 >= 200);
}

#[test]
fn penalised_thresholds_increase_in_t() {
    let p0 = bern(0.45);
    let cfg = SequentialConfig::new(50, Ratio::integer(10).unwrap(), true);
    let tp = [0.46, 0.54];
    let freqs = [0.46, 0.54];
    let th: Vec<(f64, f64)> = (50..400)
        .map(|t| seq_thresholds(&cfg, &p0, &tp, &freqs, t))
        .collect();
    assert!(th.windows(2).all(|w| w[1].0 > w[0].0 && w[1].1 > w[0].1));
}

#[test]
fn threshold_ratio_at_block_length() {
    let (p0, p1) = (bern(0.45), bern(0.55));
    let n = 150u64;
    let cfg = SequentialConfig::new(n, Ratio::integer(10).unwrap(), true);
    let m = 10 * n;
    let train = EmpiricalType::new(vec![675, 825]).unwrap();
    let p1p = perturb_type(&train, cfg.delta()).unwrap();
    // training frequencies within total variation 1e-9 of P1
    let freqs = [0.45 + 4e-10, 0.55 - 4e-10];
    let (g0, _) = seq_thresholds(&cfg, &p0, p1p.probs(), &freqs, n);
    let expected = kl_divergence(p0.probs(), p1p.probs()).unwrap() + cfg.penalty(2, n) / n as f64;
    assert!((g0 / n as f64 - expected).abs() <= 1e-6);
    assert_eq!(train.len(), m);
    assert!(kl_divergence(p1.probs(), p1p.probs()).unwrap() < 1e-6);
}

#[test]
fn simulation_is_deterministic() {
    let (p0, p1, alpha) = presets::example3();
    let cfg = SequentialConfig::new(40, alpha, false);
    let a = seq_simulate(&p0, 0, &p0, &p1, &cfg, 2000, 99, 1).unwrap();
    let b = seq_simulate(&p0, 0, &p0, &p1, &cfg, 2000, 99, 4).unwrap();
    assert_eq!(a, b);
    let one = seq_simulate(&p0, 0, &p0, &p1, &cfg, 1, 99, 1).unwrap();
    assert!(one.error_rate == 0.0 || one.error_rate == 1.0);
    assert_eq!(one.exponent.is_none(), one.errors == 0);
}

#[test]
fn exponent_product_at_desk_scale() {
    let (p0, p1, alpha) = presets::example3();
    let rows = np_universal::simulation::run_sequential_experiment(
        &p0,
        &p1,
        alpha,
        false,
        &[150],
        100_000,
        15,
        1,
    )
    .unwrap();
    let r = &rows[0];
    assert!(!r.censored0 && !r.censored1);
    let a = alpha.value();
    let limit = kl_divergence(p0.probs(), p1.probs()).unwrap()
        * np_universal::distributions::renyi_divergence(a / (1.0 + a), p1.probs(), p0.probs())
            .unwrap();
    assert!(
        r.exp0 * r.exp1 >= 0.9 * limit,
        "{} * {} vs {limit}",
        r.exp0,
        r.exp1
    );
}
