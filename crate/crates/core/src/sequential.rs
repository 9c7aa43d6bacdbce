//! Wald's SPRT and the sequential plug-in classifier.
//!
//! Both rules pull symbols from [`SymbolSource`]s so RNG-backed
//! generation and file replay are interchangeable. Running out of budget
//! is reported as an outcome with no decision.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::distributions::{
    cumulative, kl, perturb_counts, Distribution, EmpiricalType, RandomStream,
};
use crate::error::{Error, Result};

/// Pull-based source of alphabet symbols.
pub trait SymbolSource {
    fn next_symbol(&mut self) -> Option<usize>;
}

/// i.i.d. symbols from a distribution.
pub struct IidSource {
    cdf: Vec<f64>,
    stream: RandomStream,
}

impl IidSource {
    pub fn new(p: &Distribution, stream: RandomStream) -> Self {
        Self {
            cdf: cumulative(p),
            stream,
        }
    }
}

impl SymbolSource for IidSource {
    fn next_symbol(&mut self) -> Option<usize> {
        Some(self.stream.symbol(&self.cdf))
    }
}

/// Replays any iterator of symbols (a file, a fixed vector, a cycle).
pub struct ReplaySource<I>(pub I);

impl<I: Iterator<Item = usize>> SymbolSource for ReplaySource<I> {
    fn next_symbol(&mut self) -> Option<usize> {
        self.0.next()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SequentialOutcome {
    /// `None` when the budget ran out first.
    pub decision: Option<u8>,
    pub tau: u64,
    pub final_statistic: f64,
}

impl SequentialOutcome {
    pub fn exhausted(&self) -> bool {
        self.decision.is_none()
    }
}

fn pull(src: &mut dyn SymbolSource, k: usize) -> Result<usize> {
    let s = src
        .next_symbol()
        .ok_or_else(|| Error::InvalidArgument("symbol source ran dry before the budget".into()))?;
    if s >= k {
        return Err(Error::SymbolOutOfRange {
            symbol: s,
            alphabet_size: k,
        });
    }
    Ok(s)
}

/// SPRT with `S_t = Σ ln(P0(x_i)/P1(x_i))`: decide 0 at the first `t >= 1`
/// with `S_t >= gamma0`, decide 1 when `S_t <= -gamma1` (the first check
/// wins if both hold).
pub fn sprt_run(
    source: &mut dyn SymbolSource,
    p0: &Distribution,
    p1: &Distribution,
    gamma0: f64,
    gamma1: f64,
    budget: u64,
) -> Result<SequentialOutcome> {
    sprt_run_from(source, p0, p1, gamma0, gamma1, 1, budget)
}

/// [`sprt_run`] with the threshold checks starting at `first_check`.
pub fn sprt_run_from(
    source: &mut dyn SymbolSource,
    p0: &Distribution,
    p1: &Distribution,
    gamma0: f64,
    gamma1: f64,
    first_check: u64,
    budget: u64,
) -> Result<SequentialOutcome> {
    let k = p0.alphabet_size();
    if p1.alphabet_size() != k {
        return Err(Error::DimensionMismatch {
            left: k,
            right: p1.alphabet_size(),
        });
    }
    if !(gamma0 > 0.0 && gamma1 > 0.0) {
        return Err(Error::InvalidArgument(
            "SPRT thresholds must be positive".into(),
        ));
    }
    let llr: Vec<f64> = p0
        .probs()
        .iter()
        .zip(p1.probs())
        .map(|(a, b)| (a / b).ln())
        .collect();
    let mut s = 0.0;
    for t in 1..=budget {
        s += llr[pull(source, k)?];
        if t < first_check {
            continue;
        }
        if s >= gamma0 {
            return Ok(SequentialOutcome {
                decision: Some(0),
                tau: t,
                final_statistic: s,
            });
        }
        if s <= -gamma1 {
            return Ok(SequentialOutcome {
                decision: Some(1),
                tau: t,
                final_statistic: s,
            });
        }
    }
    Ok(SequentialOutcome {
        decision: None,
        tau: budget,
        final_statistic: s,
    })
}

/// Positive rational `num/den`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Ratio {
    pub num: u64,
    pub den: u64,
}

impl Ratio {
    pub fn new(num: u64, den: u64) -> Result<Self> {
        if num == 0 || den == 0 {
            return Err(Error::InvalidArgument(format!(
                "ratio {num}/{den} must be positive"
            )));
        }
        Ok(Self { num, den })
    }

    pub fn integer(v: u64) -> Result<Self> {
        Self::new(v, 1)
    }

    /// Closest ratio with denominator at most 10⁶.
    pub fn from_f64(x: f64) -> Result<Self> {
        if !(x > 0.0) || !x.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "ratio {x} must be positive"
            )));
        }
        let den = 1_000_000u64;
        let num = (x * den as f64).round() as u64;
        let g = gcd(num, den);
        Self::new(num / g, den / g)
    }

    pub fn value(&self) -> f64 {
        self.num as f64 / self.den as f64
    }

    /// `⌊t·num/den⌋`.
    pub fn floor_mul(&self, t: u64) -> u64 {
        ((t as u128 * self.num as u128) / self.den as u128) as u64
    }

    /// `round(t·num/den)`, halves rounded up.
    pub fn round_mul(&self, t: u64) -> u64 {
        ((2 * t as u128 * self.num as u128 + self.den as u128) / (2 * self.den as u128)) as u64
    }
}

fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

/// Default budget in multiples of the block length.
pub const DEFAULT_BUDGET_BLOCKS: u64 = 50;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SequentialConfig {
    /// Design block length `n`; checks start at `t = n`.
    pub n: u64,
    /// Training symbols per test symbol.
    pub alpha: Ratio,
    /// Penalty coefficient; `None` means `4|X| + 4`.
    #[serde(default)]
    pub penalty_coefficient: Option<f64>,
    pub penalty_enabled: bool,
    /// Perturbation `δ = n^-delta_exponent`.
    #[serde(default = "default_delta_exponent")]
    pub delta_exponent: f64,
    /// Step budget; `None` means `50·n`.
    #[serde(default)]
    pub budget: Option<u64>,
}

fn default_delta_exponent() -> f64 {
    2.0
}

impl SequentialConfig {
    pub fn new(n: u64, alpha: Ratio, penalty_enabled: bool) -> Self {
        Self {
            n,
            alpha,
            penalty_coefficient: None,
            penalty_enabled,
            delta_exponent: 2.0,
            budget: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return Err(Error::InvalidArgument("block length must be >= 1".into()));
        }
        Ratio::new(self.alpha.num, self.alpha.den)?;
        if self.alpha.floor_mul(self.n) == 0 {
            return Err(Error::InvalidArgument(
                "alpha·n must be >= 1 so a training type exists at t = n".into(),
            ));
        }
        if let Some(c) = self.penalty_coefficient {
            if !(c >= 0.0) {
                return Err(Error::InvalidArgument(format!(
                    "penalty coefficient {c} must be >= 0"
                )));
            }
        }
        if !(self.delta_exponent > 1.0) {
            return Err(Error::InvalidArgument("delta exponent must be > 1".into()));
        }
        if self.budget() < self.n {
            return Err(Error::InvalidArgument("budget must be >= n".into()));
        }
        Ok(())
    }

    pub fn budget(&self) -> u64 {
        self.budget.unwrap_or(DEFAULT_BUDGET_BLOCKS * self.n)
    }

    pub fn delta(&self) -> f64 {
        (self.n as f64).powf(-self.delta_exponent).min(0.5)
    }

    /// `pen·ln(t+1)`, zero when disabled.
    pub fn penalty(&self, alphabet_size: usize, t: u64) -> f64 {
        if !self.penalty_enabled {
            return 0.0;
        }
        let c = self
            .penalty_coefficient
            .unwrap_or(4.0 * alphabet_size as f64 + 4.0);
        c * ((t + 1) as f64).ln()
    }
}

/// Thresholds `(γ0_t, γ1_t)` for the current perturbed and raw training types.
pub fn seq_thresholds(
    cfg: &SequentialConfig,
    p0: &Distribution,
    t_prime: &[f64],
    train_freqs: &[f64],
    t: u64,
) -> (f64, f64) {
    let pen = cfg.penalty(p0.alphabet_size(), t);
    let n = cfg.n as f64;
    (
        n * kl(p0.probs(), t_prime) + pen,
        n * kl(train_freqs, p0.probs()) + pen,
    )
}

enum Training<'a> {
    Stream(&'a mut dyn SymbolSource),
    Frozen(&'a EmpiricalType),
}

fn seq_core(
    test: &mut dyn SymbolSource,
    mut training: Training<'_>,
    p0: &Distribution,
    cfg: &SequentialConfig,
) -> Result<SequentialOutcome> {
    cfg.validate()?;
    let k = p0.alphabet_size();
    let ln_p0 = p0.ln_probs();
    let delta = cfg.delta();
    let mut tx = vec![0u64; k];
    let mut tr = vec![0u64; k];
    if let Training::Frozen(t) = &training {
        if t.alphabet_size() != k {
            return Err(Error::DimensionMismatch {
                left: t.alphabet_size(),
                right: k,
            });
        }
        tr.copy_from_slice(t.counts());
    }
    let mut s = 0.0;
    for t in 1..=cfg.budget() {
        tx[pull(test, k)?] += 1;
        if let Training::Stream(src) = &mut training {
            let need = cfg.alpha.floor_mul(t) - cfg.alpha.floor_mul(t - 1);
            for _ in 0..need {
                tr[pull(*src, k)?] += 1;
            }
        }
        if t < cfg.n {
            continue;
        }
        let m: u64 = tr.iter().sum();
        let t_prime = perturb_counts(&tr, m, delta);
        let tp = t_prime.probs();
        // S_t = t Σ_a T̂x(a) ln(P0(a)/T'(a))
        s = tx
            .iter()
            .enumerate()
            .map(|(a, &c)| c as f64 * (ln_p0[a] - tp[a].ln()))
            .sum();
        let train_freqs: Vec<f64> = tr.iter().map(|&c| c as f64 / m as f64).collect();
        let (g0, g1) = seq_thresholds(cfg, p0, tp, &train_freqs, t);
        if s >= g0 {
            return Ok(SequentialOutcome {
                decision: Some(0),
                tau: t,
                final_statistic: s,
            });
        }
        if s <= -g1 {
            return Ok(SequentialOutcome {
                decision: Some(1),
                tau: t,
                final_statistic: s,
            });
        }
    }
    Ok(SequentialOutcome {
        decision: None,
        tau: cfg.budget(),
        final_statistic: s,
    })
}

/// The sequential plug-in classifier. At every `t >= n` the perturbed
/// training type `T'` is rebuilt from the whole training prefix
/// (`⌊α t⌋` symbols), `S_t = Σ_{i<=t} ln(P0(x_i)/T'(x_i))` is evaluated
/// against the current `T'`, and the rule stops with 0 when
/// `S_t >= n D(P0||T') + pen(t)` or with 1 when
/// `S_t <= -(n D(T̂X||P0) + pen(t))`.
pub fn seq_classifier_run(
    test: &mut dyn SymbolSource,
    train: &mut dyn SymbolSource,
    p0: &Distribution,
    cfg: &SequentialConfig,
) -> Result<SequentialOutcome> {
    seq_core(test, Training::Stream(train), p0, cfg)
}

/// [`seq_classifier_run`] with the training type held fixed.
pub fn seq_classifier_run_frozen(
    test: &mut dyn SymbolSource,
    train: &EmpiricalType,
    p0: &Distribution,
    cfg: &SequentialConfig,
) -> Result<SequentialOutcome> {
    seq_core(test, Training::Frozen(train), p0, cfg)
}

/// Aggregate of [`seq_simulate`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SequentialSummary {
    pub n: u64,
    pub hypothesis: u8,
    pub trials: u64,
    /// Wrong decisions plus budget exhaustions.
    pub errors: u64,
    pub exhausted: u64,
    pub error_rate: f64,
    pub std_err: f64,
    /// `-ln(error_rate)/n`; `None` when no error was observed.
    pub exponent: Option<f64>,
    /// One-sided 95% upper bound on the error rate when no error was seen.
    pub error_upper_bound: Option<f64>,
    pub mean_tau: f64,
    pub tau_q10: u64,
    pub tau_q50: u64,
    pub tau_q90: u64,
}

/// Stream id for (trial, hypothesis, role) so that every trial of every
/// scenario owns distinct keystreams.
fn seq_stream_id(trial: u64, hypothesis: u8, role: u64) -> u64 {
    (trial << 2) | ((hypothesis as u64) << 1) | role
}

/// One-sided 95% Clopper-Pearson upper limit for zero successes.
pub fn zero_event_upper_bound(trials: u64) -> f64 {
    1.0 - 0.05f64.powf(1.0 / trials as f64)
}

/// Runs the sequential classifier `trials` times with test data from
/// `p_truth` and training data from `p1_train`, and tallies errors
/// against `hypothesis`.
#[allow(clippy::too_many_arguments)]
pub fn seq_simulate(
    p_truth: &Distribution,
    hypothesis: u8,
    p0: &Distribution,
    p1_train: &Distribution,
    cfg: &SequentialConfig,
    trials: u64,
    seed: u64,
    workers: usize,
) -> Result<SequentialSummary> {
    if trials == 0 {
        return Err(Error::InvalidArgument("trials must be >= 1".into()));
    }
    if hypothesis > 1 {
        return Err(Error::InvalidArgument(
            "hypothesis label must be 0 or 1".into(),
        ));
    }
    cfg.validate()?;
    let run = |i: u64| -> Result<SequentialOutcome> {
        let mut test = IidSource::new(
            p_truth,
            RandomStream::new(seed, seq_stream_id(i, hypothesis, 0)),
        );
        let mut train = IidSource::new(
            p1_train,
            RandomStream::new(seed, seq_stream_id(i, hypothesis, 1)),
        );
        seq_classifier_run(&mut test, &mut train, p0, cfg)
    };
    let outcomes: Vec<SequentialOutcome> = crate::simulation::with_workers(workers, || {
        (0..trials)
            .into_par_iter()
            .map(run)
            .collect::<Result<Vec<_>>>()
    })?;
    let exhausted = outcomes.iter().filter(|o| o.exhausted()).count() as u64;
    let errors = outcomes
        .iter()
        .filter(|o| o.decision != Some(hypothesis))
        .count() as u64;
    let mut taus: Vec<u64> = outcomes.iter().map(|o| o.tau).collect();
    taus.sort_unstable();
    let q = |p: f64| taus[((p * (trials - 1) as f64).round() as usize).min(taus.len() - 1)];
    let rate = errors as f64 / trials as f64;
    let (exponent, bound) = if errors == 0 {
        (None, Some(zero_event_upper_bound(trials)))
    } else {
        (Some(-rate.ln() / cfg.n as f64), None)
    };
    Ok(SequentialSummary {
        n: cfg.n,
        hypothesis,
        trials,
        errors,
        exhausted,
        error_rate: rate,
        std_err: (rate * (1.0 - rate) / trials as f64).sqrt(),
        exponent,
        error_upper_bound: bound,
        mean_tau: taus.iter().sum::<u64>() as f64 / trials as f64,
        tau_q10: q(0.1),
        tau_q50: q(0.5),
        tau_q90: q(0.9),
    })
}
