//! Fixed-length Monte Carlo harness, CSV output and the example presets.
//!
//! Trial `i` at block length `n` owns the random stream `(seed, n·2³² + i)`
//! and draws, in order, the training type (`k = round(α n)` symbols from
//! `P1`), a test type from `P0` and a test type from `P1`. Every rule sees
//! the same three types. Trials are grouped in fixed blocks whose integer
//! tallies are summed, so results do not depend on the worker count.

use std::fmt::Write as _;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bounds::alpha_lower;
use crate::classifiers::{Rule, RuleContext, RuleSpec};
use crate::distributions::{sample_type, Distribution, RandomStream};
use crate::error::{Error, Result};
use crate::exponents::optimal_tradeoff;
use crate::sequential::{seq_simulate, zero_event_upper_bound, Ratio, SequentialConfig};

/// Runs `f` on a dedicated pool of `workers` threads.
pub fn with_workers<T: Send>(workers: usize, f: impl FnOnce() -> T + Send) -> T {
    match rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
    {
        Ok(pool) => pool.install(f),
        Err(_) => f(),
    }
}

impl FromStr for Ratio {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if let Some((a, b)) = s.split_once('/') {
            let parse = |x: &str| {
                x.trim()
                    .parse::<u64>()
                    .map_err(|_| Error::InvalidArgument(format!("bad ratio '{s}'")))
            };
            return Ratio::new(parse(a)?, parse(b)?);
        }
        if let Ok(v) = s.parse::<u64>() {
            return Ratio::integer(v);
        }
        let v: f64 = s
            .parse()
            .map_err(|_| Error::InvalidArgument(format!("bad ratio '{s}'")))?;
        Ratio::from_f64(v)
    }
}

impl std::fmt::Display for Ratio {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        if self.den == 1 {
            write!(f, "{}", self.num)
        } else {
            write!(f, "{}/{}", self.num, self.den)
        }
    }
}

/// Configuration of a fixed-length experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub p0: Distribution,
    pub p1: Distribution,
    pub e0: f64,
    pub n_grid: Vec<u64>,
    #[serde(with = "ratio_string")]
    pub alpha: Ratio,
    pub trials: u64,
    pub rules: Vec<RuleSpec>,
    pub master_seed: u64,
}

mod ratio_string {
    use super::Ratio;
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(r: &Ratio, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&r.to_string())
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Ratio, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Text(String),
            Number(f64),
        }
        let r = match Raw::deserialize(d)? {
            Raw::Text(s) => s.parse(),
            Raw::Number(x) => x.to_string().parse(),
        };
        r.map_err(serde::de::Error::custom)
    }
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<Vec<Rule>> {
        if self.p0.alphabet_size() != self.p1.alphabet_size() {
            return Err(Error::DimensionMismatch {
                left: self.p0.alphabet_size(),
                right: self.p1.alphabet_size(),
            });
        }
        if self.trials == 0 || self.trials > u32::MAX as u64 {
            return Err(Error::InvalidArgument(format!(
                "trials {} outside [1, 2^32)",
                self.trials
            )));
        }
        if self.n_grid.is_empty() || self.n_grid.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidArgument(
                "n grid must be non-empty and strictly increasing".into(),
            ));
        }
        if self.n_grid[0] == 0 || *self.n_grid.last().unwrap() >= 1 << 31 {
            return Err(Error::InvalidArgument("n must lie in [1, 2^31)".into()));
        }
        if self.alpha.round_mul(self.n_grid[0]) == 0 {
            return Err(Error::InvalidArgument("round(alpha·n) must be >= 1".into()));
        }
        if !(self.e0 > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "E0 {} must be > 0",
                self.e0
            )));
        }
        if self.rules.is_empty() {
            return Err(Error::InvalidArgument("no rules given".into()));
        }
        let ctx = RuleContext {
            p0: self.p0.clone(),
            p1: self.p1.clone(),
            e0: self.e0,
        };
        self.rules.iter().map(|s| Rule::resolve(s, &ctx)).collect()
    }
}

/// One `(rule, n)` cell of a fixed-length experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentRow {
    pub rule: String,
    pub n: u64,
    pub k: u64,
    pub trials: u64,
    pub errors0: u64,
    pub errors1: u64,
    /// Error rate, or its 95% upper bound when censored.
    pub eps0: f64,
    pub eps1: f64,
    pub se0: f64,
    pub se1: f64,
    pub exp0: f64,
    pub exp1: f64,
    pub prefac0: f64,
    pub prefac1: f64,
    pub censored0: bool,
    pub censored1: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentResult {
    /// `E1*(E0)`, the exponent used by `prefac1`.
    pub e1_star: f64,
    pub rows: Vec<ExperimentRow>,
}

pub const FIXED_CSV_HEADER: &str =
    "rule,n,k,trials,eps0,eps1,se0,se1,exp0,exp1,prefac0,prefac1,censored0,censored1";

impl ExperimentResult {
    pub fn row(&self, rule: &str, n: u64) -> Option<&ExperimentRow> {
        self.rows.iter().find(|r| r.rule == rule && r.n == n)
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from(FIXED_CSV_HEADER);
        out.push('\n');
        for r in &self.rows {
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
                r.rule,
                r.n,
                r.k,
                r.trials,
                fmt_sig(r.eps0),
                fmt_sig(r.eps1),
                fmt_sig(r.se0),
                fmt_sig(r.se1),
                fmt_sig(r.exp0),
                fmt_sig(r.exp1),
                fmt_sig(r.prefac0),
                fmt_sig(r.prefac1),
                u8::from(r.censored0),
                u8::from(r.censored1)
            );
        }
        out
    }
}

/// Decimal with 12 significant digits, trailing zeros trimmed.
pub fn fmt_sig(x: f64) -> String {
    if x == 0.0 {
        return "0".into();
    }
    if !x.is_finite() {
        return format!("{x}");
    }
    let sci = format!("{:.11e}", x);
    let (mant, exp) = sci.split_once('e').expect("scientific format");
    let exp: i32 = exp.parse().expect("exponent");
    let trim = |s: String| -> String {
        if s.contains('.') {
            s.trim_end_matches('0').trim_end_matches('.').to_string()
        } else {
            s
        }
    };
    if !(-5..12).contains(&exp) {
        format!("{}e{}", trim(mant.to_string()), exp)
    } else {
        let decimals = (11 - exp).max(0) as usize;
        trim(format!("{:.*}", decimals, x))
    }
}

/// `ln(eps) + n E + ln(n)/2`: the log of `eps` relative to
/// `n^{-1/2} e^{-nE}`.
pub fn prefactor_diagnostic(eps: f64, n: u64, e: f64) -> Result<f64> {
    if !(eps > 0.0 && eps <= 1.0) {
        return Err(Error::InvalidArgument(format!(
            "error rate {eps} must lie in (0,1]"
        )));
    }
    Ok(eps.ln() + n as f64 * e + 0.5 * (n as f64).ln())
}

/// Least-squares slope of `y` against `ln n`.
pub fn ln_n_slope(points: &[(u64, f64)]) -> f64 {
    let m = points.len() as f64;
    let xs: Vec<f64> = points.iter().map(|(n, _)| (*n as f64).ln()).collect();
    let mx = xs.iter().sum::<f64>() / m;
    let my = points.iter().map(|(_, y)| y).sum::<f64>() / m;
    let sxy: f64 = xs
        .iter()
        .zip(points)
        .map(|(x, (_, y))| (x - mx) * (y - my))
        .sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    sxy / sxx
}

const BLOCK: u64 = 1024;

fn stream_id(n: u64, trial: u64) -> u64 {
    (n << 32) | trial
}

/// Error tallies `[errors0, errors1]` per rule for trials `lo..hi`.
fn tally_block(
    cfg: &ExperimentConfig,
    rules: &[Rule],
    n: u64,
    k: u64,
    lo: u64,
    hi: u64,
) -> Result<Vec<[u64; 2]>> {
    let mut t = vec![[0u64; 2]; rules.len()];
    let p0 = cfg.p0.probs();
    for i in lo..hi {
        let mut s = RandomStream::new(cfg.master_seed, stream_id(n, i));
        let train = sample_type(&cfg.p1, k, &mut s)?;
        let x0 = sample_type(&cfg.p0, n, &mut s)?;
        let x1 = sample_type(&cfg.p1, n, &mut s)?;
        for (r, tally) in rules.iter().zip(t.iter_mut()) {
            let bound = r.trained(train.counts(), k, n, p0);
            if bound.decide(x0.counts()).hypothesis == 1 {
                tally[0] += 1;
            }
            if bound.decide(x1.counts()).hypothesis == 0 {
                tally[1] += 1;
            }
        }
    }
    Ok(t)
}

/// Rate estimate, standard error and censoring flag from an error count.
fn rate(errors: u64, trials: u64) -> (f64, f64, bool) {
    if errors == 0 {
        return (zero_event_upper_bound(trials), 0.0, true);
    }
    let p = errors as f64 / trials as f64;
    (p, (p * (1.0 - p) / trials as f64).sqrt(), false)
}

pub fn run_fixed_experiment(cfg: &ExperimentConfig, workers: usize) -> Result<ExperimentResult> {
    let rules = cfg.validate()?;
    let e1_star = optimal_tradeoff(&cfg.p0, &cfg.p1, cfg.e0)?.e1;
    let mut rows = Vec::new();
    for &n in &cfg.n_grid {
        let k = cfg.alpha.round_mul(n);
        let blocks = cfg.trials.div_ceil(BLOCK);
        let parts: Vec<Vec<[u64; 2]>> = with_workers(workers, || {
            (0..blocks)
                .into_par_iter()
                .map(|b| {
                    tally_block(
                        cfg,
                        &rules,
                        n,
                        k,
                        b * BLOCK,
                        ((b + 1) * BLOCK).min(cfg.trials),
                    )
                })
                .collect::<Result<Vec<_>>>()
        })?;
        for (ri, spec) in cfg.rules.iter().enumerate() {
            let e0c: u64 = parts.iter().map(|p| p[ri][0]).sum();
            let e1c: u64 = parts.iter().map(|p| p[ri][1]).sum();
            let (eps0, se0, c0) = rate(e0c, cfg.trials);
            let (eps1, se1, c1) = rate(e1c, cfg.trials);
            rows.push(ExperimentRow {
                rule: spec.to_string(),
                n,
                k,
                trials: cfg.trials,
                errors0: e0c,
                errors1: e1c,
                eps0,
                eps1,
                se0,
                se1,
                exp0: -eps0.ln() / n as f64,
                exp1: -eps1.ln() / n as f64,
                prefac0: prefactor_diagnostic(eps0, n, cfg.e0)?,
                prefac1: prefactor_diagnostic(eps1, n, e1_star)?,
                censored0: c0,
                censored1: c1,
            });
        }
    }
    Ok(ExperimentResult { e1_star, rows })
}

/// `(β, alpha_lower)` over an increasing grid in `(0, 1]`.
pub fn run_alpha_sweep(
    p0: &Distribution,
    p1: &Distribution,
    e0: f64,
    beta_grid: &[f64],
) -> Result<Vec<(f64, f64)>> {
    if beta_grid.is_empty() {
        return Err(Error::InvalidArgument("beta grid is empty".into()));
    }
    if beta_grid.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidArgument("grid must be increasing".into()));
    }
    if beta_grid.iter().any(|b| !(*b > 0.0 && *b <= 1.0)) {
        return Err(Error::InvalidArgument("beta grid must lie in (0,1]".into()));
    }
    beta_grid
        .iter()
        .map(|&b| Ok((b, alpha_lower(p0, p1, e0, b)?)))
        .collect()
}

pub const SWEEP_CSV_HEADER: &str = "beta,alpha_lower";

pub fn sweep_to_csv(rows: &[(f64, f64)]) -> String {
    let mut out = String::from(SWEEP_CSV_HEADER);
    out.push('\n');
    for (b, a) in rows {
        let _ = writeln!(out, "{},{}", fmt_sig(*b), fmt_sig(*a));
    }
    out
}

/// Two-sided sequential experiment at one block length.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SequentialRow {
    pub n: u64,
    pub trials: u64,
    pub eps0: f64,
    pub eps1: f64,
    pub se0: f64,
    pub se1: f64,
    pub exp0: f64,
    pub exp1: f64,
    pub mean_tau0_over_n: f64,
    pub mean_tau1_over_n: f64,
    pub exhausted0: u64,
    pub exhausted1: u64,
    pub censored0: bool,
    pub censored1: bool,
}

pub const SEQUENTIAL_CSV_HEADER: &str = "n,trials,eps0,eps1,se0,se1,exp0,exp1,mean_tau0_over_n,mean_tau1_over_n,exhausted0,exhausted1,censored0,censored1";

/// Runs the sequential classifier under both hypotheses (training always
/// from `p1`) for every block length in `n_grid`.
#[allow(clippy::too_many_arguments)]
pub fn run_sequential_experiment(
    p0: &Distribution,
    p1: &Distribution,
    alpha: Ratio,
    penalty_enabled: bool,
    n_grid: &[u64],
    trials: u64,
    seed: u64,
    workers: usize,
) -> Result<Vec<SequentialRow>> {
    if n_grid.is_empty() || n_grid.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidArgument(
            "n grid must be non-empty and strictly increasing".into(),
        ));
    }
    n_grid
        .iter()
        .map(|&n| {
            let cfg = SequentialConfig::new(n, alpha, penalty_enabled);
            // distinct seeds per n keep the block lengths independent
            let s = seed ^ n.wrapping_mul(0x9E37_79B9_7F4A_7C15);
            let h0 = seq_simulate(p0, 0, p0, p1, &cfg, trials, s, workers)?;
            let h1 = seq_simulate(p1, 1, p0, p1, &cfg, trials, s, workers)?;
            let (eps0, se0, c0) = rate(h0.errors, trials);
            let (eps1, se1, c1) = rate(h1.errors, trials);
            Ok(SequentialRow {
                n,
                trials,
                eps0,
                eps1,
                se0,
                se1,
                exp0: -eps0.ln() / n as f64,
                exp1: -eps1.ln() / n as f64,
                mean_tau0_over_n: h0.mean_tau / n as f64,
                mean_tau1_over_n: h1.mean_tau / n as f64,
                exhausted0: h0.exhausted,
                exhausted1: h1.exhausted,
                censored0: c0,
                censored1: c1,
            })
        })
        .collect()
}

pub fn sequential_to_csv(rows: &[SequentialRow]) -> String {
    let mut out = String::from(SEQUENTIAL_CSV_HEADER);
    out.push('\n');
    for r in rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
            r.n,
            r.trials,
            fmt_sig(r.eps0),
            fmt_sig(r.eps1),
            fmt_sig(r.se0),
            fmt_sig(r.se1),
            fmt_sig(r.exp0),
            fmt_sig(r.exp1),
            fmt_sig(r.mean_tau0_over_n),
            fmt_sig(r.mean_tau1_over_n),
            r.exhausted0,
            r.exhausted1,
            u8::from(r.censored0),
            u8::from(r.censored1)
        );
    }
    out
}

/// Named example setups.
pub mod presets {
    use super::*;

    /// Ternary pair with `α = 2`, `E0 = 0.005`.
    pub fn example1() -> (Distribution, Distribution, Ratio, f64) {
        (
            Distribution::new(vec![0.3, 0.3, 0.4]).expect("valid"),
            Distribution::new(vec![0.35, 0.35, 0.3]).expect("valid"),
            Ratio { num: 2, den: 1 },
            0.005,
        )
    }

    /// `Bern(0.3)` vs `Bern(0.4)`, `E0 = 0.005`.
    pub fn example2() -> (Distribution, Distribution, f64) {
        (
            Distribution::bernoulli(0.3).expect("valid"),
            Distribution::bernoulli(0.4).expect("valid"),
            0.005,
        )
    }

    /// `Bern(0.45)` vs `Bern(0.55)`, `α = 10`.
    pub fn example3() -> (Distribution, Distribution, Ratio) {
        (
            Distribution::bernoulli(0.45).expect("valid"),
            Distribution::bernoulli(0.55).expect("valid"),
            Ratio { num: 10, den: 1 },
        )
    }

    pub const FIXED_DEFAULT_TRIALS: u64 = 1_000_000;
    pub const SEQUENTIAL_DEFAULT_TRIALS: u64 = 100_000;

    pub fn fig2_grid() -> Vec<u64> {
        [20, 40, 60, 80]
            .into_iter()
            .chain((1..=20).map(|i| 100 * i))
            .collect()
    }

    pub fn fig3_grid() -> Vec<u64> {
        [20, 40, 60, 80]
            .into_iter()
            .chain((1..=15).map(|i| 100 * i))
            .collect()
    }

    pub fn fig5_grid() -> Vec<u64> {
        (2..=25)
            .map(|i| 10 * i)
            .chain((6..=14).map(|i| 50 * i))
            .collect()
    }

    pub fn fig6_grid() -> Vec<f64> {
        (1..=100).map(|i| i as f64 / 100.0).collect()
    }

    /// The three fixed-length rules compared on Example 1.
    pub fn example1_rules() -> Vec<RuleSpec> {
        vec![
            RuleSpec::new("interp"),
            RuleSpec::new("lrt"),
            RuleSpec::new("glrt"),
        ]
    }

    pub fn example1_config(n_grid: Vec<u64>, trials: u64, seed: u64) -> ExperimentConfig {
        let (p0, p1, alpha, e0) = example1();
        ExperimentConfig {
            p0,
            p1,
            e0,
            n_grid,
            alpha,
            trials,
            rules: example1_rules(),
            master_seed: seed,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Figure {
    Fig2,
    Fig3,
    Fig5,
    Fig6,
}

impl FromStr for Figure {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "fig2" => Ok(Figure::Fig2),
            "fig3" => Ok(Figure::Fig3),
            "fig5" => Ok(Figure::Fig5),
            "fig6" => Ok(Figure::Fig6),
            other => Err(Error::InvalidArgument(format!("unknown figure '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, Default)]
pub struct FigureOptions {
    pub trials: Option<u64>,
    pub seed: u64,
    pub workers: usize,
    pub n_grid: Option<Vec<u64>>,
    /// Sequential penalty; the fig5 preset runs without it.
    pub penalty: Option<bool>,
}

/// Full CSV for a named figure preset.
pub fn figure_csv(fig: Figure, opts: &FigureOptions) -> Result<String> {
    match fig {
        Figure::Fig2 | Figure::Fig3 => {
            let grid = opts.n_grid.clone().unwrap_or_else(|| {
                if fig == Figure::Fig2 {
                    presets::fig2_grid()
                } else {
                    presets::fig3_grid()
                }
            });
            let cfg = presets::example1_config(
                grid,
                opts.trials.unwrap_or(presets::FIXED_DEFAULT_TRIALS),
                opts.seed,
            );
            Ok(run_fixed_experiment(&cfg, opts.workers)?.to_csv())
        }
        Figure::Fig5 => {
            let (p0, p1, alpha) = presets::example3();
            let rows = run_sequential_experiment(
                &p0,
                &p1,
                alpha,
                opts.penalty.unwrap_or(false),
                &opts.n_grid.clone().unwrap_or_else(presets::fig5_grid),
                opts.trials.unwrap_or(presets::SEQUENTIAL_DEFAULT_TRIALS),
                opts.seed,
                opts.workers,
            )?;
            Ok(sequential_to_csv(&rows))
        }
        Figure::Fig6 => {
            let (p0, p1, e0) = presets::example2();
            Ok(sweep_to_csv(&run_alpha_sweep(
                &p0,
                &p1,
                e0,
                &presets::fig6_grid(),
            )?))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn significant_digit_formatting() {
        assert_eq!(fmt_sig(0.0), "0");
        assert_eq!(fmt_sig(1.0), "1");
        assert_eq!(fmt_sig(0.25), "0.25");
        assert_eq!(fmt_sig(1.0 / 3.0), "0.333333333333");
        assert_eq!(fmt_sig(123456.789), "123456.789");
        assert_eq!(fmt_sig(2.0e-7), "2e-7");
        assert_eq!(fmt_sig(-0.0071153), "-0.0071153");
        assert_eq!(fmt_sig(1.23456789012345e15), "1.23456789012e15");
    }

    #[test]
    fn prefactor_identity() {
        let (n, e) = (400u64, 0.005);
        let eps = (n as f64).powf(-0.5) * (-(n as f64) * e).exp();
        assert_abs_diff_eq!(
            prefactor_diagnostic(eps, n, e).unwrap(),
            0.0,
            epsilon = 1e-12
        );
        assert!(prefactor_diagnostic(0.0, n, e).is_err());
    }

    #[test]
    fn ratio_parsing() {
        assert_eq!("2".parse::<Ratio>().unwrap(), Ratio::new(2, 1).unwrap());
        assert_eq!("5/2".parse::<Ratio>().unwrap(), Ratio::new(5, 2).unwrap());
        assert_eq!("2.5".parse::<Ratio>().unwrap(), Ratio::new(5, 2).unwrap());
        assert!("x".parse::<Ratio>().is_err());
        assert!("0".parse::<Ratio>().is_err());
    }

    #[test]
    fn slope_of_exact_log() {
        let pts: Vec<(u64, f64)> = [200u64, 400, 800]
            .iter()
            .map(|&n| (n, 0.5 * (n as f64).ln() + 3.0))
            .collect();
        assert_abs_diff_eq!(ln_n_slope(&pts), 0.5, epsilon = 1e-12);
    }

    #[test]
    fn sweep_rejects_bad_grids() {
        let (p0, p1, e0) = presets::example2();
        assert!(run_alpha_sweep(&p0, &p1, e0, &[0.5, 0.25]).is_err());
        assert!(run_alpha_sweep(&p0, &p1, e0, &[]).is_err());
        assert_eq!(run_alpha_sweep(&p0, &p1, e0, &[0.5]).unwrap().len(), 1);
    }

    #[test]
    fn config_validation() {
        let mut cfg = presets::example1_config(vec![10, 20], 10, 1);
        assert!(cfg.validate().is_ok());
        cfg.n_grid = vec![20, 10];
        assert!(cfg.validate().is_err());
        cfg.n_grid = vec![10];
        cfg.rules.push(RuleSpec::new("knn"));
        assert!(matches!(cfg.validate(), Err(Error::UnknownRule(_))));
    }

    #[test]
    fn always_zero_single_trial() {
        let mut cfg = presets::example1_config(vec![5], 1, 3);
        cfg.rules = vec![RuleSpec::new("always0")];
        let r = run_fixed_experiment(&cfg, 1).unwrap();
        let row = &r.rows[0];
        assert_eq!((row.errors0, row.errors1), (0, 1));
        assert!(row.censored0);
        assert_eq!(row.eps1, 1.0);
    }

    #[test]
    fn config_json_roundtrip() {
        let cfg = presets::example1_config(vec![10, 20], 100, 9);
        let s = serde_json::to_string(&cfg).unwrap();
        let back: ExperimentConfig = serde_json::from_str(&s).unwrap();
        assert_eq!(cfg, back);
        let bad = s.replacen("\"trials\"", "\"trails\"", 1);
        assert!(serde_json::from_str::<ExperimentConfig>(&bad).is_err());
    }
}
