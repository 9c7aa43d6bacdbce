//! Fixed-length decision rules on types and exact error probabilities by
//! enumeration of type classes.
//!
//! Tie-breaking follows each rule's inequality: LRT ties decide 1, the
//! GLRT boundary decides 0, and the β-classifier decides 1 when its
//! statistic equals the threshold.

use std::collections::BTreeMap;
use std::fmt;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::distributions::{gjs, kl, perturb_counts, Distribution, EmpiricalType};
use crate::error::{Error, Result};
use crate::exponents::{optimal_tradeoff, threshold_fast};
use crate::special::{chi2_inverse_sf, ln_factorials};

/// Perturbation schedule `δ_n = min(n^-p, 1/2)`; the cap only matters for
/// `n = 1`, where `n^-p = 1` is not a valid perturbation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DeltaRule {
    pub exponent: f64,
}

impl Default for DeltaRule {
    fn default() -> Self {
        Self { exponent: 2.0 }
    }
}

impl DeltaRule {
    pub fn new(exponent: f64) -> Result<Self> {
        if !(exponent > 1.0) || !exponent.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "perturbation exponent {exponent} must be > 1 so that n·δ_n -> 0"
            )));
        }
        Ok(Self { exponent })
    }

    pub fn delta(&self, n: u64) -> f64 {
        (n as f64).powf(-self.exponent).min(0.5)
    }
}

/// Parameters of the β-interpolated classifier.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FixedClassifierConfig {
    pub beta: f64,
    pub e0: f64,
    #[serde(default)]
    pub delta_rule: DeltaRule,
}

impl FixedClassifierConfig {
    pub fn new(beta: f64, e0: f64) -> Result<Self> {
        let cfg = Self {
            beta,
            e0,
            delta_rule: DeltaRule::default(),
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.beta > 0.0 && self.beta <= 1.0) {
            return Err(Error::InvalidArgument(format!(
                "beta {} outside (0,1]",
                self.beta
            )));
        }
        if !(self.e0 > 0.0) || !self.e0.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "E0 {} must be > 0",
                self.e0
            )));
        }
        DeltaRule::new(self.delta_rule.exponent)?;
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Decision {
    pub hypothesis: u8,
    pub statistic: f64,
    pub threshold: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ErrorPair {
    pub eps0: f64,
    pub eps1: f64,
}

fn check_alphabet(t: &EmpiricalType, k: usize) -> Result<()> {
    if t.alphabet_size() != k {
        return Err(Error::DimensionMismatch {
            left: t.alphabet_size(),
            right: k,
        });
    }
    Ok(())
}

fn freqs(counts: &[u64], n: u64) -> Vec<f64> {
    counts.iter().map(|&c| c as f64 / n as f64).collect()
}

/// Likelihood ratio test in type form: decide 1 iff
/// `D(T||P0) - D(T||P1) >= gamma`.
pub fn lrt_decide(
    tx: &EmpiricalType,
    p0: &Distribution,
    p1: &Distribution,
    gamma: f64,
) -> Result<Decision> {
    check_alphabet(tx, p0.alphabet_size())?;
    check_alphabet(tx, p1.alphabet_size())?;
    let log_ratio: Vec<f64> = p1
        .probs()
        .iter()
        .zip(p0.probs())
        .map(|(a, b)| (a / b).ln())
        .collect();
    Ok(lrt_fast(tx.counts(), tx.len(), &log_ratio, gamma))
}

fn lrt_fast(counts: &[u64], n: u64, log_ratio: &[f64], gamma: f64) -> Decision {
    // D(T||P0) - D(T||P1) = Σ T ln(P1/P0)
    let stat: f64 = counts
        .iter()
        .zip(log_ratio)
        .map(|(&c, l)| c as f64 * l)
        .sum::<f64>()
        / n as f64;
    Decision {
        hypothesis: u8::from(stat >= gamma),
        statistic: stat,
        threshold: gamma,
    }
}

/// Hoeffding's test: decide 1 iff `D(T||P0) > e0`.
pub fn glrt_decide(tx: &EmpiricalType, p0: &Distribution, e0: f64) -> Result<Decision> {
    check_alphabet(tx, p0.alphabet_size())?;
    Ok(glrt_fast(tx.counts(), tx.len(), p0.probs(), e0))
}

fn glrt_fast(counts: &[u64], n: u64, p0: &[f64], e0: f64) -> Decision {
    let stat = kl(&freqs(counts, n), p0);
    Decision {
        hypothesis: u8::from(stat > e0),
        statistic: stat,
        threshold: e0,
    }
}

/// The β-interpolated classifier: with `T' = perturb(TX, δ_n)`, decide 1
/// iff `β D(T̂x||T') - D(T̂x||P0) <= γ(E0, T')`.
///
/// When the `E0` ball around `P0` already contains `T'` the threshold is
/// `-E0` (the minimum distance from the ball to `T'` is zero).
pub fn interp_decide(
    tx: &EmpiricalType,
    train: &EmpiricalType,
    p0: &Distribution,
    cfg: &FixedClassifierConfig,
) -> Result<Decision> {
    cfg.validate()?;
    check_alphabet(tx, p0.alphabet_size())?;
    check_alphabet(train, p0.alphabet_size())?;
    Ok(interp_fast(
        tx.counts(),
        tx.len(),
        train.counts(),
        train.len(),
        p0.probs(),
        cfg,
    ))
}

fn interp_fast(
    counts: &[u64],
    n: u64,
    train: &[u64],
    k: u64,
    p0: &[f64],
    cfg: &FixedClassifierConfig,
) -> Decision {
    let (t_prime, gamma) = interp_prepare(train, k, n, p0, cfg);
    interp_with(counts, n, t_prime.probs(), gamma, p0, cfg.beta)
}

/// Perturbed training type and its threshold.
fn interp_prepare(
    train: &[u64],
    k: u64,
    n: u64,
    p0: &[f64],
    cfg: &FixedClassifierConfig,
) -> (Distribution, f64) {
    let t_prime = perturb_counts(train, k, cfg.delta_rule.delta(n));
    let gamma = threshold_fast(p0, t_prime.probs(), cfg.e0, cfg.beta);
    (t_prime, gamma)
}

fn interp_with(counts: &[u64], n: u64, tp: &[f64], gamma: f64, p0: &[f64], beta: f64) -> Decision {
    let f = freqs(counts, n);
    let stat = beta * kl(&f, tp) - kl(&f, p0);
    Decision {
        hypothesis: u8::from(stat <= gamma),
        statistic: stat,
        threshold: gamma,
    }
}

/// Gutman's test: decide 1 iff
/// `GJS_α(T̂x||T̂X) <= G⁻¹_{|X|-1}(ε) / (2n)`, with `G⁻¹` the inverse
/// chi-squared upper tail.
pub fn gutman_decide(
    tx: &EmpiricalType,
    train: &EmpiricalType,
    alpha: f64,
    epsilon: f64,
) -> Result<Decision> {
    check_alphabet(train, tx.alphabet_size())?;
    if !(alpha > 0.0) {
        return Err(Error::InvalidArgument(format!("alpha {alpha} must be > 0")));
    }
    let expected = alpha * tx.len() as f64;
    if (train.len() as f64 - expected).abs() > 1.0 {
        return Err(Error::InvalidArgument(format!(
            "training length {} is not alpha·n = {expected}",
            train.len()
        )));
    }
    let q = chi2_inverse_sf((tx.alphabet_size() - 1) as f64, epsilon)?;
    Ok(gutman_fast(
        tx.counts(),
        tx.len(),
        train.counts(),
        train.len(),
        alpha,
        q,
    ))
}

/// Threshold `G⁻¹_{|X|-1}(ε)/(2n)` of Gutman's test.
pub fn gutman_threshold(alphabet_size: usize, n: u64, epsilon: f64) -> Result<f64> {
    Ok(chi2_inverse_sf((alphabet_size - 1) as f64, epsilon)? / (2.0 * n as f64))
}

fn gutman_fast(counts: &[u64], n: u64, train: &[u64], k: u64, alpha: f64, chi2_q: f64) -> Decision {
    let stat = gjs(alpha, &freqs(counts, n), &freqs(train, k));
    let thr = chi2_q / (2.0 * n as f64);
    Decision {
        hypothesis: u8::from(stat <= thr),
        statistic: stat,
        threshold: thr,
    }
}

/// A rule addressed by name with numeric parameters, e.g.
/// `interp:beta=0.5;e0=0.004`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RuleSpec {
    pub name: String,
    #[serde(default)]
    pub params: BTreeMap<String, f64>,
}

impl RuleSpec {
    pub fn new(name: &str) -> Self {
        Self {
            name: name.to_string(),
            params: BTreeMap::new(),
        }
    }

    pub fn with(mut self, key: &str, value: f64) -> Self {
        self.params.insert(key.to_string(), value);
        self
    }

    pub fn parse(s: &str) -> Result<Self> {
        let (name, rest) = match s.split_once(':') {
            Some((n, r)) => (n, Some(r)),
            None => (s, None),
        };
        let mut spec = Self::new(name.trim());
        if let Some(rest) = rest {
            for kv in rest.split(';').filter(|x| !x.is_empty()) {
                let (k, v) = kv.split_once('=').ok_or_else(|| {
                    Error::InvalidArgument(format!("rule parameter '{kv}' is not key=value"))
                })?;
                let v: f64 = v.trim().parse().map_err(|_| {
                    Error::InvalidArgument(format!("rule parameter '{kv}' is not numeric"))
                })?;
                spec.params.insert(k.trim().to_string(), v);
            }
        }
        Ok(spec)
    }
}

impl fmt::Display for RuleSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.name)?;
        let mut sep = ':';
        for (k, v) in &self.params {
            write!(f, "{sep}{k}={v}")?;
            sep = ';';
        }
        Ok(())
    }
}

/// Experiment-wide values rules fall back on.
#[derive(Debug, Clone)]
pub struct RuleContext {
    pub p0: Distribution,
    pub p1: Distribution,
    pub e0: f64,
}

/// Default ε of Gutman's test.
pub const GUTMAN_DEFAULT_EPSILON: f64 = 0.1;

/// A rule with its parameters resolved and constants precomputed.
#[derive(Debug, Clone)]
pub enum Rule {
    Lrt { gamma: f64, log_ratio: Vec<f64> },
    Glrt { e0: f64 },
    Interp(FixedClassifierConfig),
    Gutman { epsilon: f64, chi2_quantile: f64 },
    AlwaysZero,
    AlwaysOne,
}

impl Rule {
    pub fn resolve(spec: &RuleSpec, ctx: &RuleContext) -> Result<Self> {
        let allowed: &[&str] = match spec.name.as_str() {
            "lrt" => &["gamma", "e0"],
            "glrt" => &["e0"],
            "interp" => &["beta", "e0", "delta_exponent"],
            "gutman" => &["epsilon"],
            "always0" | "always1" => &[],
            other => return Err(Error::UnknownRule(other.to_string())),
        };
        if let Some(bad) = spec.params.keys().find(|k| !allowed.contains(&k.as_str())) {
            return Err(Error::InvalidArgument(format!(
                "rule '{}' has no parameter '{bad}' (allowed: {allowed:?})",
                spec.name
            )));
        }
        let get = |k: &str, default: f64| spec.params.get(k).copied().unwrap_or(default);
        let e0 = get("e0", ctx.e0);
        Ok(match spec.name.as_str() {
            "lrt" => {
                let gamma = match spec.params.get("gamma") {
                    Some(g) => *g,
                    None => optimal_tradeoff(&ctx.p0, &ctx.p1, e0)?.gamma,
                };
                let log_ratio = ctx
                    .p1
                    .probs()
                    .iter()
                    .zip(ctx.p0.probs())
                    .map(|(a, b)| (a / b).ln())
                    .collect();
                Rule::Lrt { gamma, log_ratio }
            }
            "glrt" => Rule::Glrt { e0 },
            "interp" => {
                let cfg = FixedClassifierConfig {
                    beta: get("beta", 1.0),
                    e0,
                    delta_rule: DeltaRule::new(get("delta_exponent", 2.0))?,
                };
                cfg.validate()?;
                Rule::Interp(cfg)
            }
            "gutman" => {
                let epsilon = get("epsilon", GUTMAN_DEFAULT_EPSILON);
                let chi2_quantile = chi2_inverse_sf((ctx.p0.alphabet_size() - 1) as f64, epsilon)?;
                Rule::Gutman {
                    epsilon,
                    chi2_quantile,
                }
            }
            "always0" => Rule::AlwaysZero,
            _ => Rule::AlwaysOne,
        })
    }

    /// Decision on raw counts; `train` is only read by rules that use it.
    pub fn decide_counts(&self, tx: &[u64], n: u64, train: &[u64], k: u64, p0: &[f64]) -> Decision {
        self.trained(train, k, n, p0).decide(tx)
    }

    /// Binds the training type (length `k`) and test length `n`, doing the
    /// per-training work once.
    pub fn trained<'a>(
        &'a self,
        train: &'a [u64],
        k: u64,
        n: u64,
        p0: &'a [f64],
    ) -> TrainedRule<'a> {
        let interp = match self {
            Rule::Interp(cfg) => Some(interp_prepare(train, k, n, p0, cfg)),
            _ => None,
        };
        TrainedRule {
            rule: self,
            train,
            k,
            n,
            p0,
            interp,
        }
    }

    pub fn decide(
        &self,
        tx: &EmpiricalType,
        train: &EmpiricalType,
        p0: &Distribution,
    ) -> Result<Decision> {
        check_alphabet(tx, p0.alphabet_size())?;
        check_alphabet(train, p0.alphabet_size())?;
        Ok(self.decide_counts(
            tx.counts(),
            tx.len(),
            train.counts(),
            train.len(),
            p0.probs(),
        ))
    }

    /// Whether the decision depends on the training type.
    pub fn uses_training(&self) -> bool {
        matches!(self, Rule::Interp(_) | Rule::Gutman { .. })
    }
}

/// A [`Rule`] with its training type bound; see [`Rule::trained`].
pub struct TrainedRule<'a> {
    rule: &'a Rule,
    train: &'a [u64],
    k: u64,
    n: u64,
    p0: &'a [f64],
    interp: Option<(Distribution, f64)>,
}

impl TrainedRule<'_> {
    /// Decision for test counts summing to the bound `n`.
    pub fn decide(&self, tx: &[u64]) -> Decision {
        let fixed = |h: u8| Decision {
            hypothesis: h,
            statistic: 0.0,
            threshold: 0.0,
        };
        let (n, k) = (self.n, self.k);
        match self.rule {
            Rule::Lrt { gamma, log_ratio } => lrt_fast(tx, n, log_ratio, *gamma),
            Rule::Glrt { e0 } => glrt_fast(tx, n, self.p0, *e0),
            Rule::Interp(cfg) => {
                let (tp, gamma) = self.interp.as_ref().expect("prepared in Rule::trained");
                interp_with(tx, n, tp.probs(), *gamma, self.p0, cfg.beta)
            }
            Rule::Gutman { chi2_quantile, .. } => {
                gutman_fast(tx, n, self.train, k, k as f64 / n as f64, *chi2_quantile)
            }
            Rule::AlwaysZero => fixed(0),
            Rule::AlwaysOne => fixed(1),
        }
    }
}

/// Largest number of (test type, training type) pairs
/// [`exact_error_probs`] will enumerate.
pub const ENUMERATION_BUDGET: f64 = 1e7;

fn binom(n: u64, r: u64) -> f64 {
    (0..r).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// Number of compositions of `n` into `k` non-negative parts.
pub fn composition_count(n: u64, k: usize) -> f64 {
    binom(n + k as u64 - 1, k as u64 - 1)
}

/// All compositions of `n` into `k` parts in colexicographic order (the
/// last coordinate varies slowest).
pub fn compositions(n: u64, k: usize) -> Vec<Vec<u64>> {
    fn rec(n: u64, k: usize, suffix: &mut Vec<u64>, out: &mut Vec<Vec<u64>>) {
        if k == 1 {
            let mut c = vec![n];
            c.extend(suffix.iter().rev());
            out.push(c);
            return;
        }
        for last in 0..=n {
            suffix.push(last);
            rec(n - last, k - 1, suffix, out);
            suffix.pop();
        }
    }
    let mut out = Vec::new();
    rec(n, k, &mut Vec::new(), &mut out);
    out
}

/// Log-probability of the type class with `counts` under i.i.d. `p`.
fn ln_class_prob(counts: &[u64], ln_p: &[f64], ln_fact: &[f64]) -> f64 {
    let n: u64 = counts.iter().sum();
    ln_fact[n as usize]
        + counts
            .iter()
            .zip(ln_p)
            .map(|(&c, l)| c as f64 * l - ln_fact[c as usize])
            .sum::<f64>()
}

/// Sum of positive terms in ascending order (smallest first).
fn sum_ascending(mut v: Vec<f64>) -> f64 {
    v.sort_by(f64::total_cmp);
    v.iter().fold(0.0, |acc, x| acc + x)
}

/// Exact `(ε0, ε1)` of a type-based rule with test length `n` and training
/// length `k` (training drawn from `P1`), summing over type classes.
pub fn exact_error_probs(
    rule: &Rule,
    p0: &Distribution,
    p1: &Distribution,
    n: u64,
    k: u64,
) -> Result<ErrorPair> {
    let a = p0.alphabet_size();
    if p1.alphabet_size() != a {
        return Err(Error::DimensionMismatch {
            left: a,
            right: p1.alphabet_size(),
        });
    }
    if n == 0 || (k == 0 && rule.uses_training()) {
        return Err(Error::InvalidArgument("lengths must be >= 1".into()));
    }
    let count = composition_count(n, a) * composition_count(k, a);
    if count > ENUMERATION_BUDGET {
        return Err(Error::BudgetExceeded { count });
    }
    let ln_fact = ln_factorials(n.max(k) as usize);
    let (l0, l1) = (p0.ln_probs(), p1.ln_probs());
    let tests = compositions(n, a);
    let w0: Vec<f64> = tests
        .iter()
        .map(|c| ln_class_prob(c, &l0, &ln_fact).exp())
        .collect();
    let w1: Vec<f64> = tests
        .iter()
        .map(|c| ln_class_prob(c, &l1, &ln_fact).exp())
        .collect();

    let per_training = |train: &Vec<u64>| -> (f64, f64) {
        let (mut e0, mut e1) = (Vec::new(), Vec::new());
        let bound = rule.trained(train, k, n, p0.probs());
        for (i, c) in tests.iter().enumerate() {
            if bound.decide(c).hypothesis == 1 {
                e0.push(w0[i]);
            } else {
                e1.push(w1[i]);
            }
        }
        (sum_ascending(e0), sum_ascending(e1))
    };

    // rules blind to the training type need a single pass with weight 1
    let blind = !rule.uses_training();
    let trainings = if blind {
        vec![vec![0; a]]
    } else {
        compositions(k, a)
    };
    let parts: Vec<(f64, f64, f64)> = trainings
        .par_iter()
        .map(|t| {
            let w = if blind {
                1.0
            } else {
                ln_class_prob(t, &l1, &ln_fact).exp()
            };
            let (e0, e1) = per_training(t);
            (w, e0, e1)
        })
        .collect();
    let eps0 = sum_ascending(parts.iter().map(|(w, e, _)| w * e).collect());
    let eps1 = sum_ascending(parts.iter().map(|(w, _, e)| w * e).collect());
    Ok(ErrorPair {
        eps0: eps0.clamp(0.0, 1.0),
        eps1: eps1.clamp(0.0, 1.0),
    })
}
