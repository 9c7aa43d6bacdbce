//! Probability vectors, empirical types, divergences and sampling.
//!
//! Left arguments of the divergences are plain slices so that type
//! frequencies with zero entries can be passed directly; zero-weight terms
//! are skipped (0·ln 0 = 0). Right arguments must be strictly positive
//! wherever the left one is.

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution as _};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Deviation from 1 that [`Distribution::new`] silently normalizes away.
pub const NORMALIZE_TOLERANCE: f64 = 1e-9;

/// Strictly positive probability vector over `{0, .., k-1}`, `k >= 2`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct Distribution {
    probs: Vec<f64>,
}

impl Distribution {
    pub fn new(probs: Vec<f64>) -> Result<Self> {
        if probs.len() < 2 {
            return Err(Error::InvalidDistribution(format!(
                "alphabet size {} < 2",
                probs.len()
            )));
        }
        if let Some(p) = probs.iter().find(|p| !(p.is_finite() && **p > 0.0)) {
            return Err(Error::InvalidDistribution(format!(
                "weight {p} is not strictly positive"
            )));
        }
        let sum: f64 = probs.iter().sum();
        if (sum - 1.0).abs() > NORMALIZE_TOLERANCE {
            return Err(Error::InvalidDistribution(format!(
                "weights sum to {sum}, not 1"
            )));
        }
        Ok(Self::normalized(probs))
    }

    /// `Bern(p)`: symbol 1 has probability `p`.
    pub fn bernoulli(p: f64) -> Result<Self> {
        Self::new(vec![1.0 - p, p])
    }

    pub fn uniform(k: usize) -> Result<Self> {
        if k < 2 {
            return Err(Error::InvalidDistribution(format!("alphabet size {k} < 2")));
        }
        Ok(Self {
            probs: vec![1.0 / k as f64; k],
        })
    }

    /// Builds the distribution proportional to `exp(log_weights)`.
    pub fn from_log_weights(log_weights: &[f64]) -> Result<Self> {
        let m = log_weights
            .iter()
            .copied()
            .fold(f64::NEG_INFINITY, f64::max);
        let w: Vec<f64> = log_weights.iter().map(|l| (l - m).exp()).collect();
        Self::from_positive_weights(w)
    }

    fn from_positive_weights(w: Vec<f64>) -> Result<Self> {
        if w.len() < 2 || w.iter().any(|x| !(x.is_finite() && *x > 0.0)) {
            return Err(Error::InvalidDistribution(
                "weights must be finite and strictly positive".into(),
            ));
        }
        Ok(Self::normalized(w))
    }

    fn normalized(mut w: Vec<f64>) -> Self {
        let sum: f64 = w.iter().sum();
        for x in &mut w {
            *x /= sum;
        }
        Self { probs: w }
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn alphabet_size(&self) -> usize {
        self.probs.len()
    }

    pub fn min_prob(&self) -> f64 {
        self.probs.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn ln_probs(&self) -> Vec<f64> {
        self.probs.iter().map(|p| p.ln()).collect()
    }
}

impl TryFrom<Vec<f64>> for Distribution {
    type Error = Error;
    fn try_from(v: Vec<f64>) -> Result<Self> {
        Self::new(v)
    }
}

impl From<Distribution> for Vec<f64> {
    fn from(d: Distribution) -> Self {
        d.probs
    }
}

impl AsRef<[f64]> for Distribution {
    fn as_ref(&self) -> &[f64] {
        &self.probs
    }
}

/// Symbol counts of a sequence of length `n`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct EmpiricalType {
    counts: Vec<u64>,
    n: u64,
}

impl EmpiricalType {
    pub fn new(counts: Vec<u64>) -> Result<Self> {
        if counts.len() < 2 {
            return Err(Error::InvalidArgument(format!(
                "alphabet size {} < 2",
                counts.len()
            )));
        }
        let n: u64 = counts.iter().sum();
        if n == 0 {
            return Err(Error::InvalidArgument("empty type".into()));
        }
        Ok(Self { counts, n })
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    pub fn len(&self) -> u64 {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn alphabet_size(&self) -> usize {
        self.counts.len()
    }

    pub fn frequencies(&self) -> Vec<f64> {
        let n = self.n as f64;
        self.counts.iter().map(|&c| c as f64 / n).collect()
    }
}

/// A sequence of alphabet indices.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Sample {
    pub symbols: Vec<usize>,
}

fn check_dims(left: usize, right: usize) -> Result<()> {
    if left != right {
        return Err(Error::DimensionMismatch { left, right });
    }
    Ok(())
}

/// Relative entropy `D(p||q)` in nats.
pub fn kl_divergence(p: &[f64], q: &[f64]) -> Result<f64> {
    check_dims(p.len(), q.len())?;
    let mut acc = 0.0;
    for (&pi, &qi) in p.iter().zip(q) {
        if pi > 0.0 {
            if qi <= 0.0 {
                return Err(Error::InvalidArgument(
                    "left argument not absolutely continuous w.r.t. right".into(),
                ));
            }
            acc += pi * (pi / qi).ln();
        }
    }
    if !acc.is_finite() {
        return Err(Error::NonFinite("kl_divergence"));
    }
    Ok(acc.max(0.0))
}

/// `D(p||q)` without argument checks, for inner loops where both
/// arguments are known valid.
#[inline]
pub(crate) fn kl(p: &[f64], q: &[f64]) -> f64 {
    let mut acc = 0.0;
    for (&pi, &qi) in p.iter().zip(q) {
        if pi > 0.0 {
            acc += pi * (pi / qi).ln();
        }
    }
    acc.max(0.0)
}

fn log_sum_exp(v: impl Iterator<Item = f64> + Clone) -> f64 {
    let m = v.clone().fold(f64::NEG_INFINITY, f64::max);
    if m == f64::NEG_INFINITY {
        return m;
    }
    m + v.map(|x| (x - m).exp()).sum::<f64>().ln()
}

/// Rényi divergence of order `rho`: `ln(Σ p^ρ q^(1-ρ)) / (ρ-1)`.
pub fn renyi_divergence(rho: f64, p: &[f64], q: &[f64]) -> Result<f64> {
    check_dims(p.len(), q.len())?;
    if !(rho > 0.0) || !rho.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "Renyi order {rho} must be > 0"
        )));
    }
    if rho == 1.0 {
        return Err(Error::InvalidArgument(
            "Renyi order 1 is the KL divergence; use kl_divergence".into(),
        ));
    }
    let terms = p
        .iter()
        .zip(q)
        .filter(|(pi, _)| **pi > 0.0)
        .map(|(pi, qi)| rho * pi.ln() + (1.0 - rho) * qi.ln());
    let v = log_sum_exp(terms) / (rho - 1.0);
    if !v.is_finite() {
        return Err(Error::NonFinite("renyi_divergence"));
    }
    Ok(v.max(0.0))
}

/// Generalized Jensen-Shannon divergence
/// `D(q||m) + α D(p||m)` with `m = (q + α p)/(1 + α)`.
pub fn gjs_divergence(alpha: f64, q: &[f64], p: &[f64]) -> Result<f64> {
    check_dims(q.len(), p.len())?;
    if !(alpha > 0.0) || !alpha.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "GJS weight {alpha} must be > 0"
        )));
    }
    Ok(gjs(alpha, q, p))
}

#[inline]
pub(crate) fn gjs(alpha: f64, q: &[f64], p: &[f64]) -> f64 {
    let w = alpha / (1.0 + alpha);
    let mut acc = 0.0;
    for (&qi, &pi) in q.iter().zip(p) {
        // exact when qi == pi
        let m = qi + w * (pi - qi);
        if qi > 0.0 {
            acc += qi * (qi / m).ln();
        }
        if pi > 0.0 {
            acc += alpha * pi * (pi / m).ln();
        }
    }
    acc.max(0.0)
}

/// `T'(a) = (1-δ) T(a)/n + δ/|X|`.
pub fn perturb_type(t: &EmpiricalType, delta: f64) -> Result<Distribution> {
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::InvalidArgument(format!(
            "perturbation {delta} must lie in (0,1)"
        )));
    }
    Ok(perturb_counts(t.counts(), t.len(), delta))
}

pub(crate) fn perturb_counts(counts: &[u64], n: u64, delta: f64) -> Distribution {
    let k = counts.len() as f64;
    let n = n as f64;
    let probs = counts
        .iter()
        .map(|&c| (1.0 - delta) * (c as f64 / n) + delta / k)
        .collect();
    Distribution::normalized(probs)
}

/// Member `s` of the geometric path `∝ P0^s P1^(1-s)`; `s = 0` gives `P1`,
/// `s = 1` gives `P0`.
pub fn tilted_geometric(p0: &Distribution, p1: &Distribution, s: f64) -> Result<Distribution> {
    check_dims(p0.alphabet_size(), p1.alphabet_size())?;
    if !(0.0..=1.0).contains(&s) {
        return Err(Error::InvalidArgument(format!("tilt {s} outside [0,1]")));
    }
    if s == 0.0 {
        return Ok(p1.clone());
    }
    if s == 1.0 {
        return Ok(p0.clone());
    }
    let lw: Vec<f64> = p0
        .probs()
        .iter()
        .zip(p1.probs())
        .map(|(a, b)| s * a.ln() + (1.0 - s) * b.ln())
        .collect();
    Distribution::from_log_weights(&lw)
}

pub fn empirical_type(x: &Sample, alphabet_size: usize) -> Result<EmpiricalType> {
    if x.symbols.is_empty() {
        return Err(Error::InvalidArgument("empty sample".into()));
    }
    let mut counts = vec![0u64; alphabet_size];
    for &s in &x.symbols {
        if s >= alphabet_size {
            return Err(Error::SymbolOutOfRange {
                symbol: s,
                alphabet_size,
            });
        }
        counts[s] += 1;
    }
    EmpiricalType::new(counts)
}

/// Counter-based random stream: ChaCha8 keyed by a master seed, with the
/// 64-bit stream id selecting an independent keystream. Stream `i` of a
/// given seed is the same no matter which thread or order draws it.
#[derive(Debug, Clone)]
pub struct RandomStream {
    rng: ChaCha8Rng,
}

impl RandomStream {
    pub fn new(master_seed: u64, stream_id: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
        rng.set_stream(stream_id);
        Self { rng }
    }

    /// Uniform draw in `[0, 1)`.
    pub fn uniform(&mut self) -> f64 {
        self.rng.random::<f64>()
    }

    /// One symbol by inverse CDF.
    pub fn symbol(&mut self, cdf: &[f64]) -> usize {
        let u = self.uniform();
        cdf.iter().position(|&c| u < c).unwrap_or(cdf.len() - 1)
    }
}

impl RngCore for RandomStream {
    fn next_u32(&mut self) -> u32 {
        self.rng.next_u32()
    }
    fn next_u64(&mut self) -> u64 {
        self.rng.next_u64()
    }
    fn fill_bytes(&mut self, dst: &mut [u8]) {
        self.rng.fill_bytes(dst)
    }
}

pub fn cumulative(p: &Distribution) -> Vec<f64> {
    let mut acc = 0.0;
    p.probs()
        .iter()
        .map(|x| {
            acc += x;
            acc
        })
        .collect()
}

/// `n` i.i.d. draws from `p` by inverse CDF.
pub fn sample_iid(p: &Distribution, n: usize, stream: &mut RandomStream) -> Result<Sample> {
    if n == 0 {
        return Err(Error::InvalidArgument("sample length must be >= 1".into()));
    }
    let cdf = cumulative(p);
    Ok(Sample {
        symbols: (0..n).map(|_| stream.symbol(&cdf)).collect(),
    })
}

/// The type of `n` i.i.d. draws from `p`, drawn directly as a multinomial
/// via conditional binomials.
pub fn sample_type(p: &Distribution, n: u64, stream: &mut RandomStream) -> Result<EmpiricalType> {
    if n == 0 {
        return Err(Error::InvalidArgument("sample length must be >= 1".into()));
    }
    let k = p.alphabet_size();
    let mut counts = vec![0u64; k];
    let mut left = n;
    let mut mass = 1.0;
    for (i, &pi) in p.probs().iter().enumerate() {
        if i + 1 == k || left == 0 {
            counts[i] = left;
            break;
        }
        let q = (pi / mass).clamp(0.0, 1.0);
        let c = Binomial::new(left, q)
            .map_err(|e| Error::Solver(format!("binomial sampler: {e}")))?
            .sample(stream);
        counts[i] = c;
        left -= c;
        mass -= pi;
    }
    EmpiricalType::new(counts)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn normalizes_small_deviation_rejects_large() {
        let d = Distribution::new(vec![0.5, 0.5 + 1e-10]).unwrap();
        assert_abs_diff_eq!(d.probs().iter().sum::<f64>(), 1.0, epsilon = 1e-15);
        assert!(Distribution::new(vec![0.5, 0.6]).is_err());
        assert!(Distribution::new(vec![1.0, 0.0]).is_err());
        assert!(Distribution::new(vec![1.0]).is_err());
    }

    #[test]
    fn kl_identity_and_support() {
        let p = [0.2, 0.3, 0.5];
        assert_eq!(kl_divergence(&p, &p).unwrap(), 0.0);
        assert!(kl_divergence(&[0.5, 0.5], &[1.0, 0.0]).is_err());
        assert!(kl_divergence(&[0.5, 0.5], &[0.2, 0.3, 0.5]).is_err());
        // zero left weights are skipped
        assert_abs_diff_eq!(
            kl_divergence(&[1.0, 0.0], &[0.5, 0.5]).unwrap(),
            2f64.ln(),
            epsilon = 1e-15
        );
    }

    #[test]
    fn renyi_rejects_bad_orders() {
        let p = [0.4, 0.6];
        assert!(renyi_divergence(1.0, &p, &p).is_err());
        assert!(renyi_divergence(0.0, &p, &p).is_err());
        assert!(renyi_divergence(-1.0, &p, &p).is_err());
        assert_abs_diff_eq!(renyi_divergence(0.3, &p, &p).unwrap(), 0.0, epsilon = 1e-15);
    }

    #[test]
    fn perturb_binary_corner() {
        let t = EmpiricalType::new(vec![7, 0]).unwrap();
        let d = 1e-3;
        let q = perturb_type(&t, d).unwrap();
        assert_abs_diff_eq!(q.probs()[0], 1.0 - d + d / 2.0, epsilon = 1e-15);
        assert_abs_diff_eq!(q.probs()[1], d / 2.0, epsilon = 1e-15);
        assert!(perturb_type(&t, 0.0).is_err());
        assert!(perturb_type(&t, 1.0).is_err());
    }

    #[test]
    fn tilt_endpoints() {
        let p0 = Distribution::new(vec![0.3, 0.3, 0.4]).unwrap();
        let p1 = Distribution::new(vec![0.35, 0.35, 0.3]).unwrap();
        assert_eq!(tilted_geometric(&p0, &p1, 0.0).unwrap(), p1);
        assert_eq!(tilted_geometric(&p0, &p1, 1.0).unwrap(), p0);
        assert!(tilted_geometric(&p0, &p1, 1.5).is_err());
    }

    #[test]
    fn empirical_type_counts() {
        let t = empirical_type(
            &Sample {
                symbols: vec![0, 0, 1],
            },
            2,
        )
        .unwrap();
        assert_eq!(t.counts(), &[2, 1]);
        assert_eq!(t.len(), 3);
        let t = empirical_type(
            &Sample {
                symbols: vec![2, 2, 2, 2],
            },
            3,
        )
        .unwrap();
        assert_eq!(t.counts(), &[0, 0, 4]);
        assert!(empirical_type(&Sample { symbols: vec![3] }, 3).is_err());
        assert!(empirical_type(&Sample { symbols: vec![] }, 3).is_err());
    }

    #[test]
    fn sampling_is_deterministic_per_stream() {
        let p = Distribution::new(vec![0.2, 0.5, 0.3]).unwrap();
        let a = sample_iid(&p, 50, &mut RandomStream::new(9, 4)).unwrap();
        let b = sample_iid(&p, 50, &mut RandomStream::new(9, 4)).unwrap();
        let c = sample_iid(&p, 50, &mut RandomStream::new(9, 5)).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
        assert!(sample_iid(&p, 0, &mut RandomStream::new(9, 4)).is_err());
    }

    #[test]
    fn sample_type_sums_to_n() {
        let p = Distribution::new(vec![0.2, 0.5, 0.3]).unwrap();
        let mut s = RandomStream::new(1, 0);
        for n in [1u64, 2, 17, 1000] {
            let t = sample_type(&p, n, &mut s).unwrap();
            assert_eq!(t.counts().iter().sum::<u64>(), n);
        }
    }

    #[test]
    fn json_roundtrip() {
        let p = Distribution::new(vec![0.25, 0.75]).unwrap();
        let s = serde_json::to_string(&p).unwrap();
        assert_eq!(s, "[0.25,0.75]");
        let q: Distribution = serde_json::from_str(&s).unwrap();
        assert_eq!(p, q);
        assert!(serde_json::from_str::<Distribution>("[0.5,0.6]").is_err());
    }
}
