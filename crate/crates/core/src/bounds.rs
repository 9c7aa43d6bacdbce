//! Lower and upper bounds on the critical training-to-test ratio α*_β.
//!
//! The lower bound is minus the smallest eigenvalue of a weighted Hessian
//! assembled at the projection `Q_μ*` of `P1` onto the `E0` ball around
//! `P0`. Two assemblies are offered: [`HessianForm::Displayed`] follows
//! the closed-form statement of the bound literally, and
//! [`HessianForm::Centered`] uses vectors centered to be orthogonal to the
//! all-ones direction, which makes `√P1` an exact null vector of `H`.

use serde::{Deserialize, Serialize};

use crate::distributions::{kl, Distribution};
use crate::error::{Error, Result};
use crate::exponents::{bisect, optimal_tradeoff, solve_tilt_radius};
use crate::linalg::{min_eigen_symmetric, SymmetricMatrix};

/// Variance floor below which the pair is treated as degenerate.
const VARIANCE_FLOOR: f64 = 1e-14;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum HessianForm {
    /// `w_i = Q_i ln(Q_i/P0_i) - E0`, `v_i = Q_i Ω_i`.
    #[default]
    Displayed,
    /// `w_i = Q_i (ln(Q_i/P0_i) - E0)`, `v_i = Q_i (Ω_i - (E0 - β E1*))`.
    Centered,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AlphaBounds {
    pub lower: f64,
    pub upper: f64,
    pub lower_simplified: Option<f64>,
}

/// Ingredients of the lower bound, kept for inspection and tests.
#[derive(Debug, Clone)]
pub struct LowerBoundHessian {
    pub h: SymmetricMatrix,
    /// `η*_1 = μ*/(1+μ*)`.
    pub eta1: f64,
    /// `η*_β = η*_1 / (1 - η*_1 (1-β))`.
    pub eta_beta: f64,
    pub projection: Distribution,
}

fn check_pair(p0: &Distribution, p1: &Distribution, e0: f64) -> Result<()> {
    if p0.alphabet_size() != p1.alphabet_size() {
        return Err(Error::DimensionMismatch {
            left: p0.alphabet_size(),
            right: p1.alphabet_size(),
        });
    }
    if !(e0 > 0.0) || !e0.is_finite() {
        return Err(Error::InvalidArgument(format!("E0 {e0} must be > 0")));
    }
    let d = kl(p1.probs(), p0.probs());
    if e0 >= d {
        return Err(Error::BallContainsAlternative { e0, divergence: d });
    }
    Ok(())
}

fn check_beta(beta: f64) -> Result<()> {
    if !(beta > 0.0 && beta <= 1.0) {
        return Err(Error::InvalidArgument(format!("beta {beta} outside (0,1]")));
    }
    Ok(())
}

fn weighted_variance(q: &[f64], x: &[f64]) -> f64 {
    let mean: f64 = q.iter().zip(x).map(|(a, b)| a * b).sum();
    q.iter()
        .zip(x)
        .map(|(a, b)| a * (b - mean) * (b - mean))
        .sum()
}

/// `H = β η*_β √J [q qᵀ + η*_1 v vᵀ + (1-η*_1) w wᵀ - diag(q)] √J`
/// with `J = diag(1/P1)`.
pub fn lower_bound_hessian(
    p0: &Distribution,
    p1: &Distribution,
    e0: f64,
    beta: f64,
    form: HessianForm,
) -> Result<LowerBoundHessian> {
    check_beta(beta)?;
    check_pair(p0, p1, e0)?;
    let sol = solve_tilt_radius(p0, p1, e0)?;
    let q = sol.distribution.probs();
    let eta1 = sol.multiplier;
    let eta_beta = eta1 / (1.0 - eta1 * (1.0 - beta));
    let e1 = kl(q, p1.probs());

    let l: Vec<f64> = q
        .iter()
        .zip(p0.probs())
        .map(|(a, b)| (a / b).ln())
        .collect();
    let omega: Vec<f64> = (0..q.len())
        .map(|i| beta * (p1.probs()[i] / p0.probs()[i]).ln() + (1.0 - beta) * l[i])
        .collect();
    let (var_l, var_o) = (weighted_variance(q, &l), weighted_variance(q, &omega));
    if var_l < VARIANCE_FLOOR || var_o < VARIANCE_FLOOR {
        return Err(Error::DegeneratePair(format!(
            "log-ratio variance underflow ({var_l:e}, {var_o:e})"
        )));
    }
    let (sd_l, sd_o) = (var_l.sqrt(), var_o.sqrt());
    let (w, v): (Vec<f64>, Vec<f64>) = match form {
        HessianForm::Displayed => (
            (0..q.len()).map(|i| (q[i] * l[i] - e0) / sd_l).collect(),
            (0..q.len()).map(|i| q[i] * omega[i] / sd_o).collect(),
        ),
        HessianForm::Centered => {
            let shift = e0 - beta * e1;
            (
                (0..q.len()).map(|i| q[i] * (l[i] - e0) / sd_l).collect(),
                (0..q.len())
                    .map(|i| q[i] * (omega[i] - shift) / sd_o)
                    .collect(),
            )
        }
    };
    let m = SymmetricMatrix::outer(q)
        .combine(1.0, &SymmetricMatrix::outer(&v), eta1)
        .combine(1.0, &SymmetricMatrix::outer(&w), 1.0 - eta1)
        .combine(1.0, &SymmetricMatrix::diagonal(q), -1.0);
    let sqrt_j: Vec<f64> = p1.probs().iter().map(|p| 1.0 / p.sqrt()).collect();
    let h = m.congruence_diag(&sqrt_j).scaled(beta * eta_beta);
    Ok(LowerBoundHessian {
        h,
        eta1,
        eta_beta,
        projection: sol.distribution,
    })
}

/// Eigenvalue lower bound `-Λ_min(H)` on α*_β (clamped at 0), with the
/// displayed assembly.
pub fn alpha_lower(p0: &Distribution, p1: &Distribution, e0: f64, beta: f64) -> Result<f64> {
    alpha_lower_with(p0, p1, e0, beta, HessianForm::Displayed)
}

pub fn alpha_lower_with(
    p0: &Distribution,
    p1: &Distribution,
    e0: f64,
    beta: f64,
    form: HessianForm,
) -> Result<f64> {
    let hess = lower_bound_hessian(p0, p1, e0, beta, form)?;
    Ok((-min_eigen_symmetric(&hess.h)).max(0.0))
}

/// `β η*_β [Q/P1]_(3)`, the third-largest likelihood ratio scaled; only
/// for alphabets of size at least 6.
pub fn alpha_lower_simplified(
    p0: &Distribution,
    p1: &Distribution,
    e0: f64,
    beta: f64,
) -> Result<f64> {
    if p1.alphabet_size() < 6 {
        return Err(Error::InvalidArgument(
            "simplified bound requires |X| >= 6".into(),
        ));
    }
    check_beta(beta)?;
    check_pair(p0, p1, e0)?;
    let sol = solve_tilt_radius(p0, p1, e0)?;
    let eta1 = sol.multiplier;
    let eta_beta = eta1 / (1.0 - eta1 * (1.0 - beta));
    let mut ratios: Vec<f64> = sol
        .distribution
        .probs()
        .iter()
        .zip(p1.probs())
        .map(|(q, p)| q / p)
        .collect();
    ratios.sort_by(|a, b| b.total_cmp(a));
    Ok(beta * eta_beta * ratios[2])
}

/// Pieces of the upper bound `λ*(4+λ*)(1+κ)/(min P1)²`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UpperBoundParts {
    pub lambda: f64,
    pub kappa: f64,
    pub e1: f64,
    pub min_p1: f64,
    pub value: f64,
}

impl UpperBoundParts {
    pub fn assemble(lambda: f64, kappa: f64, min_p1: f64) -> f64 {
        lambda * (4.0 + lambda) * (1.0 + kappa) / (min_p1 * min_p1)
    }
}

/// Multiplier of the optimal type-I exponent at level `e0`: the maximizer
/// of `ν (E0 - E1*) - ln Σ P0^(1-ν) P1^ν` over `ν ∈ [0, 1]`, found as the
/// root of its (decreasing) derivative.
pub fn upper_bound_multiplier(p0: &Distribution, p1: &Distribution, e0: f64) -> Result<f64> {
    check_pair(p0, p1, e0)?;
    let t = optimal_tradeoff(p0, p1, e0)?;
    let (l0, l1) = (p0.ln_probs(), p1.ln_probs());
    let slope = |nu: f64| {
        let terms: Vec<f64> = l0
            .iter()
            .zip(&l1)
            .map(|(a, b)| (1.0 - nu) * a + nu * b)
            .collect();
        let m = terms.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let w: Vec<f64> = terms.iter().map(|x| (x - m).exp()).collect();
        let z: f64 = w.iter().sum();
        let mean: f64 = w
            .iter()
            .zip(l0.iter().zip(&l1))
            .map(|(w, (a, b))| w * (b - a))
            .sum::<f64>()
            / z;
        (t.e0 - t.e1) - mean
    };
    if slope(0.0) <= 0.0 {
        return Ok(0.0);
    }
    if slope(1.0) >= 0.0 {
        return Ok(1.0);
    }
    Ok(bisect(0.0, 1.0, slope))
}

pub fn alpha_upper_parts(p0: &Distribution, p1: &Distribution, e0: f64) -> Result<UpperBoundParts> {
    check_pair(p0, p1, e0)?;
    let lambda = upper_bound_multiplier(p0, p1, e0)?;
    let e1 = optimal_tradeoff(p0, p1, e0)?.e1;
    let kappa = (e1 / (lambda * (4.0 + lambda))).sqrt();
    let min_p1 = p1.min_prob();
    let value = UpperBoundParts::assemble(lambda, kappa, min_p1);
    if !value.is_finite() {
        return Err(Error::NonFinite("alpha_upper"));
    }
    Ok(UpperBoundParts {
        lambda,
        kappa,
        e1,
        min_p1,
        value,
    })
}

/// Upper bound `λ*(4+λ*)(1+κ)/(min P1)²` on α*_1, with
/// `κ = √(E1*(E0)/(λ*(4+λ*)))`.
pub fn alpha_upper(p0: &Distribution, p1: &Distribution, e0: f64) -> Result<f64> {
    Ok(alpha_upper_parts(p0, p1, e0)?.value)
}

pub fn alpha_bounds(
    p0: &Distribution,
    p1: &Distribution,
    e0: f64,
    beta: f64,
) -> Result<AlphaBounds> {
    let lower = alpha_lower(p0, p1, e0, beta)?;
    let upper = alpha_upper(p0, p1, e0)?;
    let lower_simplified = if p1.alphabet_size() >= 6 {
        Some(alpha_lower_simplified(p0, p1, e0, beta)?)
    } else {
        None
    };
    Ok(AlphaBounds {
        lower,
        upper,
        lower_simplified,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn bern(p: f64) -> Distribution {
        Distribution::bernoulli(p).unwrap()
    }

    #[test]
    fn multiplier_is_complement_of_tilt() {
        let (p0, p1) = (bern(0.3), bern(0.4));
        let nu = upper_bound_multiplier(&p0, &p1, 0.005).unwrap();
        let s = solve_tilt_radius(&p0, &p1, 0.005).unwrap().multiplier;
        assert_abs_diff_eq!(nu, 1.0 - s, epsilon = 1e-9);
    }

    #[test]
    fn simplified_needs_six_symbols() {
        let p0 = Distribution::new(vec![0.3, 0.3, 0.4]).unwrap();
        let p1 = Distribution::new(vec![0.35, 0.35, 0.3]).unwrap();
        assert!(alpha_lower_simplified(&p0, &p1, 0.005, 1.0).is_err());
    }

    #[test]
    fn domain_errors() {
        assert!(matches!(
            alpha_upper(&bern(0.3), &bern(0.4), 1.0),
            Err(Error::BallContainsAlternative { .. })
        ));
        assert!(alpha_lower(&bern(0.3), &bern(0.4), 0.005, 0.0).is_err());
    }

    #[test]
    fn centered_binary_hessian_vanishes() {
        let v =
            alpha_lower_with(&bern(0.3), &bern(0.4), 0.005, 1.0, HessianForm::Centered).unwrap();
        assert_abs_diff_eq!(v, 0.0, epsilon = 1e-12);
    }
}
