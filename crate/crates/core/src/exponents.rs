//! Tilt solvers, the classifier threshold γ(E0, Q1), optimal and
//! mismatched error exponents, the worst-case exponent over a KL ball and
//! the critical training ratio.
//!
//! Every one-dimensional solve runs on a multiplier reparameterized to
//! `s = μ/(1+μ) ∈ [0, 1]` and is a plain bisection on a monotone map,
//! iterated to machine precision (at most 200 steps).

use serde::{Deserialize, Serialize};

use crate::distributions::{kl, kl_divergence, renyi_divergence, Distribution};
use crate::error::{Error, Result};

const MAX_BISECTIONS: usize = 200;

/// Result of a projection onto a KL ball or a hyperplane along the
/// geometric path.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TiltSolution {
    /// Reparameterized multiplier `s = μ/(1+μ)`: the path position, with
    /// `s = 1` at `P0`.
    pub multiplier: f64,
    pub distribution: Distribution,
    /// The achieved divergence (see each solver).
    pub value: f64,
}

impl TiltSolution {
    /// The unreparameterized multiplier `μ = s/(1-s)`.
    pub fn lagrange_multiplier(&self) -> f64 {
        self.multiplier / (1.0 - self.multiplier)
    }
}

/// One point `(E0, E1*(E0))` of the optimal tradeoff and the LRT threshold
/// that attains it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TradeoffPoint {
    pub e0: f64,
    pub e1: f64,
    pub gamma: f64,
}

/// Root of a map that is positive at `lo` and non-positive at `hi`.
pub(crate) fn bisect(mut lo: f64, mut hi: f64, mut f: impl FnMut(f64) -> f64) -> f64 {
    for _ in 0..MAX_BISECTIONS {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if f(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// The path `g(s) ∝ exp(s·a + (1-s)·b)` in log coordinates.
pub(crate) struct GeometricPath {
    a: Vec<f64>,
    b: Vec<f64>,
}

impl GeometricPath {
    pub(crate) fn new(end1: &[f64], end0: &[f64]) -> Self {
        Self {
            a: end1.iter().map(|x| x.ln()).collect(),
            b: end0.iter().map(|x| x.ln()).collect(),
        }
    }

    /// `(D(g(s)||e^a), D(g(s)||e^b))`.
    pub(crate) fn divergences(&self, s: f64) -> (f64, f64) {
        let lw = |i: usize| s * self.a[i] + (1.0 - s) * self.b[i];
        let m = (0..self.a.len()).map(lw).fold(f64::NEG_INFINITY, f64::max);
        let mut z = 0.0;
        let mut tilt = 0.0;
        for i in 0..self.a.len() {
            let e = (lw(i) - m).exp();
            z += e;
            tilt += e * (self.b[i] - self.a[i]);
        }
        let ln_z = m + z.ln();
        let mean = tilt / z;
        (
            ((1.0 - s) * mean - ln_z).max(0.0),
            (-s * mean - ln_z).max(0.0),
        )
    }

    pub(crate) fn point(&self, s: f64) -> Vec<f64> {
        let lw: Vec<f64> = (0..self.a.len())
            .map(|i| s * self.a[i] + (1.0 - s) * self.b[i])
            .collect();
        normalize_log(&lw)
    }
}

/// Normalized `exp(lw)`; entries may underflow to zero.
fn normalize_log(lw: &[f64]) -> Vec<f64> {
    let m = lw.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut w: Vec<f64> = lw.iter().map(|x| (x - m).exp()).collect();
    let z: f64 = w.iter().sum();
    for x in &mut w {
        *x /= z;
    }
    w
}

fn check_dims(a: &Distribution, b: &Distribution) -> Result<()> {
    if a.alphabet_size() != b.alphabet_size() {
        return Err(Error::DimensionMismatch {
            left: a.alphabet_size(),
            right: b.alphabet_size(),
        });
    }
    Ok(())
}

fn check_beta(beta: f64) -> Result<()> {
    if !(beta > 0.0 && beta <= 1.0) {
        return Err(Error::InvalidArgument(format!("beta {beta} outside (0,1]")));
    }
    Ok(())
}

fn check_e0_positive(e0: f64) -> Result<()> {
    if !(e0 > 0.0) || !e0.is_finite() {
        return Err(Error::InvalidArgument(format!("E0 {e0} must be > 0")));
    }
    Ok(())
}

/// Position `s` on the path from `q1` (s = 0) to `p0` (s = 1) where
/// `D(g(s)||P0) = e0`. Requires `0 < e0 < D(q1||p0)`.
fn radius_position(p0: &[f64], q1: &[f64], e0: f64) -> (f64, GeometricPath) {
    let path = GeometricPath::new(p0, q1);
    let s = bisect(0.0, 1.0, |s| path.divergences(s).0 - e0);
    (s, path)
}

/// Projection of `q1` onto the ball `{Q : D(Q||P0) <= e0}`.
///
/// `value` is `D(Q||Q1)`, the minimum over the ball.
pub fn solve_tilt_radius(p0: &Distribution, q1: &Distribution, e0: f64) -> Result<TiltSolution> {
    check_dims(p0, q1)?;
    check_e0_positive(e0)?;
    let d = kl(q1.probs(), p0.probs());
    if e0 >= d {
        return Err(Error::BallContainsAlternative { e0, divergence: d });
    }
    let (s, path) = radius_position(p0.probs(), q1.probs(), e0);
    let distribution = Distribution::new(path.point(s))?;
    let value = kl(distribution.probs(), q1.probs());
    Ok(TiltSolution {
        multiplier: s,
        distribution,
        value,
    })
}

/// Point `Q` on the geometric path between `P1` and `P0` with
/// `D(Q||P0) - D(Q||P1) = gamma`.
///
/// `value` is `D(Q||P0)`; `D(Q||P1)` is `value - gamma`.
pub fn solve_tilt_hyperplane(
    p0: &Distribution,
    p1: &Distribution,
    gamma: f64,
) -> Result<TiltSolution> {
    check_dims(p0, p1)?;
    let lo = -kl(p0.probs(), p1.probs());
    let hi = kl(p1.probs(), p0.probs());
    const SLACK: f64 = 1e-12;
    if !(gamma >= lo - SLACK && gamma <= hi + SLACK) {
        return Err(Error::ThresholdOutsideBand { gamma, lo, hi });
    }
    let path = GeometricPath::new(p0.probs(), p1.probs());
    let s = if gamma <= lo {
        1.0
    } else if gamma >= hi {
        0.0
    } else {
        bisect(0.0, 1.0, |s| {
            let (d0, d1) = path.divergences(s);
            d0 - d1 - gamma
        })
    };
    let distribution = Distribution::new(path.point(s))?;
    let value = kl(distribution.probs(), p0.probs());
    Ok(TiltSolution {
        multiplier: s,
        distribution,
        value,
    })
}

/// `γ(E0, Q1) = β·min_{D(Q||P0) <= E0} D(Q||Q1) - E0`.
///
/// Requires `E0 < D(Q1||P0)`; see [`classifier_threshold`] for the
/// version that is defined everywhere.
pub fn threshold_gamma(p0: &Distribution, q1: &Distribution, e0: f64, beta: f64) -> Result<f64> {
    check_beta(beta)?;
    let sol = solve_tilt_radius(p0, q1, e0)?;
    Ok(beta * sol.value - e0)
}

/// [`threshold_gamma`] extended to `E0 >= D(Q1||P0)`, where the ball
/// already contains `Q1`, the minimum is 0 and the threshold is `-E0`.
pub fn classifier_threshold(
    p0: &Distribution,
    q1: &Distribution,
    e0: f64,
    beta: f64,
) -> Result<f64> {
    check_dims(p0, q1)?;
    check_beta(beta)?;
    check_e0_positive(e0)?;
    Ok(threshold_fast(p0.probs(), q1.probs(), e0, beta))
}

/// Unchecked threshold on raw slices for the classifier hot path.
pub(crate) fn threshold_fast(p0: &[f64], q1: &[f64], e0: f64, beta: f64) -> f64 {
    if e0 >= kl(q1, p0) {
        return -e0;
    }
    let (s, path) = radius_position(p0, q1, e0);
    let (_, to_q1) = path.divergences(s);
    beta * to_q1 - e0
}

/// Optimal exponent pair at type-I exponent `e0`; `E1*` is clamped to 0
/// for `e0 >= D(P1||P0)`. `gamma = E0 - E1*` is the matching LRT threshold.
pub fn optimal_tradeoff(p0: &Distribution, p1: &Distribution, e0: f64) -> Result<TradeoffPoint> {
    check_dims(p0, p1)?;
    if !(e0 >= 0.0) || !e0.is_finite() {
        return Err(Error::InvalidArgument(format!("E0 {e0} must be >= 0")));
    }
    let e1 = if e0 == 0.0 {
        kl(p0.probs(), p1.probs())
    } else if e0 >= kl(p1.probs(), p0.probs()) {
        0.0
    } else {
        solve_tilt_radius(p0, p1, e0)?.value
    };
    Ok(TradeoffPoint {
        e0,
        e1,
        gamma: e0 - e1,
    })
}

const SWEEP_POINTS: usize = 1000;
const SWEEP_LOG10_MIN: f64 = -8.0;
const SWEEP_LOG10_MAX: f64 = 10.0;

/// `E1(E0, Q1)`: the type-II exponent of the β-classifier when the
/// training type converges to `Q1` while the truth is `P1`,
///
/// `min D(Q||P1)  s.t.  β D(Q||Q1) - D(Q||P0) >= γ(E0, Q1)`.
///
/// Stationary points lie on the family
/// `Q̂_η ∝ (P1 · P0^η · Q1^(-ηβ))^(1/(1+η-ηβ))`; the constraint is swept
/// over a log grid of η, every sign change is bisected, and the best
/// boundary point wins. The threshold is [`classifier_threshold`], so
/// every `Q1` is admissible.
pub fn mismatched_exponent(
    p0: &Distribution,
    p1: &Distribution,
    q1: &Distribution,
    e0: f64,
    beta: f64,
) -> Result<f64> {
    check_dims(p0, p1)?;
    check_dims(p0, q1)?;
    let gamma = classifier_threshold(p0, q1, e0, beta)?;
    mismatched_with_threshold(p0.probs(), p1.probs(), q1.probs(), beta, gamma)
}

fn mismatched_with_threshold(
    p0: &[f64],
    p1: &[f64],
    q1: &[f64],
    beta: f64,
    gamma: f64,
) -> Result<f64> {
    let constraint = |q: &[f64]| beta * kl(q, q1) - kl(q, p0) - gamma;
    if constraint(p1) >= 0.0 {
        return Ok(0.0);
    }
    let (l0, l1, lq): (Vec<f64>, Vec<f64>, Vec<f64>) = (
        p0.iter().map(|x| x.ln()).collect(),
        p1.iter().map(|x| x.ln()).collect(),
        q1.iter().map(|x| x.ln()).collect(),
    );
    let member = |eta: f64| -> Vec<f64> {
        let den = 1.0 + eta * (1.0 - beta);
        let lw: Vec<f64> = (0..p0.len())
            .map(|i| (l1[i] + eta * (l0[i] - beta * lq[i])) / den)
            .collect();
        normalize_log(&lw)
    };
    let c_at = |eta: f64| constraint(&member(eta));

    let mut etas = Vec::with_capacity(SWEEP_POINTS + 1);
    etas.push(0.0);
    for j in 0..SWEEP_POINTS {
        let t = j as f64 / (SWEEP_POINTS - 1) as f64;
        etas.push(10f64.powf(SWEEP_LOG10_MIN + t * (SWEEP_LOG10_MAX - SWEEP_LOG10_MIN)));
    }
    let cs: Vec<f64> = etas.iter().map(|&e| c_at(e)).collect();

    let mut best = f64::INFINITY;
    for j in 0..etas.len() - 1 {
        let (ca, cb) = (cs[j], cs[j + 1]);
        if (ca < 0.0) == (cb < 0.0) {
            continue;
        }
        // bisect in s = η/(1+η); orient so the positive side is `lo`
        let to_s = |e: f64| e / (1.0 + e);
        let to_eta = |s: f64| s / (1.0 - s);
        let (sa, sb) = (to_s(etas[j]), to_s(etas[j + 1]));
        let s = if ca >= 0.0 {
            bisect(sa, sb, |s| c_at(to_eta(s)))
        } else {
            bisect(sa, sb, |s| -c_at(to_eta(s)))
        };
        let eta = to_eta(s);
        best = best.min(kl(&member(eta), p1));
    }
    if best.is_finite() {
        Ok(best)
    } else {
        Err(Error::Solver(
            "no feasible stationary point on the multiplier sweep".into(),
        ))
    }
}

/// Critical radius `-ln(1 - min_x P1(x))`: the KL distance from `P1` to
/// the nearest face of the simplex.
pub fn r_critical(p1: &Distribution) -> f64 {
    -(1.0 - p1.min_prob()).ln()
}

/// Stein-regime exponents `(D(P0||P1), D_{α/(1+α)}(P1||P0))`.
pub fn stein_exponents(p0: &Distribution, p1: &Distribution, alpha: f64) -> Result<(f64, f64)> {
    check_dims(p0, p1)?;
    if !(alpha > 0.0) || !alpha.is_finite() {
        return Err(Error::InvalidArgument(format!("alpha {alpha} must be > 0")));
    }
    let e1 = kl_divergence(p0.probs(), p1.probs())?;
    let e0 = renyi_divergence(alpha / (1.0 + alpha), p1.probs(), p0.probs())?;
    Ok((e1, e0))
}

/// Orthonormal basis of `{v : Σ v = 0}` (Helmert).
fn sum_zero_basis(k: usize) -> Vec<Vec<f64>> {
    (1..k)
        .map(|j| {
            let norm = ((j * (j + 1)) as f64).sqrt();
            let mut v = vec![0.0; k];
            for x in v.iter_mut().take(j) {
                *x = 1.0 / norm;
            }
            v[j] = -(j as f64) / norm;
            v
        })
        .collect()
}

/// Unit directions in the tangent space of the simplex, and the number of
/// radial steps per direction, for a candidate budget of about `m`.
fn polar_directions(k: usize, m: usize) -> (Vec<Vec<f64>>, usize) {
    let basis = sum_zero_basis(k);
    let combine = |coef: &[f64]| -> Vec<f64> {
        let mut v = vec![0.0; k];
        for (c, e) in coef.iter().zip(&basis) {
            for (vi, ei) in v.iter_mut().zip(e) {
                *vi += c * ei;
            }
        }
        v
    };
    match k {
        2 => (
            vec![basis[0].clone(), basis[0].iter().map(|x| -x).collect()],
            m.max(8),
        ),
        3 => {
            let dirs = ((m as f64).sqrt().round() as usize).max(8);
            let v = (0..dirs)
                .map(|i| {
                    let th = std::f64::consts::TAU * i as f64 / dirs as f64;
                    combine(&[th.cos(), th.sin()])
                })
                .collect();
            (v, (m / dirs).max(8))
        }
        4 => {
            // Fibonacci sphere
            let dirs = ((m as f64).powf(2.0 / 3.0).round() as usize).max(16);
            let golden = std::f64::consts::PI * (3.0 - 5f64.sqrt());
            let v = (0..dirs)
                .map(|i| {
                    let z = 1.0 - 2.0 * (i as f64 + 0.5) / dirs as f64;
                    let rho = (1.0 - z * z).sqrt();
                    let th = golden * i as f64;
                    combine(&[rho * th.cos(), rho * th.sin(), z])
                })
                .collect();
            (v, (m / dirs).max(8))
        }
        _ => {
            let mut v = Vec::new();
            let scale = std::f64::consts::FRAC_1_SQRT_2;
            for i in 0..k {
                for j in 0..k {
                    if i != j {
                        let mut d = vec![0.0; k];
                        d[i] = scale;
                        d[j] = -scale;
                        v.push(d);
                    }
                }
            }
            let radial = (m / v.len()).max(8);
            (v, radial)
        }
    }
}

/// `r ↦ E1(E0, r) = min_{D(Q1||P1) <= r} E1(E0, Q1)` evaluated on a fixed
/// set of candidate `Q1` around `P1`: rays along tangent directions with
/// geometrically spaced steps. Since the candidate set does not depend on
/// `r`, the profile is exactly non-increasing in `r`.
#[derive(Debug, Clone)]
pub struct WorstCaseProfile {
    e1_star: f64,
    r_critical: f64,
    radii: Vec<f64>,
    running_min: Vec<f64>,
}

/// Decades spanned by the radial steps of each ray.
const RAY_DECADES: f64 = 7.0;

impl WorstCaseProfile {
    pub fn new(
        p0: &Distribution,
        p1: &Distribution,
        e0: f64,
        beta: f64,
        grid_resolution: usize,
    ) -> Result<Self> {
        check_dims(p0, p1)?;
        check_beta(beta)?;
        check_e0_positive(e0)?;
        if grid_resolution == 0 {
            return Err(Error::InvalidArgument(
                "grid resolution must be >= 1".into(),
            ));
        }
        let k = p1.alphabet_size();
        let rc = r_critical(p1);
        let e1_star = mismatched_exponent(p0, p1, p1, e0, beta)?;
        let mut cands = vec![(0.0, e1_star)];
        let (dirs, radial) = polar_directions(k, grid_resolution);
        for d in &dirs {
            let t_max = p1
                .probs()
                .iter()
                .zip(d)
                .filter(|(_, di)| **di < 0.0)
                .map(|(p, di)| p / -di)
                .fold(f64::INFINITY, f64::min)
                * (1.0 - 1e-9);
            for j in 0..radial {
                let frac = if radial == 1 {
                    1.0
                } else {
                    j as f64 / (radial - 1) as f64
                };
                let t = t_max * 10f64.powf(-RAY_DECADES * (1.0 - frac));
                let q: Vec<f64> = p1.probs().iter().zip(d).map(|(p, di)| p + t * di).collect();
                let r = kl(&q, p1.probs());
                if r >= rc {
                    break;
                }
                let q1 = match Distribution::new(q) {
                    Ok(q1) => q1,
                    Err(_) => continue,
                };
                cands.push((r, mismatched_exponent(p0, p1, &q1, e0, beta)?));
            }
        }
        cands.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut m = f64::INFINITY;
        let (radii, running_min) = cands
            .into_iter()
            .map(|(r, e)| {
                m = m.min(e);
                (r, m)
            })
            .unzip();
        Ok(Self {
            e1_star,
            r_critical: rc,
            radii,
            running_min,
        })
    }

    pub fn e1_star(&self) -> f64 {
        self.e1_star
    }

    pub fn r_critical(&self) -> f64 {
        self.r_critical
    }

    pub fn exponent_at(&self, r: f64) -> Result<f64> {
        if !(r >= 0.0) {
            return Err(Error::InvalidArgument(format!("radius {r} must be >= 0")));
        }
        if r >= self.r_critical {
            return Err(Error::RadiusTooLarge {
                r,
                r_critical: self.r_critical,
            });
        }
        let idx = self.radii.partition_point(|&x| x <= r);
        Ok(self.running_min[idx - 1])
    }
}

/// `E1(E0, r)` on a candidate grid of about `grid_resolution` points; see
/// [`WorstCaseProfile`].
pub fn worst_case_exponent(
    p0: &Distribution,
    p1: &Distribution,
    e0: f64,
    beta: f64,
    r: f64,
    grid_resolution: usize,
) -> Result<f64> {
    let rc = r_critical(p1);
    if r >= rc {
        return Err(Error::RadiusTooLarge { r, r_critical: rc });
    }
    WorstCaseProfile::new(p0, p1, e0, beta, grid_resolution)?.exponent_at(r)
}

const ALPHA_STAR_R_POINTS: usize = 400;

/// Numeric critical ratio
/// `max{ sup_r (E1* - E1(E0,r))/r, E1*/r_c }` over a geometric r-grid from
/// `r_c·1e-6` to `r_c·(1 - 1e-3)`.
pub fn alpha_star_numeric(
    p0: &Distribution,
    p1: &Distribution,
    e0: f64,
    beta: f64,
    grid_resolution: usize,
) -> Result<f64> {
    if p1.alphabet_size() > 4 {
        return Err(Error::InvalidArgument(format!(
            "alpha_star_numeric supports alphabets of size <= 4, got {}",
            p1.alphabet_size()
        )));
    }
    check_e0_positive(e0)?;
    let d10 = kl(p1.probs(), p0.probs());
    if e0 >= d10 {
        return Err(Error::BallContainsAlternative {
            e0,
            divergence: d10,
        });
    }
    let profile = WorstCaseProfile::new(p0, p1, e0, beta, grid_resolution)?;
    let rc = profile.r_critical();
    let e1s = profile.e1_star();
    let (lo, hi) = (rc * 1e-6, rc * (1.0 - 1e-3));
    let mut best = e1s / rc;
    for j in 0..ALPHA_STAR_R_POINTS {
        let t = j as f64 / (ALPHA_STAR_R_POINTS - 1) as f64;
        let r = lo * (hi / lo).powf(t);
        best = best.max((e1s - profile.exponent_at(r)?) / r);
    }
    Ok(best)
}
