//! Reference computations shared by the integration tests.
#![allow(dead_code)]

use np_universal::linalg::SymmetricMatrix;
use rand::Rng;

pub fn d(p: &[f64], q: &[f64]) -> f64 {
    p.iter()
        .zip(q)
        .filter(|(a, _)| **a > 0.0)
        .map(|(a, b)| a * (a / b).ln())
        .sum()
}

/// Bisection for the root of a function that changes sign on `[a, b]`.
pub fn root(mut a: f64, mut b: f64, f: impl Fn(f64) -> f64) -> f64 {
    let fa = f(a);
    for _ in 0..200 {
        let m = 0.5 * (a + b);
        if (f(m) > 0.0) == (fa > 0.0) {
            a = m;
        } else {
            b = m;
        }
    }
    0.5 * (a + b)
}

/// Number of eigenvalues below `t`: negative pivots of the elimination of
/// `M - tI` (Sylvester inertia; the pivots' product is the characteristic
/// polynomial at `t`).
pub fn count_below(m: &SymmetricMatrix, t: f64) -> usize {
    let n = m.dim();
    let mut a: Vec<f64> = (0..n * n)
        .map(|idx| m.get(idx / n, idx % n) - if idx / n == idx % n { t } else { 0.0 })
        .collect();
    let mut neg = 0;
    for p in 0..n {
        let mut piv = a[p * n + p];
        if piv == 0.0 {
            piv = -f64::EPSILON * (1.0 + t.abs());
        }
        if piv < 0.0 {
            neg += 1;
        }
        for i in p + 1..n {
            let f = a[i * n + p] / piv;
            for j in p..n {
                a[i * n + j] -= f * a[p * n + j];
            }
        }
    }
    neg
}

pub fn kth_eigenvalue(m: &SymmetricMatrix, k: usize) -> f64 {
    let r = m.frobenius_norm() + 1.0;
    let (mut lo, mut hi) = (-r, r);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if count_below(m, mid) > k {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Random probability vector with every entry at least `floor`.
pub fn random_distribution<R: Rng>(rng: &mut R, k: usize, floor: f64) -> Vec<f64> {
    let w: Vec<f64> = (0..k).map(|_| rng.random_range(0.05..1.0)).collect();
    let s: f64 = w.iter().sum();
    let scale = 1.0 - floor * k as f64;
    w.iter().map(|x| floor + scale * x / s).collect()
}

/// Random symmetric matrix with entries uniform in `[-3, 3)`.
pub fn random_symmetric<R: Rng>(rng: &mut R, n: usize) -> SymmetricMatrix {
    let mut e = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..=i {
            let x: f64 = rng.random_range(-3.0..3.0);
            e[i * n + j] = x;
            e[j * n + i] = x;
        }
    }
    SymmetricMatrix::new(n, e).unwrap()
}
