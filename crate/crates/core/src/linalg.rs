//! Small dense symmetric matrices and a cyclic Jacobi eigensolver.

use crate::error::{Error, Result};

/// Entrywise asymmetry tolerated by [`SymmetricMatrix::new`].
pub const SYMMETRY_TOLERANCE: f64 = 1e-12;

/// Dense symmetric matrix, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct SymmetricMatrix {
    dim: usize,
    entries: Vec<f64>,
}

impl SymmetricMatrix {
    pub fn new(dim: usize, entries: Vec<f64>) -> Result<Self> {
        if dim == 0 || entries.len() != dim * dim {
            return Err(Error::InvalidArgument(format!(
                "{} entries do not form a {dim}x{dim} matrix",
                entries.len()
            )));
        }
        for i in 0..dim {
            for j in 0..i {
                let (a, b) = (entries[i * dim + j], entries[j * dim + i]);
                if (a - b).abs() > SYMMETRY_TOLERANCE {
                    return Err(Error::InvalidArgument(format!(
                        "matrix not symmetric at ({i},{j}): {a} vs {b}"
                    )));
                }
            }
        }
        Ok(Self { dim, entries })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let dim = rows.len();
        Self::new(dim, rows.iter().flatten().copied().collect())
    }

    pub fn diagonal(d: &[f64]) -> Self {
        let dim = d.len();
        let mut entries = vec![0.0; dim * dim];
        for (i, x) in d.iter().enumerate() {
            entries[i * dim + i] = *x;
        }
        Self { dim, entries }
    }

    /// `u uᵀ`.
    pub fn outer(u: &[f64]) -> Self {
        let dim = u.len();
        let entries = u
            .iter()
            .flat_map(|a| u.iter().map(move |b| a * b))
            .collect();
        Self { dim, entries }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.entries[i * self.dim + j]
    }

    pub fn entries(&self) -> &[f64] {
        &self.entries
    }

    /// `a·self + b·other`.
    pub fn combine(&self, a: f64, other: &Self, b: f64) -> Self {
        assert_eq!(self.dim, other.dim);
        let entries = self
            .entries
            .iter()
            .zip(&other.entries)
            .map(|(x, y)| a * x + b * y)
            .collect();
        Self {
            dim: self.dim,
            entries,
        }
    }

    pub fn scaled(&self, a: f64) -> Self {
        Self {
            dim: self.dim,
            entries: self.entries.iter().map(|x| a * x).collect(),
        }
    }

    /// `D·self·D` for the diagonal matrix `D = diag(d)`.
    pub fn congruence_diag(&self, d: &[f64]) -> Self {
        assert_eq!(self.dim, d.len());
        let n = self.dim;
        let mut entries = self.entries.clone();
        for i in 0..n {
            for j in 0..n {
                entries[i * n + j] *= d[i] * d[j];
            }
        }
        Self { dim: n, entries }
    }

    pub fn mul_vec(&self, v: &[f64]) -> Vec<f64> {
        let n = self.dim;
        (0..n)
            .map(|i| (0..n).map(|j| self.entries[i * n + j] * v[j]).sum())
            .collect()
    }

    pub fn trace(&self) -> f64 {
        (0..self.dim).map(|i| self.get(i, i)).sum()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.entries.iter().map(|x| x * x).sum::<f64>().sqrt()
    }

    /// All eigenvalues in ascending order.
    pub fn eigenvalues(&self) -> Vec<f64> {
        let n = self.dim;
        let mut ev = match n {
            1 => vec![self.entries[0]],
            2 => {
                let (a, b, c) = (self.get(0, 0), self.get(0, 1), self.get(1, 1));
                let mean = 0.5 * (a + c);
                let rad = (0.25 * (a - c) * (a - c) + b * b).sqrt();
                vec![mean - rad, mean + rad]
            }
            _ => jacobi(n, self.entries.clone()),
        };
        ev.sort_by(f64::total_cmp);
        ev
    }
}

const OFF_DIAGONAL_TOLERANCE: f64 = 1e-13;
const MAX_SWEEPS: usize = 100;

/// Cyclic Jacobi rotations until the off-diagonal Frobenius mass is
/// below tolerance (relative to the norm for large matrices).
fn jacobi(n: usize, mut a: Vec<f64>) -> Vec<f64> {
    let scale = a.iter().map(|x| x * x).sum::<f64>().sqrt().max(1.0);
    for _ in 0..MAX_SWEEPS {
        let off: f64 = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| a[i * n + j] * a[i * n + j])
            .sum::<f64>()
            .sqrt();
        if off <= OFF_DIAGONAL_TOLERANCE * scale {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = a[p * n + q];
                if apq == 0.0 {
                    continue;
                }
                let (app, aqq) = (a[p * n + p], a[q * n + q]);
                let theta = (aqq - app) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let (akp, akq) = (a[k * n + p], a[k * n + q]);
                    a[k * n + p] = c * akp - s * akq;
                    a[k * n + q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let (apk, aqk) = (a[p * n + k], a[q * n + k]);
                    a[p * n + k] = c * apk - s * aqk;
                    a[q * n + k] = s * apk + c * aqk;
                }
            }
        }
    }
    (0..n).map(|i| a[i * n + i]).collect()
}

/// Smallest eigenvalue of a symmetric matrix.
pub fn min_eigen_symmetric(m: &SymmetricMatrix) -> f64 {
    m.eigenvalues()[0]
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn closed_forms() {
        let id = SymmetricMatrix::diagonal(&[1.0, 1.0, 1.0]);
        assert_abs_diff_eq!(min_eigen_symmetric(&id), 1.0, epsilon = 1e-15);
        let d = SymmetricMatrix::diagonal(&[-2.0, 5.0]);
        assert_eq!(min_eigen_symmetric(&d), -2.0);
    }

    #[test]
    fn rejects_asymmetry() {
        assert!(SymmetricMatrix::from_rows(&[vec![1.0, 2.0], vec![2.1, 1.0]]).is_err());
        assert!(SymmetricMatrix::new(2, vec![1.0; 3]).is_err());
    }

    #[test]
    fn known_spectrum() {
        // tridiagonal 2,-1: eigenvalues 2 - 2cos(kπ/(n+1))
        let n = 5;
        let mut rows = vec![vec![0.0; n]; n];
        for i in 0..n {
            rows[i][i] = 2.0;
            if i + 1 < n {
                rows[i][i + 1] = -1.0;
                rows[i + 1][i] = -1.0;
            }
        }
        let ev = SymmetricMatrix::from_rows(&rows).unwrap().eigenvalues();
        for (k, e) in ev.iter().enumerate() {
            let want = 2.0 - 2.0 * ((k + 1) as f64 * std::f64::consts::PI / (n + 1) as f64).cos();
            assert_abs_diff_eq!(*e, want, epsilon = 1e-12);
        }
    }
}
