//! Cyclic Jacobi eigensolver for small dense symmetric matrices.

use nalgebra::DMatrix;
use super::SymMatrix;
use crate::error::{Error, Result};

pub const MAX_SWEEPS: usize = 100;
/// Converged once the off-diagonal Frobenius mass drops below this times `||A||_F`.
pub const OFF_DIAGONAL_TOL: f64 = 1e-14;

/// Eigen-decomposition `A = Q diag(values) Q^T` with ascending eigenvalues.
#[derive(Clone, Debug, PartialEq)]
pub struct EigenSystem {
    pub values: Vec<f64>,
    /// Orthonormal eigenvectors stored as columns.
    pub vectors: DMatrix<f64>,
    pub source: SymMatrix,
    /// `1 / values`, the spectrum of `A^{-1}`.
    pub inverse_values: Vec<f64>,
}

impl EigenSystem {
    pub fn n(&self) -> usize {
        self.values.len()
    }

    pub fn trace(&self) -> f64 {
        self.values.iter().sum()
    }

    pub fn min(&self) -> f64 {
        self.values[0]
    }

    /// `Q diag(d) Q^T`.
    pub fn compose(&self, d: &[f64]) -> SymMatrix {
        let q = &self.vectors;
        SymMatrix::from_fn(self.n(), |i, j| (0..d.len()).map(|k| q[(i, k)] * d[k] * q[(j, k)]).sum())
    }

    pub fn reconstruct(&self) -> SymMatrix {
        self.compose(&self.values)
    }

    pub fn inverse(&self) -> SymMatrix {
        self.compose(&self.inverse_values)
    }

    /// `Q^T B Q`: `B` expressed in the eigenbasis.
    pub fn to_eigenbasis(&self, b: &SymMatrix) -> SymMatrix {
        b.congruence(&self.vectors)
    }

    /// `Q B Q^T`: inverse of [`EigenSystem::to_eigenbasis`].
    pub fn from_eigenbasis(&self, b: &SymMatrix) -> SymMatrix {
        b.congruence(&self.vectors.transpose())
    }
}

struct Jacobi {
    values: Vec<f64>,
    vectors: Vec<f64>,
    residual: f64,
    sweeps: usize,
    converged: bool,
}

fn off_diagonal(a: &[f64], n: usize) -> f64 {
    let mut s = 0.0;
    for i in 0..n {
        for j in 0..n {
            if i != j {
                s += a[i * n + j] * a[i * n + j];
            }
        }
    }
    s.sqrt()
}

/// Row-major `a` must be symmetric. Eigenvalues come back unsorted, matching
/// the columns of the row-major `vectors`.
fn jacobi(mut a: Vec<f64>, n: usize) -> Jacobi {
    let mut v = vec![0.0; n * n];
    for i in 0..n {
        v[i * n + i] = 1.0;
    }
    let norm = a.iter().map(|x| x * x).sum::<f64>().sqrt();
    let mut sweeps = 0;
    let mut residual = off_diagonal(&a, n);
    while residual > OFF_DIAGONAL_TOL * norm {
        if sweeps == MAX_SWEEPS {
            return Jacobi { values: diag(&a, n), vectors: v, residual, sweeps, converged: false };
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = a[p * n + q];
                if apq == 0.0 {
                    continue;
                }
                let theta = (a[q * n + q] - a[p * n + p]) / (2.0 * apq);
                let t = if theta.abs() > 1e150 {
                    0.5 / theta
                } else {
                    theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt())
                };
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
                a[p * n + q] = 0.0;
                a[q * n + p] = 0.0;
                for k in 0..n {
                    let (vkp, vkq) = (v[k * n + p], v[k * n + q]);
                    v[k * n + p] = c * vkp - s * vkq;
                    v[k * n + q] = s * vkp + c * vkq;
                }
            }
        }
        sweeps += 1;
        residual = off_diagonal(&a, n);
    }
    Jacobi { values: diag(&a, n), vectors: v, residual, sweeps, converged: true }
}

fn diag(a: &[f64], n: usize) -> Vec<f64> {
    (0..n).map(|i| a[i * n + i]).collect()
}

fn ascending(values: &[f64]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&i, &j| values[i].total_cmp(&values[j]));
    order
}

/// Eigen-decomposition by cyclic Jacobi sweeps.
///
/// Eigenvalues are ascending. Each eigenvector is signed so that its
/// largest-magnitude component (the first one on ties) is positive.
pub fn eigh(a: &SymMatrix) -> Result<EigenSystem> {
    let n = a.n();
    let j = jacobi(a.to_dense(), n);
    if !j.converged {
        return Err(Error::ConvergenceFailure { sweeps: j.sweeps, residual: j.residual });
    }
    let order = ascending(&j.values);
    let values: Vec<f64> = order.iter().map(|&k| j.values[k]).collect();
    let mut vectors = DMatrix::from_fn(n, n, |r, c| j.vectors[r * n + order[c]]);
    for mut col in vectors.column_iter_mut() {
        let mut lead = 0;
        for r in 1..n {
            if col[r].abs() > col[lead].abs() * (1.0 + 1e-12) {
                lead = r;
            }
        }
        if col[lead] < 0.0 {
            col.neg_mut();
        }
    }
    let inverse_values = values.iter().map(|v| 1.0 / v).collect();
    Ok(EigenSystem { values, vectors, source: a.clone(), inverse_values })
}

/// Ascending eigenvalues of the symmetric part of a row-major `n x n` matrix.
/// Returns the best available estimate even if the sweep cap is reached.
pub fn symmetric_eigenvalues(m: &[f64], n: usize) -> Vec<f64> {
    let mut a = m.to_vec();
    for i in 0..n {
        for j in 0..i {
            let s = 0.5 * (m[i * n + j] + m[j * n + i]);
            a[i * n + j] = s;
            a[j * n + i] = s;
        }
    }
    let mut values = jacobi(a, n).values;
    values.sort_by(f64::total_cmp);
    values
}
