use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Real symmetric matrix stored as its upper triangle, row by row.
///
/// JSON form: `{"n": 3, "upper": [a11, a12, a13, a22, a23, a33]}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawSym")]
pub struct SymMatrix {
    n: usize,
    upper: Vec<f64>,
}

#[derive(Deserialize)]
struct RawSym {
    n: usize,
    upper: Vec<f64>,
}

impl TryFrom<RawSym> for SymMatrix {
    type Error = Error;
    fn try_from(raw: RawSym) -> Result<Self> {
        SymMatrix::new(raw.n, raw.upper)
    }
}

#[inline]
fn tri(n: usize, i: usize, j: usize) -> usize {
    let (i, j) = if i <= j { (i, j) } else { (j, i) };
    i * n - i * (i + 1) / 2 + j
}

impl SymMatrix {
    pub fn new(n: usize, upper: Vec<f64>) -> Result<Self> {
        if n == 0 || upper.len() != n * (n + 1) / 2 {
            return Err(Error::ShapeMismatch(format!(
                "n = {n} needs {} upper entries, got {}",
                n * (n + 1) / 2,
                upper.len()
            )));
        }
        Ok(SymMatrix { n, upper })
    }

    pub fn zeros(n: usize) -> Self {
        SymMatrix { n, upper: vec![0.0; n * (n + 1) / 2] }
    }

    pub fn identity(n: usize) -> Self {
        Self::diag(&vec![1.0; n])
    }

    pub fn diag(d: &[f64]) -> Self {
        Self::from_fn(d.len(), |i, j| if i == j { d[i] } else { 0.0 })
    }

    /// Builds from `g(i, j)` evaluated on the upper triangle `i <= j`.
    pub fn from_fn(n: usize, mut g: impl FnMut(usize, usize) -> f64) -> Self {
        let mut upper = Vec::with_capacity(n * (n + 1) / 2);
        for i in 0..n {
            for j in i..n {
                upper.push(g(i, j));
            }
        }
        SymMatrix { n, upper }
    }

    /// Square rows; the upper triangle is taken and the lower one must match.
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.len();
        if rows.iter().any(|r| r.len() != n) {
            return Err(Error::ShapeMismatch("rows must form a square matrix".into()));
        }
        for i in 0..n {
            for j in 0..i {
                if rows[i][j] != rows[j][i] {
                    return Err(Error::ShapeMismatch(format!("entry ({i},{j}) breaks symmetry")));
                }
            }
        }
        Ok(Self::from_fn(n, |i, j| rows[i][j]))
    }

    /// Symmetric part `(M + M^T) / 2` of a square matrix.
    pub fn from_dmatrix(m: &DMatrix<f64>) -> Self {
        Self::from_fn(m.nrows(), |i, j| 0.5 * (m[(i, j)] + m[(j, i)]))
    }

    pub fn to_dmatrix(&self) -> DMatrix<f64> {
        DMatrix::from_fn(self.n, self.n, |i, j| self.get(i, j))
    }

    /// Full row-major copy.
    pub fn to_dense(&self) -> Vec<f64> {
        let n = self.n;
        let mut out = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                out[i * n + j] = self.get(i, j);
            }
        }
        out
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn upper(&self) -> &[f64] {
        &self.upper
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.upper[tri(self.n, i, j)]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        let k = tri(self.n, i, j);
        self.upper[k] = v;
    }

    pub fn trace(&self) -> f64 {
        (0..self.n).map(|i| self.get(i, i)).sum()
    }

    pub fn frobenius(&self) -> f64 {
        let mut s = 0.0;
        for i in 0..self.n {
            for j in i..self.n {
                let v = self.get(i, j);
                s += if i == j { v * v } else { 2.0 * v * v };
            }
        }
        s.sqrt()
    }

    /// `sum_ij self_ij other_ij`.
    pub fn inner(&self, other: &SymMatrix) -> f64 {
        let mut s = 0.0;
        for i in 0..self.n {
            for j in i..self.n {
                let p = self.get(i, j) * other.get(i, j);
                s += if i == j { p } else { 2.0 * p };
            }
        }
        s
    }

    pub fn scale(&self, c: f64) -> SymMatrix {
        SymMatrix { n: self.n, upper: self.upper.iter().map(|v| c * v).collect() }
    }

    /// `self + c * other`.
    pub fn axpy(&self, c: f64, other: &SymMatrix) -> SymMatrix {
        assert_eq!(self.n, other.n, "dimension mismatch");
        SymMatrix {
            n: self.n,
            upper: self.upper.iter().zip(&other.upper).map(|(a, b)| a + c * b).collect(),
        }
    }

    /// `Q^T self Q`.
    pub fn congruence(&self, q: &DMatrix<f64>) -> SymMatrix {
        Self::from_dmatrix(&(q.transpose() * self.to_dmatrix() * q))
    }
}
