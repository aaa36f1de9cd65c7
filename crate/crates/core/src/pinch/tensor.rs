use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

fn tetra(m: usize) -> usize {
    m * (m + 1) * (m + 2) / 6
}

fn tri(m: usize) -> usize {
    m * (m + 1) / 2
}

fn sort3(i: usize, j: usize, k: usize) -> (usize, usize, usize) {
    let (a, b) = if i <= j { (i, j) } else { (j, i) };
    if k >= b {
        (a, b, k)
    } else if k >= a {
        (a, k, b)
    } else {
        (k, a, b)
    }
}

/// Totally symmetric 3-tensor; one stored value per sorted multi-index
/// `i <= j <= k`, in lexicographic order.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawTensor")]
pub struct Sym3Tensor {
    n: usize,
    entries: Vec<f64>,
}

#[derive(Deserialize)]
struct RawTensor {
    n: usize,
    entries: Vec<f64>,
}

impl TryFrom<RawTensor> for Sym3Tensor {
    type Error = Error;
    fn try_from(r: RawTensor) -> Result<Self> {
        if r.entries.len() != tetra(r.n) {
            return Err(Error::ShapeMismatch(format!(
                "n = {} needs {} entries, got {}",
                r.n,
                tetra(r.n),
                r.entries.len()
            )));
        }
        Ok(Sym3Tensor { n: r.n, entries: r.entries })
    }
}

impl Sym3Tensor {
    pub fn zeros(n: usize) -> Self {
        Sym3Tensor { n, entries: vec![0.0; tetra(n)] }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Number of stored entries, `n(n+1)(n+2)/6`.
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    #[inline]
    fn offset(&self, i: usize, j: usize, k: usize) -> usize {
        let (i, j, k) = sort3(i, j, k);
        let n = self.n;
        tetra(n) - tetra(n - i) + tri(n - i) - tri(n - j) + (k - j)
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize, k: usize) -> f64 {
        self.entries[self.offset(i, j, k)]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, k: usize, v: f64) {
        let o = self.offset(i, j, k);
        self.entries[o] = v;
    }

    /// Sorted multi-indices in storage order.
    pub fn indices(n: usize) -> impl Iterator<Item = [usize; 3]> {
        (0..n).flat_map(move |i| (i..n).flat_map(move |j| (j..n).map(move |k| [i, j, k])))
    }

    pub fn scale(&self, c: f64) -> Self {
        Sym3Tensor { n: self.n, entries: self.entries.iter().map(|v| c * v).collect() }
    }

    /// `sum_{ijk} T_ijk^2` over all `n^3` index triples.
    pub fn norm_sq(&self) -> f64 {
        Self::indices(self.n)
            .zip(&self.entries)
            .map(|([i, j, k], v)| {
                let mult = if i == j && j == k {
                    1.0
                } else if i == j || j == k {
                    3.0
                } else {
                    6.0
                };
                mult * v * v
            })
            .sum()
    }
}
