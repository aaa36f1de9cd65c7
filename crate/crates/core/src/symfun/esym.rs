//! Elementary symmetric polynomials and their partial derivatives.
//!
//! All quantities are built by the product recursion
//! `e_m(x_1..x_j) = e_m(x_1..x_{j-1}) + x_j e_{m-1}(x_1..x_{j-1})`,
//! which only adds positive terms on the positive cone. Derivatives use
//! `d e_k / d x_i = e_{k-1}(x without i)` and
//! `d^2 e_k / d x_i d x_j = e_{k-2}(x without i, j)` for `i != j`, each
//! evaluated by running the same recursion over the remaining coordinates.

/// Unnormalized `e_0..=e_n` of `x`.
pub(crate) fn elementary(x: &[f64]) -> Vec<f64> {
    elementary_skipping(x, usize::MAX, usize::MAX)
}

/// `e_0..=e_m` of `x` with coordinates `skip_a` and `skip_b` removed.
fn elementary_skipping(x: &[f64], skip_a: usize, skip_b: usize) -> Vec<f64> {
    let mut e = vec![0.0; x.len() + 1];
    e[0] = 1.0;
    let mut used = 0;
    for (j, &xj) in x.iter().enumerate() {
        if j == skip_a || j == skip_b {
            continue;
        }
        used += 1;
        for m in (1..=used).rev() {
            e[m] += xj * e[m - 1];
        }
    }
    e
}

/// `C(n, k)` as a float.
pub(crate) fn binomial(n: usize, k: usize) -> f64 {
    if k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    let mut c = 1.0;
    for i in 0..k {
        c = c * (n - i) as f64 / (i + 1) as f64;
    }
    c
}

/// Elementary symmetric data at a point, with the leave-one-out and
/// leave-two-out tables needed for first and second derivatives.
pub(crate) struct ElementaryTables {
    pub n: usize,
    /// `e[m]`, `m = 0..=n`
    pub e: Vec<f64>,
    /// `drop1[i][m] = e_m(x without i)`
    pub drop1: Vec<Vec<f64>>,
    /// `drop2[i * n + j][m] = e_m(x without i, j)` for `i != j`
    pub drop2: Vec<Vec<f64>>,
}

impl ElementaryTables {
    pub fn new(x: &[f64], with_grad: bool, with_hess: bool) -> Self {
        let n = x.len();
        let e = elementary(x);
        let drop1 = if with_grad || with_hess {
            (0..n).map(|i| elementary_skipping(x, i, usize::MAX)).collect()
        } else {
            Vec::new()
        };
        let drop2 = if with_hess {
            let mut d = vec![Vec::new(); n * n];
            for i in 0..n {
                for j in (i + 1)..n {
                    let t = elementary_skipping(x, i, j);
                    d[j * n + i] = t.clone();
                    d[i * n + j] = t;
                }
            }
            d
        } else {
            Vec::new()
        };
        ElementaryTables { n, e, drop1, drop2 }
    }

    /// `d e_k / d x_i`
    pub fn de(&self, k: usize, i: usize) -> f64 {
        if k == 0 {
            0.0
        } else {
            self.drop1[i][k - 1]
        }
    }

    /// `d^2 e_k / d x_i d x_j`
    pub fn d2e(&self, k: usize, i: usize, j: usize) -> f64 {
        if k < 2 || i == j {
            0.0
        } else {
            self.drop2[i * self.n + j][k - 2]
        }
    }
}
