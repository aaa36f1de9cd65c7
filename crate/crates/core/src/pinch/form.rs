//! The pinching quadratic form `Q` at an instance, directly and block by block.
//!
//! With `g = grad f(lambda)`, `H = hess f(lambda)`, divided differences
//! `D_kl = (g_k - g_l)/(lambda_k - lambda_l)` and index 0 the null direction:
//!
//! ```text
//! Q = sum_kl H_kl T_0kk T_0ll - eps sum_j sum_kl H_kl T_jkk T_jll
//!   + 2 sum_k sum_{l>0} g_k/(lambda_l - lambda_0) T_0kl^2
//!   + 2 sum_{k<l} D_kl T_0kl^2 - 2 eps sum_j sum_{k<l} D_kl T_jkl^2
//! ```
//!
//! The third line is the supremum of the Gamma-term, attained at
//! `Gamma_k^p = T_kp0 / (lambda_p - lambda_0)`.

use serde::{Deserialize, Serialize};

use super::PinchInstance;
use crate::error::{Error, Result};
use crate::matfun::divided_difference;
use crate::symfun::{Jet, Order, SpeedFunction};

/// `Gamma[k][p - 1]` holds `Gamma_k^p` for `k = 0..n`, `p = 1..n`.
pub type Gamma = Vec<Vec<f64>>;

/// Block decomposition of `Q`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QBreakdown {
    pub q1: f64,
    /// `Q_k` for `k = 1..n` (zero-based; index 0 is the null direction).
    pub qk: Vec<f64>,
    /// `Q_{0kl}` for `0 < k < l`, lexicographic.
    pub q1kl: Vec<f64>,
    /// `Q_{jkl}` for `0 < j < k < l`, lexicographic.
    pub qjkl: Vec<f64>,
    pub total_blocks: f64,
    pub total_direct: f64,
}

impl QBreakdown {
    /// `|total_blocks - total_direct| / (1 + |total_direct|)`.
    pub fn identity_residual(&self) -> f64 {
        (self.total_blocks - self.total_direct).abs() / (1.0 + self.total_direct.abs())
    }

    /// Smallest block value, if any.
    pub fn min_block(&self) -> f64 {
        std::iter::once(self.q1)
            .chain(self.qk.iter().copied())
            .chain(self.q1kl.iter().copied())
            .chain(self.qjkl.iter().copied())
            .fold(f64::INFINITY, f64::min)
    }
}

/// Derivative data of `f` at an instance's spectrum.
pub struct FormContext<'a> {
    inst: &'a PinchInstance,
    jet: Jet,
    dd: Vec<f64>,
}

impl<'a> FormContext<'a> {
    pub fn new(f: &SpeedFunction, inst: &'a PinchInstance) -> Result<Self> {
        let n = inst.n();
        if f.arity() != n {
            return Err(Error::ArityMismatch { expected: f.arity(), got: n });
        }
        let jet = f.jet(&inst.lambda, Order::Hessian)?;
        let mut dd = vec![0.0; n * n];
        for k in 0..n {
            for l in 0..n {
                if k != l {
                    dd[k * n + l] = divided_difference(&inst.lambda, &jet, k, l);
                }
            }
        }
        Ok(FormContext { inst, jet, dd })
    }

    #[inline]
    fn g(&self, k: usize) -> f64 {
        self.jet.grad[k]
    }

    #[inline]
    fn h(&self, k: usize, l: usize) -> f64 {
        self.jet.h(k, l)
    }

    #[inline]
    fn d(&self, k: usize, l: usize) -> f64 {
        self.dd[k * self.inst.n() + l]
    }

    #[inline]
    fn t(&self, i: usize, j: usize, k: usize) -> f64 {
        self.inst.t.get(i, j, k)
    }

    #[inline]
    fn gap(&self, k: usize) -> f64 {
        self.inst.lambda[k] - self.inst.lambda[0]
    }

    pub fn q_direct(&self) -> f64 {
        let n = self.inst.n();
        let eps = self.inst.epsilon;
        let mut q = 0.0;
        for j in 0..n {
            let w = if j == 0 { 1.0 - eps } else { -eps };
            for k in 0..n {
                for l in 0..n {
                    q += w * self.h(k, l) * self.t(j, k, k) * self.t(j, l, l);
                }
            }
        }
        for k in 0..n {
            for l in 1..n {
                q += 2.0 * self.g(k) / self.gap(l) * self.t(0, k, l).powi(2);
            }
        }
        for j in 0..n {
            let w = if j == 0 { 1.0 - eps } else { -eps };
            for k in 0..n {
                for l in k + 1..n {
                    q += 2.0 * w * self.d(k, l) * self.t(j, k, l).powi(2);
                }
            }
        }
        q
    }

    /// Hessian of `f` on indices `k, l > 0` after substituting
    /// `x_0 = c * sum_{j>0} x_j`.
    fn shifted_hessian(&self, k: usize, l: usize) -> f64 {
        let c = self.inst.ratio();
        self.h(k, l) + c * (self.h(k, 0) + self.h(0, l)) + c * c * self.h(0, 0)
    }

    fn mixed_weight(&self, k: usize) -> f64 {
        let eps = self.inst.epsilon;
        2.0 * ((1.0 - eps) * self.g(k) + eps * self.g(0)) / self.gap(k)
    }

    pub fn q_blocks(&self) -> QBreakdown {
        let n = self.inst.n();
        let eps = self.inst.epsilon;
        let c = self.inst.ratio();

        let mut q1 = 0.0;
        for k in 1..n {
            for l in 1..n {
                q1 += (1.0 - eps) * self.shifted_hessian(k, l) * self.t(0, k, k) * self.t(0, l, l);
            }
            q1 += self.mixed_weight(k) * self.t(0, k, k).powi(2);
        }

        let qk: Vec<f64> = (1..n)
            .map(|k| {
                let mut q = 0.0;
                for i in 1..n {
                    for j in 1..n {
                        q -= eps * self.shifted_hessian(i, j) * self.t(k, i, i) * self.t(k, j, j);
                    }
                }
                let s: f64 = (1..n).map(|i| self.t(k, i, i)).sum();
                q += self.mixed_weight(k) * (c * s).powi(2);
                for j in (1..n).filter(|&j| j != k) {
                    q -= 2.0 * eps * self.d(k, j) * self.t(k, j, j).powi(2);
                }
                q
            })
            .collect();

        let mut q1kl = Vec::new();
        for k in 1..n {
            for l in k + 1..n {
                let coeff = (1.0 - eps) * self.d(k, l) + self.g(l) / self.gap(k) + self.g(k) / self.gap(l)
                    - eps * (self.g(k) - self.g(0)) / self.gap(k)
                    - eps * (self.g(l) - self.g(0)) / self.gap(l);
                q1kl.push(2.0 * coeff * self.t(0, k, l).powi(2));
            }
        }

        let mut qjkl = Vec::new();
        for j in 1..n {
            for k in j + 1..n {
                for l in k + 1..n {
                    let coeff = self.d(k, l) + self.d(k, j) + self.d(l, j);
                    qjkl.push(-2.0 * eps * coeff * self.t(j, k, l).powi(2));
                }
            }
        }

        let total_blocks = q1 + qk.iter().sum::<f64>() + q1kl.iter().sum::<f64>() + qjkl.iter().sum::<f64>();
        QBreakdown { q1, qk, q1kl, qjkl, total_blocks, total_direct: self.q_direct() }
    }
}

/// `Gamma_k^p = T_kp0 / (lambda_p - lambda_0)`.
pub fn optimal_gamma(inst: &PinchInstance) -> Gamma {
    let n = inst.n();
    (0..n)
        .map(|k| (1..n).map(|p| inst.t.get(k, p, 0) / (inst.lambda[p] - inst.lambda[0])).collect())
        .collect()
}

/// `2 sum_{k, p>0} g_k (2 Gamma_k^p T_kp0 - (Gamma_k^p)^2 (lambda_p - lambda_0))`.
pub fn gamma_term(f: &SpeedFunction, inst: &PinchInstance, gamma: &Gamma) -> Result<f64> {
    let n = inst.n();
    if gamma.len() != n || gamma.iter().any(|row| row.len() != n - 1) {
        return Err(Error::ShapeMismatch(format!("Gamma must be {n} x {}", n - 1)));
    }
    if f.arity() != n {
        return Err(Error::ArityMismatch { expected: f.arity(), got: n });
    }
    let g = f.grad(&inst.lambda)?;
    let mut s = 0.0;
    for k in 0..n {
        for p in 1..n {
            let gm = gamma[k][p - 1];
            s += g[k] * (2.0 * gm * inst.t.get(k, p, 0) - gm * gm * (inst.lambda[p] - inst.lambda[0]));
        }
    }
    Ok(2.0 * s)
}

pub fn q_direct(f: &SpeedFunction, inst: &PinchInstance) -> Result<f64> {
    Ok(FormContext::new(f, inst)?.q_direct())
}

pub fn q_blocks(f: &SpeedFunction, inst: &PinchInstance) -> Result<QBreakdown> {
    Ok(FormContext::new(f, inst)?.q_blocks())
}
