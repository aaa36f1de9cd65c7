//! Spectral functions `F(A) = f(lambda(A))` of symmetric matrices.
//!
//! All derivatives are formed in the eigenbasis of `A`, where
//! `dF = diag(grad f)` and the second derivative along `B` is
//!
//! ```text
//! d2F(B, B) = sum_kl hess_kl B_kk B_ll + 2 sum_{k<l} D_kl B_kl^2,
//! D_kl      = (grad_k - grad_l) / (lambda_k - lambda_l).
//! ```
//!
//! When two eigenvalues are closer than [`GAP_THRESHOLD`] (relative), the
//! divided difference `D_kl` is replaced by its limit `hess_kk - hess_kl`.

mod eigen;
pub mod random;
mod sym;
mod validate;

pub use eigen::{eigh, symmetric_eigenvalues, EigenSystem, MAX_SWEEPS, OFF_DIAGONAL_TOL};
pub use sym::SymMatrix;
pub use validate::{calculus_suite, CalculusConfig, CalculusReport};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::sampling;
use crate::symfun::{Jet, Order, SpeedFunction};

/// Relative eigenvalue gap below which divided differences switch to their limit.
pub const GAP_THRESHOLD: f64 = 1e-7;
/// Default margin for sign tests.
pub const DEFAULT_TOL: f64 = 1e-9;

/// Whether `a` and `b` count as one eigenvalue for divided differences.
pub fn is_degenerate(a: f64, b: f64) -> bool {
    (a - b).abs() < GAP_THRESHOLD * 1f64.max(a.abs()).max(b.abs())
}

/// `(grad_k - grad_l) / (lambda_k - lambda_l)` with the degenerate limit.
pub fn divided_difference(lambda: &[f64], jet: &Jet, k: usize, l: usize) -> f64 {
    if is_degenerate(lambda[k], lambda[l]) {
        0.5 * (jet.h(k, k) + jet.h(l, l)) - jet.h(k, l)
    } else {
        (jet.grad[k] - jet.grad[l]) / (lambda[k] - lambda[l])
    }
}

/// Eigen-decomposition of `A` together with the jet of `f` at its spectrum.
#[derive(Clone, Debug)]
pub struct Spectral {
    pub eig: EigenSystem,
    pub jet: Jet,
}

impl Spectral {
    pub fn new(f: &SpeedFunction, a: &SymMatrix, order: Order) -> Result<Self> {
        if f.arity() != a.n() {
            return Err(Error::ArityMismatch { expected: f.arity(), got: a.n() });
        }
        let eig = eigh(a)?;
        if !(eig.min() > 0.0) {
            return Err(Error::Domain(format!("smallest eigenvalue is {}", eig.min())));
        }
        let jet = f.jet(&eig.values, order)?;
        Ok(Spectral { eig, jet })
    }

    pub fn lambda(&self) -> &[f64] {
        &self.eig.values
    }

    pub fn value(&self) -> f64 {
        self.jet.value
    }

    /// `Q diag(grad f) Q^T`.
    pub fn df(&self) -> SymMatrix {
        self.eig.compose(&self.jet.grad)
    }

    pub fn dd(&self, k: usize, l: usize) -> f64 {
        divided_difference(self.lambda(), &self.jet, k, l)
    }

    /// Second derivative along `bt`, which is already in the eigenbasis.
    pub fn d2f_eigenbasis(&self, bt: &SymMatrix) -> f64 {
        let n = bt.n();
        let mut s = 0.0;
        for k in 0..n {
            for l in 0..n {
                s += self.jet.h(k, l) * bt.get(k, k) * bt.get(l, l);
            }
        }
        for k in 0..n {
            for l in k + 1..n {
                s += 2.0 * self.dd(k, l) * bt.get(k, l).powi(2);
            }
        }
        s
    }

    pub fn d2f(&self, b: &SymMatrix) -> f64 {
        self.d2f_eigenbasis(&self.eig.to_eigenbasis(b))
    }

    /// `d2F(X, X) + 2 sum_kl grad_k X_kl^2 / lambda_l` with `xt` in the eigenbasis.
    pub fn dualconc_eigenbasis(&self, xt: &SymMatrix) -> f64 {
        let n = xt.n();
        let mut s = self.d2f_eigenbasis(xt);
        for k in 0..n {
            for l in 0..n {
                s += 2.0 * self.jet.grad[k] * xt.get(k, l).powi(2) * self.eig.inverse_values[l];
            }
        }
        s
    }

    pub fn dualconc(&self, x: &SymMatrix) -> f64 {
        self.dualconc_eigenbasis(&self.eig.to_eigenbasis(x))
    }

    fn require_distinct(&self) -> Result<()> {
        let l = self.lambda();
        for k in 1..l.len() {
            if is_degenerate(l[k - 1], l[k]) {
                return Err(Error::DegenerateSpectrum(k - 1, k));
            }
        }
        Ok(())
    }
}

/// `F(A) = f(lambda(A))`.
pub fn eval_f(f: &SpeedFunction, a: &SymMatrix) -> Result<f64> {
    Ok(Spectral::new(f, a, Order::Value)?.value())
}

/// `dF(A) = Q diag(grad f(lambda)) Q^T`.
pub fn df(f: &SpeedFunction, a: &SymMatrix) -> Result<SymMatrix> {
    Ok(Spectral::new(f, a, Order::Gradient)?.df())
}

/// `d2F(A)(B, B)`.
pub fn d2f_quadform(f: &SpeedFunction, a: &SymMatrix, b: &SymMatrix) -> Result<f64> {
    Ok(Spectral::new(f, a, Order::Hessian)?.d2f(b))
}

/// `d2F(A)(X, X) + 2 dF^{kp} (A^{-1})^{lq} X_kl X_pq`.
pub fn dualconc_quadform(f: &SpeedFunction, a: &SymMatrix, x: &SymMatrix) -> Result<f64> {
    Ok(Spectral::new(f, a, Order::Hessian)?.dualconc(x))
}

/// Outcome of [`check_f_concavity`].
#[derive(Clone, Debug, Serialize)]
pub struct ConcavityCheck {
    pub concave: bool,
    /// Largest eigenvalue of the Hessian of `f` at `lambda(A)`.
    pub hessian_top: f64,
    /// Largest `D_kl` over `k != l`.
    pub max_divided_difference: f64,
    /// Largest `d2F(B, B) / ||B||^2` over tested directions.
    pub worst_value: f64,
    pub worst_direction: SymMatrix,
}

fn frob(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

fn unit_pair(n: usize, k: usize, l: usize) -> SymMatrix {
    SymMatrix::from_fn(n, |i, j| if (i, j) == (k, l) { std::f64::consts::FRAC_1_SQRT_2 } else { 0.0 })
}

/// Concavity of `F` at `A`: the Hessian of `f` is non-positive and every
/// divided difference is non-positive, cross-checked along `n_dirs` random
/// directions. Sampled values are compared against
/// `tol * ||B||^2 * (||hess f|| + max grad f / lambda_min)`.
pub fn check_f_concavity(
    f: &SpeedFunction,
    a: &SymMatrix,
    n_dirs: usize,
    tol: f64,
    seed: u64,
) -> Result<ConcavityCheck> {
    let sp = Spectral::new(f, a, Order::Hessian)?;
    sp.require_distinct()?;
    let n = a.n();
    let lam = sp.lambda();
    let hess_norm = frob(&sp.jet.hess);
    let hvals = eigh(&SymMatrix::from_fn(n, |i, j| sp.jet.h(i, j)))?;
    let hessian_top = *hvals.values.last().unwrap();
    let mut ok = hessian_top <= tol * (hess_norm + 1e-300);

    let mut candidates = vec![SymMatrix::diag(&hvals.vectors.column(n - 1).iter().cloned().collect::<Vec<_>>())];
    let mut max_dd = f64::NEG_INFINITY;
    for k in 0..n {
        for l in k + 1..n {
            let d = sp.dd(k, l);
            max_dd = max_dd.max(d);
            if (sp.jet.grad[k] - sp.jet.grad[l]) * (lam[k] - lam[l]).signum()
                > tol * (sp.jet.grad[k].abs() + sp.jet.grad[l].abs())
            {
                ok = false;
            }
            candidates.push(unit_pair(n, k, l));
        }
    }
    let mut candidates: Vec<SymMatrix> = candidates.iter().map(|c| sp.eig.from_eigenbasis(c)).collect();
    let mut rng = sampling::stream(seed, 0);
    for _ in 0..n_dirs {
        let b = random::symmetric(&mut rng, n);
        let norm = b.frobenius();
        candidates.push(b.scale(1.0 / norm));
    }
    let scale = hess_norm + sp.jet.grad.iter().cloned().fold(0.0, f64::max) / lam[0];
    let mut worst_value = f64::NEG_INFINITY;
    let mut worst_direction = SymMatrix::zeros(n);
    for b in candidates.drain(..) {
        let v = sp.d2f(&b) / b.frobenius().powi(2);
        if v > worst_value {
            worst_value = v;
            worst_direction = b;
        }
    }
    if worst_value > tol * scale {
        ok = false;
    }
    Ok(ConcavityCheck {
        concave: ok,
        hessian_top,
        max_divided_difference: if n > 1 { max_dd } else { 0.0 },
        worst_value,
        worst_direction,
    })
}

/// Which inequality of the dual-concavity test is most violated.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum FstarCondition {
    /// `hess + 2 diag(grad / lambda) >= 0`.
    Diagonal,
    /// `D_kl + grad_k / lambda_l + grad_l / lambda_k >= 0`.
    Pair(usize, usize),
}

#[derive(Clone, Debug, Serialize)]
pub struct FstarCheck {
    pub holds: bool,
    pub worst_condition: FstarCondition,
    /// Normalized value of the worst condition; negative beyond `-tol` means failure.
    pub worst_value: f64,
    /// Direction `X` (in the original basis) making the dual-concavity form
    /// most negative among the per-condition candidates.
    pub witness: SymMatrix,
}

/// Concavity of `F* (A) = -F(A^{-1})` at `A`, tested through its two
/// eigenbasis conditions.
pub fn check_fstar_concavity(f: &SpeedFunction, a: &SymMatrix, tol: f64) -> Result<FstarCheck> {
    let sp = Spectral::new(f, a, Order::Hessian)?;
    sp.require_distinct()?;
    let n = a.n();
    let lam = sp.lambda();
    let g = &sp.jet.grad;
    let m = SymMatrix::from_fn(n, |i, j| sp.jet.h(i, j) + if i == j { 2.0 * g[i] / lam[i] } else { 0.0 });
    let me = eigh(&m)?;
    let mut worst_value = me.values[0] / (m.frobenius() + 1e-300);
    let mut worst_condition = FstarCondition::Diagonal;
    let mut witness_eig = SymMatrix::diag(&me.vectors.column(0).iter().cloned().collect::<Vec<_>>());
    for k in 0..n {
        for l in k + 1..n {
            let d = sp.dd(k, l);
            let (p, q) = (g[k] / lam[l], g[l] / lam[k]);
            let v = (d + p + q) / (d.abs() + p + q + 1e-300);
            if v < worst_value {
                worst_value = v;
                worst_condition = FstarCondition::Pair(k, l);
                witness_eig = unit_pair(n, k, l);
            }
        }
    }
    Ok(FstarCheck {
        holds: worst_value >= -tol,
        worst_condition,
        worst_value,
        witness: sp.eig.from_eigenbasis(&witness_eig),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn pm(r: f64, n: usize) -> SpeedFunction {
        SpeedFunction::power_mean(r, n).unwrap()
    }

    #[test]
    fn eval_examples() {
        assert_abs_diff_eq!(eval_f(&pm(0.0, 2), &SymMatrix::diag(&[1.0, 4.0])).unwrap(), 2.0, epsilon = 1e-14);
        let a = SymMatrix::from_rows(&[vec![2.0, 1.0], vec![1.0, 2.0]]).unwrap();
        assert_abs_diff_eq!(eval_f(&pm(1.0, 2), &a).unwrap(), 2.0, epsilon = 1e-14);
        let q = SpeedFunction::sym_quotient(2, 1, 3).unwrap();
        assert_abs_diff_eq!(eval_f(&q, &SymMatrix::identity(3)).unwrap(), 1.0, epsilon = 1e-14);
        assert!(matches!(eval_f(&pm(1.0, 2), &SymMatrix::diag(&[-1.0, 1.0])), Err(Error::Domain(_))));
        assert!(matches!(eval_f(&pm(1.0, 3), &a), Err(Error::ArityMismatch { .. })));
    }

    #[test]
    fn df_examples() {
        let d = df(&pm(0.0, 2), &SymMatrix::diag(&[1.0, 4.0])).unwrap();
        assert_abs_diff_eq!(d.get(0, 0), 1.0, epsilon = 1e-14);
        assert_abs_diff_eq!(d.get(1, 1), 0.25, epsilon = 1e-14);
        assert_abs_diff_eq!(d.get(0, 1), 0.0, epsilon = 1e-14);
    }

    #[test]
    fn d2f_geometric_mean_off_diagonal() {
        let b = SymMatrix::from_rows(&[vec![0.0, 1.0], vec![1.0, 0.0]]).unwrap();
        let v = d2f_quadform(&pm(0.0, 2), &SymMatrix::diag(&[1.0, 4.0]), &b).unwrap();
        assert_abs_diff_eq!(v, -0.5, epsilon = 1e-14);
    }

    #[test]
    fn dualconc_mean_at_identity() {
        let x = SymMatrix::from_rows(&[vec![0.0, 1.0], vec![1.0, 0.0]]).unwrap();
        let v = dualconc_quadform(&pm(1.0, 2), &SymMatrix::identity(2), &x).unwrap();
        assert_abs_diff_eq!(v, 2.0, epsilon = 1e-14);
        let z = dualconc_quadform(&pm(1.0, 2), &SymMatrix::identity(2), &SymMatrix::zeros(2)).unwrap();
        assert_eq!(z, 0.0);
    }

    #[test]
    fn degenerate_spectrum_rejected_by_checks() {
        let a = SymMatrix::diag(&[1.0, 1.0, 2.0]);
        assert!(matches!(check_f_concavity(&pm(0.0, 3), &a, 4, 1e-9, 0), Err(Error::DegenerateSpectrum(0, 1))));
        assert!(matches!(check_fstar_concavity(&pm(0.0, 3), &a, 1e-9), Err(Error::DegenerateSpectrum(0, 1))));
    }

    #[test]
    fn concavity_controls() {
        let a = SymMatrix::diag(&[1.0, 2.0, 5.0]);
        assert!(check_f_concavity(&pm(0.0, 3), &a, 50, 1e-9, 1).unwrap().concave);
        let lin = check_f_concavity(&pm(1.0, 3), &a, 50, 1e-9, 1).unwrap();
        assert!(lin.concave);
        assert_eq!(lin.worst_value, 0.0);
        let bad = check_f_concavity(&pm(2.0, 3), &a, 50, 1e-9, 1).unwrap();
        assert!(!bad.concave);
        assert!(d2f_quadform(&pm(2.0, 3), &a, &bad.worst_direction).unwrap() > 0.0);
    }

    #[test]
    fn fstar_controls() {
        let a = SymMatrix::diag(&[1.0, 2.0, 5.0]);
        assert!(check_fstar_concavity(&pm(0.0, 3), &a, 1e-9).unwrap().holds);
        let bad = check_fstar_concavity(&pm(-2.0, 3), &a, 1e-9).unwrap();
        assert!(!bad.holds);
        assert!(dualconc_quadform(&pm(-2.0, 3), &a, &bad.witness).unwrap() < 0.0);
    }
}
