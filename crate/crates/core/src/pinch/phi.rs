//! The reduced function `phi(x_1..x_{n-1}) = f(c sum x, x_1, ..., x_{n-1})`,
//! `c = eps/(1-eps)`, and concavity of its dual
//! `phi*(y) = -phi(1/y) = f*(psi(y), y)` with `psi(y) = (1/c) / sum(1/y_i)`.

use rand::Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::matfun::symmetric_eigenvalues;
use crate::pinch::check_spectrum;
use crate::sampling;
use crate::symfun::{Order, SpeedFunction};

const SAMPLE_LO: f64 = 1e-2;
const SAMPLE_HI: f64 = 1e2;

/// `phi` for a given `f` and `epsilon`.
pub struct ReducedFunction<'a> {
    f: &'a SpeedFunction,
    c: f64,
}

impl<'a> ReducedFunction<'a> {
    pub fn new(f: &'a SpeedFunction, epsilon: f64) -> Self {
        ReducedFunction { f, c: epsilon / (1.0 - epsilon) }
    }

    fn lift(&self, x: &[f64]) -> Vec<f64> {
        std::iter::once(self.c * x.iter().sum::<f64>()).chain(x.iter().copied()).collect()
    }

    pub fn eval(&self, x: &[f64]) -> Result<f64> {
        self.f.eval(&self.lift(x))
    }

    /// Value, gradient `L^T grad f` and row-major Hessian `L^T hess f L`.
    pub fn jet(&self, x: &[f64]) -> Result<(f64, Vec<f64>, Vec<f64>)> {
        let m = x.len();
        let j = self.f.jet(&self.lift(x), Order::Hessian)?;
        let c = self.c;
        let grad = (0..m).map(|a| c * j.grad[0] + j.grad[a + 1]).collect();
        let mut hess = vec![0.0; m * m];
        for a in 0..m {
            for b in 0..m {
                hess[a * m + b] = c * c * j.h(0, 0) + c * (j.h(0, b + 1) + j.h(a + 1, 0)) + j.h(a + 1, b + 1);
            }
        }
        Ok((j.value, grad, hess))
    }

    /// `-phi(1/y)`.
    pub fn dual(&self, y: &[f64]) -> Result<f64> {
        let inv: Vec<f64> = y.iter().map(|v| 1.0 / v).collect();
        Ok(-self.eval(&inv)?)
    }

    pub fn psi(&self, y: &[f64]) -> f64 {
        1.0 / (self.c * y.iter().map(|v| 1.0 / v).sum::<f64>())
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct PhiStarReport {
    pub epsilon: f64,
    pub samples: usize,
    /// Smallest `lambda_min(hess phi + 2 diag(grad phi / x)) / ||.||_F`.
    pub min_inverse_concavity: f64,
    /// Smallest normalized midpoint residual
    /// `(phi*((y+z)/2) - (phi*(y) + phi*(z))/2) / (|phi*(y)| + |phi*(z)|)`.
    pub min_midpoint_residual: f64,
    /// Smallest normalized midpoint residual of `psi`.
    pub min_psi_midpoint_residual: f64,
    /// Largest `|phi*(y) - f*(psi(y), y)| / |phi*(y)|`.
    pub max_identity_residual: f64,
    /// Smallest `min_i d f*/dz_i / max_i |d f*/dz_i|` at `(psi(y), y)`.
    pub min_fstar_monotonicity: f64,
    pub holds: bool,
}

/// Samples `n_samples` pairs `(y, z)` in `[1e-2, 1e2]^{n-1}` and tests
/// concavity of `phi*` together with the factorization through `psi`.
pub fn check_phi_star(
    f: &SpeedFunction,
    lambda: &[f64],
    n_samples: usize,
    tol: f64,
    seed: u64,
) -> Result<PhiStarReport> {
    check_spectrum(lambda, 0.0)?;
    let n = lambda.len();
    if f.arity() != n {
        return Err(Error::ArityMismatch { expected: f.arity(), got: n });
    }
    let epsilon = lambda[0] / lambda.iter().sum::<f64>();
    let phi = ReducedFunction::new(f, epsilon);
    let fstar = f.dual();
    let m = n - 1;
    let mut report = PhiStarReport {
        epsilon,
        samples: n_samples,
        min_inverse_concavity: f64::INFINITY,
        min_midpoint_residual: f64::INFINITY,
        min_psi_midpoint_residual: f64::INFINITY,
        max_identity_residual: 0.0,
        min_fstar_monotonicity: f64::INFINITY,
        holds: false,
    };
    for i in 0..n_samples {
        let mut rng = sampling::stream(seed, i as u64);
        let y = sampling::log_uniform_point(&mut rng, m, SAMPLE_LO, SAMPLE_HI);
        let z = sampling::log_uniform_point(&mut rng, m, SAMPLE_LO, SAMPLE_HI);
        let _: f64 = rng.random();

        let x: Vec<f64> = y.iter().map(|v| 1.0 / v).collect();
        let (_, g, h) = phi.jet(&x)?;
        let mut mat = h.clone();
        for a in 0..m {
            mat[a * m + a] += 2.0 * g[a] / x[a];
        }
        let norm = mat.iter().map(|v| v * v).sum::<f64>().sqrt() + 1e-300;
        report.min_inverse_concavity = report.min_inverse_concavity.min(symmetric_eigenvalues(&mat, m)[0] / norm);

        let mid: Vec<f64> = y.iter().zip(&z).map(|(a, b)| 0.5 * (a + b)).collect();
        let (py, pz, pm) = (phi.dual(&y)?, phi.dual(&z)?, phi.dual(&mid)?);
        report.min_midpoint_residual =
            report.min_midpoint_residual.min((pm - 0.5 * (py + pz)) / (py.abs() + pz.abs()));
        let (sy, sz, sm) = (phi.psi(&y), phi.psi(&z), phi.psi(&mid));
        report.min_psi_midpoint_residual = report.min_psi_midpoint_residual.min((sm - 0.5 * (sy + sz)) / (sy + sz));

        let arg: Vec<f64> = std::iter::once(phi.psi(&y)).chain(y.iter().copied()).collect();
        let fj = fstar.jet(&arg, Order::Gradient)?;
        report.max_identity_residual = report.max_identity_residual.max((fj.value - py).abs() / py.abs());
        let gmax = fj.grad.iter().fold(0.0f64, |a, b| a.max(b.abs()));
        let gmin = fj.grad.iter().copied().fold(f64::INFINITY, f64::min);
        report.min_fstar_monotonicity = report.min_fstar_monotonicity.min(gmin / gmax);
    }
    report.holds = report.min_inverse_concavity >= -tol
        && report.min_midpoint_residual >= -tol
        && report.min_psi_midpoint_residual >= -tol
        && report.max_identity_residual <= 1e-12
        && report.min_fstar_monotonicity > 0.0;
    Ok(report)
}
