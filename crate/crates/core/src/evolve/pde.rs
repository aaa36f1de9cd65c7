//! Explicit finite differences for `u_t = F(D^2 u)` on `[-1, 1]^2`, where
//! `F(A) = f(lambda(A))` for a two-argument speed `f`.
//!
//! Initial data `|x|^2/2 + bump cos^2(pi x/2) cos^2(pi y/2)`; with `bump = 0`
//! the exact solution is `|x|^2/2 + f(1, 1) t`.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matfun::{Spectral, SymMatrix};
use crate::symfun::{Order, SpeedFunction};

/// `|u|` beyond this counts as blow-up.
pub const BLOWUP_BOUND: f64 = 1e6;
pub const PDE_CSV_HEADER: [&str; 3] = ["t", "min_hessian_eigenvalue", "max_quadratic_deviation"];

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundaryMode {
    /// Dirichlet values of the exact quadratic solution at time `t`.
    Exact,
    /// Dirichlet values frozen at their initial data.
    Frozen,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PdeConfig {
    /// Nodes per side, boundary included.
    pub m: usize,
    pub boundary_mode: BoundaryMode,
    pub bump: f64,
    /// Convexity floor; `None` uses the initial minimum of `lambda_min(D^2 u)`.
    pub epsilon0: Option<f64>,
    /// Allowed drop below `epsilon0` before the run counts as violated.
    pub tol_drift: f64,
    /// `dt = dt_factor h^2 / (4 max tr dF)`.
    pub dt_factor: f64,
    pub t_end: f64,
    /// Record a sample every this many steps (the final state is always recorded).
    pub sample_every: usize,
}

impl Default for PdeConfig {
    fn default() -> Self {
        PdeConfig {
            m: 65,
            boundary_mode: BoundaryMode::Exact,
            bump: 0.1,
            epsilon0: None,
            tol_drift: 1e-6,
            dt_factor: 0.5,
            t_end: 0.1,
            sample_every: 10,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PdeStatus {
    Preserved,
    Violated,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PdeTrace {
    pub config: PdeConfig,
    pub f: crate::symfun::SpeedSpec,
    pub times: Vec<f64>,
    /// Minimum over interior nodes of `lambda_min(D^2 u)` at each sample.
    pub min_hessian_eigenvalue: Vec<f64>,
    /// `max |u - (|x|^2/2 + f(1,1) t)|` over all nodes at each sample.
    pub max_quadratic_deviation: Vec<f64>,
    pub epsilon0: f64,
    pub dt: f64,
    pub steps: usize,
    pub status: PdeStatus,
}

impl PdeTrace {
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(PDE_CSV_HEADER)?;
        for i in 0..self.times.len() {
            w.serialize((self.times[i], self.min_hessian_eigenvalue[i], self.max_quadratic_deviation[i]))?;
        }
        w.flush()?;
        Ok(())
    }
}

struct Grid {
    m: usize,
    h: f64,
    x: Vec<f64>,
}

impl Grid {
    fn quadratic(&self, i: usize, j: usize) -> f64 {
        0.5 * (self.x[i] * self.x[i] + self.x[j] * self.x[j])
    }

    fn hessian(&self, u: &[f64], i: usize, j: usize) -> SymMatrix {
        let m = self.m;
        let at = |a: usize, b: usize| u[a * m + b];
        let h2 = self.h * self.h;
        let uxx = ((at(i + 1, j) + at(i - 1, j)) - 2.0 * at(i, j)) / h2;
        let uyy = ((at(i, j + 1) + at(i, j - 1)) - 2.0 * at(i, j)) / h2;
        let uxy = ((at(i + 1, j + 1) + at(i - 1, j - 1)) - (at(i + 1, j - 1) + at(i - 1, j + 1))) / (4.0 * h2);
        SymMatrix::new(2, vec![uxx, uxy, uyy]).expect("2 x 2")
    }
}

/// Evaluates `F(D^2 u)` at interior nodes. Returns the values, the minimum
/// eigenvalue of the discrete Hessians and the largest `tr dF`.
fn operator(f: &SpeedFunction, g: &Grid, u: &[f64], want_trace: bool) -> Result<(Vec<f64>, f64, f64)> {
    let m = g.m;
    let mut out = vec![0.0; m * m];
    let mut min_eig = f64::INFINITY;
    let mut max_tr = 0.0f64;
    let order = if want_trace { Order::Gradient } else { Order::Value };
    for i in 1..m - 1 {
        for j in 1..m - 1 {
            let hess = g.hessian(u, i, j);
            let sp = Spectral::new(f, &hess, order).map_err(|e| match e {
                Error::Domain(msg) => Error::StabilityFailure(format!(
                    "discrete Hessian not positive definite at ({}, {}): {msg}",
                    g.x[i], g.x[j]
                )),
                other => other,
            })?;
            min_eig = min_eig.min(sp.eig.min());
            if want_trace {
                max_tr = max_tr.max(sp.jet.grad.iter().sum());
            }
            out[i * m + j] = sp.value();
        }
    }
    Ok((out, min_eig, max_tr))
}

/// Runs the solver to `t_end`. Fails with `StabilityFailure` on blow-up,
/// non-finite values or loss of positive definiteness.
pub fn run_pde(f: &SpeedFunction, cfg: &PdeConfig) -> Result<PdeTrace> {
    if f.arity() != 2 {
        return Err(Error::ArityMismatch { expected: 2, got: f.arity() });
    }
    if cfg.m < 5 || !(cfg.dt_factor > 0.0) || !(cfg.t_end >= 0.0) || cfg.sample_every == 0 {
        return Err(Error::InvalidConfig(format!("{cfg:?}")));
    }
    let m = cfg.m;
    let h = 2.0 / (m - 1) as f64;
    let g = Grid { m, h, x: (0..m).map(|i| -1.0 + i as f64 * h).collect() };
    let f11 = f.eval(&[1.0, 1.0])?;
    let bump = |i: usize, j: usize| {
        let c = |x: f64| (0.5 * std::f64::consts::PI * x).cos().powi(2);
        cfg.bump * c(g.x[i]) * c(g.x[j])
    };
    let mut u: Vec<f64> = (0..m * m).map(|k| g.quadratic(k / m, k % m) + bump(k / m, k % m)).collect();
    let boundary = |i: usize, j: usize| i == 0 || j == 0 || i == m - 1 || j == m - 1;

    let (_, init_min, init_tr) = operator(f, &g, &u, true)?;
    let epsilon0 = cfg.epsilon0.unwrap_or(init_min);
    let dt = cfg.dt_factor * h * h / (4.0 * init_tr);
    let steps = (cfg.t_end / dt).ceil() as usize;
    let dt = if steps > 0 { cfg.t_end / steps as f64 } else { 0.0 };

    let deviation = |u: &[f64], t: f64| {
        (0..m * m).map(|k| (u[k] - g.quadratic(k / m, k % m) - f11 * t).abs()).fold(0.0, f64::max)
    };
    let mut trace = PdeTrace {
        config: cfg.clone(),
        f: f.spec().clone(),
        times: vec![0.0],
        min_hessian_eigenvalue: vec![init_min],
        max_quadratic_deviation: vec![deviation(&u, 0.0)],
        epsilon0,
        dt,
        steps,
        status: PdeStatus::Preserved,
    };
    for s in 1..=steps {
        let (rhs, min_eig, _) = operator(f, &g, &u, false)?;
        if s > 1 && min_eig < epsilon0 - cfg.tol_drift {
            trace.status = PdeStatus::Violated;
        }
        let t = s as f64 * dt;
        for i in 0..m {
            for j in 0..m {
                let k = i * m + j;
                if boundary(i, j) {
                    if cfg.boundary_mode == BoundaryMode::Exact {
                        u[k] = g.quadratic(i, j) + f11 * t;
                    }
                } else {
                    u[k] += dt * rhs[k];
                    if !(u[k].abs() < BLOWUP_BOUND) {
                        return Err(Error::StabilityFailure(format!("|u| = {} at step {s}", u[k].abs())));
                    }
                }
            }
        }
        if s % cfg.sample_every == 0 || s == steps {
            let (_, min_eig, _) = operator(f, &g, &u, false)?;
            if min_eig < epsilon0 - cfg.tol_drift {
                trace.status = PdeStatus::Violated;
            }
            trace.times.push(t);
            trace.min_hessian_eigenvalue.push(min_eig);
            trace.max_quadratic_deviation.push(deviation(&u, t));
        }
    }
    Ok(trace)
}
