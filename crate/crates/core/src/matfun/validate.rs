//! Finite-difference validation of `dF` and `d2F` on seeded random matrices.
//!
//! Residuals are relative to the natural scale of a degree-one function:
//! `|a - b| / (|b| + |F(A)| (||B|| / ||A||)^k)` for the `k`-th derivative.
//! The second difference uses Richardson extrapolation of central second
//! differences at `h` and `2h`.

use serde::{Deserialize, Serialize};

use super::{eval_f, random, Spectral, GAP_THRESHOLD};
use crate::error::{Error, Result};
use crate::sampling;
use crate::symfun::{Order, SpeedFunction};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CalculusConfig {
    pub trials: usize,
    pub seed: u64,
    /// Minimum eigen-gap. Below `1e-3` the two smallest eigenvalues are
    /// placed exactly this far apart, exercising the degenerate branch when
    /// the gap is under the threshold.
    pub gap: f64,
    pub h_first: f64,
    pub h_second: f64,
    pub tol_first: f64,
    pub tol_second: f64,
}

impl Default for CalculusConfig {
    fn default() -> Self {
        CalculusConfig {
            trials: 500,
            seed: 0,
            gap: 1e-3,
            h_first: 1e-5,
            h_second: 1e-3,
            tol_first: 1e-6,
            tol_second: 1e-4,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CalculusReport {
    pub f: crate::symfun::SpeedSpec,
    pub n: usize,
    pub config: CalculusConfig,
    pub max_df_residual: f64,
    pub worst_df_trial: usize,
    pub max_d2f_residual: f64,
    pub worst_d2f_trial: usize,
    /// Trials whose spectrum had a pair below the degeneracy threshold.
    pub limit_branch_trials: usize,
    pub passed: bool,
}

fn spectrum(rng: &mut rand_chacha::ChaCha8Rng, n: usize, gap: f64) -> Vec<f64> {
    if gap >= 1e-3 {
        return random::spectrum_with_gap(rng, n, 0.1, 10.0, gap);
    }
    let mut s = random::spectrum_with_gap(rng, n - 1, 0.1, 10.0, 1e-3);
    s.insert(1, s[0] + gap);
    s
}

/// Runs the oracle comparisons for `f` of arity `n`.
pub fn calculus_suite(f: &SpeedFunction, cfg: &CalculusConfig) -> Result<CalculusReport> {
    let n = f.arity();
    if cfg.trials == 0 || !(cfg.gap > 0.0) || !(cfg.h_first > 0.0) || !(cfg.h_second > 0.0) {
        return Err(Error::InvalidConfig(format!("{cfg:?}")));
    }
    if n < 2 {
        return Err(Error::InvalidConfig("calculus checks need n >= 2".into()));
    }
    let mut report = CalculusReport {
        f: f.spec().clone(),
        n,
        config: cfg.clone(),
        max_df_residual: 0.0,
        worst_df_trial: 0,
        max_d2f_residual: 0.0,
        worst_d2f_trial: 0,
        limit_branch_trials: 0,
        passed: false,
    };
    for t in 0..cfg.trials {
        let mut rng = sampling::stream(cfg.seed, t as u64);
        let lam = spectrum(&mut rng, n, cfg.gap);
        if lam.windows(2).any(|w| (w[1] - w[0]) < GAP_THRESHOLD * w[1].max(1.0)) {
            report.limit_branch_trials += 1;
        }
        let a = random::with_spectrum(&mut rng, &lam);
        let b = random::symmetric(&mut rng, n);
        let b = b.scale(1.0 / b.frobenius());
        let sp = Spectral::new(f, &a, Order::Hessian)?;
        let fa = sp.value();
        let ratio = b.frobenius() / a.frobenius();
        let at = |s: f64| eval_f(f, &a.axpy(s, &b));

        let analytic1 = sp.df().inner(&b);
        let h = cfg.h_first;
        let fd1 = (at(h)? - at(-h)?) / (2.0 * h);
        let r1 = (analytic1 - fd1).abs() / (fd1.abs() + fa.abs() * ratio);
        if r1 > report.max_df_residual {
            report.max_df_residual = r1;
            report.worst_df_trial = t;
        }

        let analytic2 = sp.d2f(&b);
        let h = cfg.h_second;
        let second = |h: f64| -> Result<f64> { Ok((at(h)? - 2.0 * fa + at(-h)?) / (h * h)) };
        let fd2 = (4.0 * second(h)? - second(2.0 * h)?) / 3.0;
        let r2 = (analytic2 - fd2).abs() / (fd2.abs() + fa.abs() * ratio * ratio);
        if r2 > report.max_d2f_residual {
            report.max_d2f_residual = r2;
            report.worst_d2f_trial = t;
        }
    }
    report.passed = report.max_df_residual <= cfg.tol_first && report.max_d2f_residual <= cfg.tol_second;
    Ok(report)
}
