use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{random_instance, FormContext, PinchInstance, QBreakdown, DEFAULT_GAP_MIN};
use crate::error::{Error, Result};
use crate::sampling;
use crate::symfun::{SpeedFunction, SpeedSpec};

/// Violations kept in full in a report; the rest are only counted.
pub const MAX_RECORDED_VIOLATIONS: usize = 16;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VerifyConfig {
    pub n: usize,
    pub trials: usize,
    pub seed: u64,
    pub tol: f64,
    pub gap_min: f64,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        VerifyConfig { n: 3, trials: 100_000, seed: 0, tol: 1e-9, gap_min: DEFAULT_GAP_MIN }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Violation {
    #[serde(flatten)]
    pub instance: PinchInstance,
    pub trial: usize,
    pub q_normalized: f64,
    pub q_blocks: QBreakdown,
}

/// Smallest normalized value of each block family (`None` if the family is
/// empty for this `n`).
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct BlockMinima {
    pub q1: Option<f64>,
    pub qk: Option<f64>,
    pub q1kl: Option<f64>,
    pub qjkl: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VerifyReport {
    pub f: SpeedSpec,
    pub n: usize,
    pub trials: usize,
    pub seed: u64,
    pub tol: f64,
    pub gap_min: f64,
    /// Smallest `Q / ||T||^2`.
    pub min_q_normalized: f64,
    pub argmin: Option<PinchInstance>,
    pub block_minima: BlockMinima,
    /// Trials where some block fell below `-tol ||T||^2`.
    pub block_violation_count: usize,
    /// Largest `|total_blocks - total_direct| / (1 + |total_direct|)`.
    pub max_identity_residual: f64,
    pub violation_count: usize,
    pub violations: Vec<Violation>,
}

impl VerifyReport {
    pub fn passed(&self) -> bool {
        self.violation_count == 0
    }
}

struct Trial {
    q_norm: f64,
    minima: [Option<f64>; 4],
    residual: f64,
    block_violation: bool,
    breakdown: Option<(PinchInstance, QBreakdown)>,
}

fn min_opt(a: Option<f64>, b: Option<f64>) -> Option<f64> {
    match (a, b) {
        (Some(x), Some(y)) => Some(x.min(y)),
        (x, None) => x,
        (None, y) => y,
    }
}

fn fold_min(v: &[f64]) -> Option<f64> {
    v.iter().copied().reduce(f64::min)
}

fn run_trial(f: &SpeedFunction, cfg: &VerifyConfig, index: usize) -> Result<Trial> {
    let mut rng = sampling::stream(cfg.seed, index as u64);
    let inst = random_instance(&mut rng, cfg.n, cfg.gap_min);
    let b = FormContext::new(f, &inst)?.q_blocks();
    let norm = inst.t.norm_sq();
    let scale = if norm > 0.0 { 1.0 / norm } else { 0.0 };
    let minima = [
        Some(b.q1 * scale),
        fold_min(&b.qk).map(|v| v * scale),
        fold_min(&b.q1kl).map(|v| v * scale),
        fold_min(&b.qjkl).map(|v| v * scale),
    ];
    let q_norm = b.total_blocks * scale;
    let block_violation = minima.iter().flatten().any(|v| *v < -cfg.tol);
    Ok(Trial {
        q_norm,
        minima,
        residual: b.identity_residual(),
        block_violation,
        breakdown: (q_norm < -cfg.tol).then_some((inst, b)),
    })
}

/// Monte-Carlo search for violations of `Q >= 0` over seeded random
/// instances. Trials run in parallel; the report does not depend on the
/// schedule.
pub fn verify(f: &SpeedFunction, cfg: &VerifyConfig) -> Result<VerifyReport> {
    if cfg.trials == 0 {
        return Err(Error::InvalidConfig("trials must be positive".into()));
    }
    if cfg.n < 2 {
        return Err(Error::InvalidConfig("n must be at least 2".into()));
    }
    if f.arity() != cfg.n {
        return Err(Error::ArityMismatch { expected: cfg.n, got: f.arity() });
    }
    let trials: Vec<Trial> =
        (0..cfg.trials).into_par_iter().map(|i| run_trial(f, cfg, i)).collect::<Result<_>>()?;

    let mut report = VerifyReport {
        f: f.spec().clone(),
        n: cfg.n,
        trials: cfg.trials,
        seed: cfg.seed,
        tol: cfg.tol,
        gap_min: cfg.gap_min,
        min_q_normalized: f64::INFINITY,
        argmin: None,
        block_minima: BlockMinima::default(),
        block_violation_count: 0,
        max_identity_residual: 0.0,
        violation_count: 0,
        violations: Vec::new(),
    };
    let mut argmin = 0;
    let mut minima = [None; 4];
    for (i, t) in trials.into_iter().enumerate() {
        if t.q_norm < report.min_q_normalized {
            report.min_q_normalized = t.q_norm;
            argmin = i;
        }
        for (m, v) in minima.iter_mut().zip(t.minima) {
            *m = min_opt(*m, v);
        }
        report.max_identity_residual = report.max_identity_residual.max(t.residual);
        report.block_violation_count += t.block_violation as usize;
        if let Some((instance, q_blocks)) = t.breakdown {
            report.violation_count += 1;
            if report.violations.len() < MAX_RECORDED_VIOLATIONS {
                report.violations.push(Violation { instance, trial: i, q_normalized: t.q_norm, q_blocks });
            }
        }
    }
    let [q1, qk, q1kl, qjkl] = minima;
    report.block_minima = BlockMinima { q1, qk, q1kl, qjkl };
    let mut rng = sampling::stream(cfg.seed, argmin as u64);
    report.argmin = Some(random_instance(&mut rng, cfg.n, cfg.gap_min));
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_run_is_clean_and_deterministic() {
        let f = SpeedFunction::power_mean(-0.5, 3).unwrap();
        let cfg = VerifyConfig { trials: 500, seed: 4, ..VerifyConfig::default() };
        let a = verify(&f, &cfg).unwrap();
        assert!(a.passed(), "{a:?}");
        assert!(a.min_q_normalized >= -1e-9);
        let b = verify(&f, &cfg).unwrap();
        assert_eq!(serde_json::to_string(&a).unwrap(), serde_json::to_string(&b).unwrap());
    }

    #[test]
    fn rejects_bad_config() {
        let f = SpeedFunction::power_mean(1.0, 3).unwrap();
        assert!(verify(&f, &VerifyConfig { trials: 0, ..VerifyConfig::default() }).is_err());
        assert!(verify(&f, &VerifyConfig { n: 4, ..VerifyConfig::default() }).is_err());
    }
}
