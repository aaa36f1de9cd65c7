//! Sampled certification of the concave / inverse-concave class.
//!
//! A function `f` that is homogeneous of degree one belongs to the class when,
//! everywhere on the cone,
//!
//! 1. every partial derivative is positive,
//! 2. the Hessian is negative semi-definite,
//! 3. `hess + 2 diag(grad_i / x_i)` is positive semi-definite (equivalent to
//!    concavity of `x -> -f(1/x)`).
//!
//! [`check_class`] tests these, plus homogeneity and permutation symmetry, at
//! seeded log-uniform points of `[1e-2, 1e2]^n`. A clean report is evidence
//! gathered at finitely many points, not a proof.

use rand::seq::SliceRandom;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{ConePoint, Order, SpeedFunction, SpeedSpec};
use crate::matfun::symmetric_eigenvalues;
use crate::sampling;

/// Relative tolerance on `|f(cx) - c f(x)|`.
pub const HOMOGENEITY_TOL: f64 = 1e-10;
/// Relative tolerance on `|f(sigma x) - f(x)|`.
pub const SYMMETRY_TOL: f64 = 1e-12;

const SAMPLE_LO: f64 = 1e-2;
const SAMPLE_HI: f64 = 1e2;
const MAX_WITNESSES_PER_CONDITION: usize = 8;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Condition {
    Homogeneity,
    Symmetry,
    Monotonicity,
    Concavity,
    InverseConcavity,
    /// The function could not be evaluated at the point.
    Evaluation,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Witness {
    pub point: ConePoint,
    pub condition: Condition,
    /// Size of the violation in the units of the condition's test
    /// (relative error, or extreme eigenvalue over Frobenius norm).
    pub magnitude: f64,
    /// Scale factor used by the homogeneity test at this point.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub scale: Option<f64>,
    /// Permutation used by the symmetry test at this point.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub permutation: Option<Vec<usize>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClassReport {
    pub function: SpeedSpec,
    pub homogeneous: bool,
    pub symmetric: bool,
    pub monotone: bool,
    pub concave: bool,
    pub inverse_concave: bool,
    pub witnesses: Vec<Witness>,
    pub samples_used: usize,
    pub tol: f64,
    pub seed: u64,
    /// Smallest sampled `min_i grad_i / max_i |grad_i|`.
    pub min_gradient_ratio: f64,
    pub note: String,
}

impl ClassReport {
    pub fn all_pass(&self) -> bool {
        self.homogeneous && self.symmetric && self.monotone && self.concave && self.inverse_concave
    }
}

/// Re-run the test of `condition` at a witness. Returns the violation
/// magnitude, or `None` when the condition holds there.
pub fn recheck(f: &SpeedFunction, w: &Witness, tol: f64) -> Option<f64> {
    let x = w.point.as_slice();
    let jet = match f.jet(x, Order::Hessian) {
        Ok(j) => j,
        Err(_) => return Some(f64::INFINITY),
    };
    match w.condition {
        Condition::Homogeneity => homogeneity_violation(f, x, jet.value, w.scale?),
        Condition::Symmetry => symmetry_violation(f, x, jet.value, w.permutation.as_deref()?),
        Condition::Monotonicity => monotonicity_violation(&jet.grad, tol),
        Condition::Concavity => concavity_violation(x, &jet.grad, &jet.hess, tol),
        Condition::InverseConcavity => inverse_concavity_violation(x, &jet.grad, &jet.hess, tol),
        Condition::Evaluation => None,
    }
}

fn homogeneity_violation(f: &SpeedFunction, x: &[f64], fx: f64, c: f64) -> Option<f64> {
    let scaled: Vec<f64> = x.iter().map(|v| c * v).collect();
    let fcx = f.eval(&scaled).ok()?;
    let err = (fcx - c * fx).abs() / (c * fx.abs()).max(f64::MIN_POSITIVE);
    (err > HOMOGENEITY_TOL).then_some(err)
}

fn symmetry_violation(f: &SpeedFunction, x: &[f64], fx: f64, perm: &[usize]) -> Option<f64> {
    let permuted: Vec<f64> = perm.iter().map(|&i| x[i]).collect();
    let fpx = f.eval(&permuted).ok()?;
    let err = (fpx - fx).abs() / fx.abs().max(f64::MIN_POSITIVE);
    (err > SYMMETRY_TOL).then_some(err)
}

fn monotonicity_violation(grad: &[f64], tol: f64) -> Option<f64> {
    let scale = grad.iter().fold(0.0f64, |m, g| m.max(g.abs()));
    let min = grad.iter().cloned().fold(f64::INFINITY, f64::min);
    let ratio = if scale > 0.0 { min / scale } else { 0.0 };
    (!(ratio > tol)).then_some(-ratio)
}

fn frobenius(m: &[f64]) -> f64 {
    m.iter().map(|v| v * v).sum::<f64>().sqrt()
}

/// Scale for the concavity test: `||hess||_F + sum_i grad_i / x_i`. The second
/// term keeps the test meaningful for linear functions, whose computed Hessian
/// is pure roundoff.
fn concavity_scale(x: &[f64], grad: &[f64], hess: &[f64]) -> f64 {
    frobenius(hess) + x.iter().zip(grad).map(|(x, g)| g.abs() / x).sum::<f64>() + 1e-300
}

fn concavity_violation(x: &[f64], grad: &[f64], hess: &[f64], tol: f64) -> Option<f64> {
    let norm = concavity_scale(x, grad, hess);
    let top = *symmetric_eigenvalues(hess, x.len()).last()?;
    (top > tol * norm).then_some(top / norm)
}

fn inverse_concavity_violation(x: &[f64], grad: &[f64], hess: &[f64], tol: f64) -> Option<f64> {
    let n = x.len();
    let mut m = hess.to_vec();
    for i in 0..n {
        m[i * n + i] += 2.0 * grad[i] / x[i];
    }
    let norm = frobenius(&m) + 1e-300;
    let bottom = symmetric_eigenvalues(&m, n)[0];
    (bottom < -tol * norm).then_some(-bottom / norm)
}

struct SampleOutcome {
    witnesses: Vec<Witness>,
    gradient_ratio: f64,
}

fn check_sample(f: &SpeedFunction, index: u64, tol: f64, seed: u64) -> SampleOutcome {
    let n = f.arity();
    let mut rng = sampling::stream(seed, index);
    let x = sampling::log_uniform_point(&mut rng, n, SAMPLE_LO, SAMPLE_HI);
    let c = 0.1 + 9.9 * rng.random::<f64>();
    let mut perm: Vec<usize> = (0..n).collect();
    perm.shuffle(&mut rng);
    let point = ConePoint::new(x.clone()).expect("sampled points lie in the cone");
    let witness = |condition, magnitude| Witness {
        point: point.clone(),
        condition,
        magnitude,
        scale: None,
        permutation: None,
    };

    let jet = match f.jet(&x, Order::Hessian) {
        Ok(j) => j,
        Err(_) => {
            return SampleOutcome {
                witnesses: vec![witness(Condition::Evaluation, f64::INFINITY)],
                gradient_ratio: f64::NAN,
            }
        }
    };
    let mut out = Vec::new();
    if let Some(m) = homogeneity_violation(f, &x, jet.value, c) {
        out.push(Witness { scale: Some(c), ..witness(Condition::Homogeneity, m) });
    }
    if let Some(m) = symmetry_violation(f, &x, jet.value, &perm) {
        out.push(Witness { permutation: Some(perm.clone()), ..witness(Condition::Symmetry, m) });
    }
    if let Some(m) = monotonicity_violation(&jet.grad, tol) {
        out.push(witness(Condition::Monotonicity, m));
    }
    if let Some(m) = concavity_violation(&x, &jet.grad, &jet.hess, tol) {
        out.push(witness(Condition::Concavity, m));
    }
    if let Some(m) = inverse_concavity_violation(&x, &jet.grad, &jet.hess, tol) {
        out.push(witness(Condition::InverseConcavity, m));
    }
    let scale = jet.grad.iter().fold(0.0f64, |m, g| m.max(g.abs()));
    let min = jet.grad.iter().cloned().fold(f64::INFINITY, f64::min);
    SampleOutcome { witnesses: out, gradient_ratio: min / scale }
}

/// Sample `n_samples` points and test class membership of `f`.
///
/// Eigenvalue sign tests compare the extreme eigenvalue against `tol` times a
/// matrix scale: `||M||_F` for inverse concavity, and
/// `||hess||_F + sum grad_i / x_i` for concavity. Results depend only on `(f, n_samples, tol, seed)`.
pub fn check_class(f: &SpeedFunction, n_samples: usize, tol: f64, seed: u64) -> ClassReport {
    let outcomes: Vec<SampleOutcome> = (0..n_samples as u64)
        .into_par_iter()
        .map(|i| check_sample(f, i, tol, seed))
        .collect();

    let mut witnesses = Vec::new();
    let mut failed = std::collections::HashMap::<Condition, usize>::new();
    let mut min_ratio = f64::INFINITY;
    for o in outcomes {
        min_ratio = min_ratio.min(o.gradient_ratio);
        for w in o.witnesses {
            let count = failed.entry(w.condition).or_insert(0);
            if *count < MAX_WITNESSES_PER_CONDITION {
                witnesses.push(w);
            }
            *count += 1;
        }
    }
    let broken = |c: Condition| failed.contains_key(&c) || failed.contains_key(&Condition::Evaluation);
    ClassReport {
        function: f.spec().clone(),
        homogeneous: !broken(Condition::Homogeneity),
        symmetric: !broken(Condition::Symmetry),
        monotone: !broken(Condition::Monotonicity),
        concave: !broken(Condition::Concavity),
        inverse_concave: !broken(Condition::InverseConcavity),
        witnesses,
        samples_used: n_samples,
        tol,
        seed,
        min_gradient_ratio: min_ratio,
        note: format!(
            "conditions tested at {n_samples} sampled points; a passing report is evidence, not a proof"
        ),
    }
}
