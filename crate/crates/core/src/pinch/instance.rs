use std::collections::BTreeMap;

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::Sym3Tensor;
use crate::error::{Error, Result};
use crate::sampling;

/// Default lower bound on relative eigenvalue gaps `(l_{k+1} - l_k) / l_{k+1}`.
pub const DEFAULT_GAP_MIN: f64 = 1e-4;
/// Range of the log-uniform spectra of random instances.
pub const SPECTRUM_RANGE: (f64, f64) = (1e-2, 1e2);

/// Data of the pinching inequality in the eigenbasis of `A`: an ascending
/// spectrum `lambda`, `epsilon = lambda_0 / sum(lambda)` and a totally
/// symmetric tensor `T` with
/// `T_{k00} = epsilon / (1 - epsilon) * sum_{j>0} T_{kjj}` for every `k`.
///
/// Indices are zero-based: the null direction is index 0.
///
/// Serialized as `{"lambda": [...], "epsilon": ..., "T_free": [...]}`, where
/// `T_free` lists the unconstrained entries in [`free_indices`] order.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "InstanceRecord", into = "InstanceRecord")]
pub struct PinchInstance {
    pub lambda: Vec<f64>,
    pub epsilon: f64,
    pub t: Sym3Tensor,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct InstanceRecord {
    pub lambda: Vec<f64>,
    #[serde(default, skip_deserializing)]
    pub epsilon: f64,
    #[serde(rename = "T_free")]
    pub t_free: Vec<f64>,
}

impl TryFrom<InstanceRecord> for PinchInstance {
    type Error = Error;
    fn try_from(r: InstanceRecord) -> Result<Self> {
        PinchInstance::from_free(&r.lambda, &r.t_free, 0.0)
    }
}

impl From<PinchInstance> for InstanceRecord {
    fn from(p: PinchInstance) -> Self {
        InstanceRecord { t_free: p.t_free(), epsilon: p.epsilon, lambda: p.lambda }
    }
}

/// Multi-indices of the free entries: every sorted triple except `(0, 0, k)`.
pub fn free_indices(n: usize) -> impl Iterator<Item = [usize; 3]> {
    Sym3Tensor::indices(n).filter(|&[i, j, _]| !(i == 0 && j == 0))
}

pub fn free_count(n: usize) -> usize {
    n * (n + 1) * (n + 2) / 6 - n
}

/// Checks that `lambda` is positive and increasing with relative gaps of at
/// least `gap_min` (`gap_min = 0` only demands strict increase).
pub fn check_spectrum(lambda: &[f64], gap_min: f64) -> Result<()> {
    if lambda.len() < 2 {
        return Err(Error::InvalidSpectrum("need at least two eigenvalues".into()));
    }
    if let Some(v) = lambda.iter().find(|v| !(v.is_finite() && **v > 0.0)) {
        return Err(Error::InvalidSpectrum(format!("eigenvalue {v} is not positive")));
    }
    for (k, w) in lambda.windows(2).enumerate() {
        if !(w[1] > w[0]) || (w[1] - w[0]) / w[1] < gap_min {
            return Err(Error::InvalidSpectrum(format!(
                "eigenvalues {k} and {} ({} and {}) are not increasing with relative gap {gap_min}",
                k + 1,
                w[0],
                w[1]
            )));
        }
    }
    Ok(())
}

impl PinchInstance {
    /// Builds the tensor from its free entries (in [`free_indices`] order) and
    /// fills the constrained entries `T_{k00}`.
    pub fn from_free(lambda: &[f64], t_free: &[f64], gap_min: f64) -> Result<Self> {
        check_spectrum(lambda, gap_min)?;
        let n = lambda.len();
        if t_free.len() != free_count(n) {
            return Err(Error::ShapeMismatch(format!(
                "n = {n} needs {} free components, got {}",
                free_count(n),
                t_free.len()
            )));
        }
        let mut t = Sym3Tensor::zeros(n);
        for ([i, j, k], v) in free_indices(n).zip(t_free) {
            t.set(i, j, k, *v);
        }
        let epsilon = lambda[0] / lambda.iter().sum::<f64>();
        let c = epsilon / (1.0 - epsilon);
        for k in 0..n {
            let s: f64 = (1..n).map(|j| t.get(k, j, j)).sum();
            t.set(k, 0, 0, c * s);
        }
        Ok(PinchInstance { lambda: lambda.to_vec(), epsilon, t })
    }

    pub fn n(&self) -> usize {
        self.lambda.len()
    }

    /// `epsilon / (1 - epsilon)`.
    pub fn ratio(&self) -> f64 {
        self.epsilon / (1.0 - self.epsilon)
    }

    pub fn t_free(&self) -> Vec<f64> {
        free_indices(self.n()).map(|[i, j, k]| self.t.get(i, j, k)).collect()
    }

    /// `max_k |T_{k00} - epsilon/(1-epsilon) sum_{j>0} T_{kjj}|`.
    pub fn constraint_residual(&self) -> f64 {
        let n = self.n();
        let c = self.ratio();
        (0..n)
            .map(|k| (self.t.get(k, 0, 0) - c * (1..n).map(|j| self.t.get(k, j, j)).sum::<f64>()).abs())
            .fold(0.0, f64::max)
    }

    /// Same spectrum, tensor scaled by `c`.
    pub fn scaled_tensor(&self, c: f64) -> Self {
        PinchInstance { t: self.t.scale(c), ..self.clone() }
    }
}

/// Instance with spectrum `lambda`. Free entries listed in `given` (zero-based
/// sorted or unsorted multi-indices) take those values; the rest are standard
/// normal draws from `seed`.
pub fn make_instance(
    lambda: &[f64],
    given: &BTreeMap<[usize; 3], f64>,
    seed: u64,
    gap_min: f64,
) -> Result<PinchInstance> {
    check_spectrum(lambda, gap_min)?;
    let n = lambda.len();
    let mut sorted = BTreeMap::new();
    for (idx, v) in given {
        let mut s = *idx;
        s.sort_unstable();
        if s[2] >= n {
            return Err(Error::ShapeMismatch(format!("index {idx:?} out of range for n = {n}")));
        }
        if s[0] == 0 && s[1] == 0 {
            return Err(Error::InvalidConfig(format!(
                "entry {idx:?} is fixed by the constraint and cannot be given"
            )));
        }
        sorted.insert(s, *v);
    }
    let mut rng = sampling::stream(seed, 0);
    let free: Vec<f64> = free_indices(n)
        .map(|idx| {
            let draw = sampling::normal(&mut rng);
            sorted.get(&idx).copied().unwrap_or(draw)
        })
        .collect();
    PinchInstance::from_free(lambda, &free, gap_min)
}

/// Random instance: log-uniform spectrum on [`SPECTRUM_RANGE`] (redrawn until
/// the gaps clear `gap_min`), standard normal free components.
pub fn random_instance<R: Rng + ?Sized>(rng: &mut R, n: usize, gap_min: f64) -> PinchInstance {
    let lambda = loop {
        let mut l = sampling::log_uniform_point(rng, n, SPECTRUM_RANGE.0, SPECTRUM_RANGE.1);
        l.sort_by(f64::total_cmp);
        if check_spectrum(&l, gap_min).is_ok() {
            break l;
        }
    };
    let free: Vec<f64> = (0..free_count(n)).map(|_| sampling::normal(rng)).collect();
    PinchInstance::from_free(&lambda, &free, gap_min).expect("spectrum checked above")
}
