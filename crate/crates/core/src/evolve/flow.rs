use std::io::Write;

use serde::{Deserialize, Serialize};

use super::axisym::{curvatures, init_axisymmetric, midpoint_step, pinch_ratio_of, FlowState, Shape};
use crate::error::{Error, Result};
use crate::symfun::SpeedFunction;

/// Fraction of samples (the latest ones) used to fit the extinction time.
pub const FIT_WINDOW: f64 = 0.2;
pub const FLOW_CSV_HEADER: [&str; 6] = ["t", "inradius", "circumradius", "pinch_ratio", "roundness", "rescaled_err"];
pub const PROFILE_CSV_HEADER: [&str; 4] = ["theta", "u", "kappa1", "kappa2"];

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct FlowConfig {
    pub shape: Shape,
    /// Hypersurface dimension.
    pub n: usize,
    /// Number of polar grid nodes, poles included.
    pub grid: usize,
    pub cfl: f64,
    /// Stop once the inradius falls below this fraction of its initial value.
    pub stop_inradius: f64,
    pub max_steps: usize,
    /// A sample is recorded whenever `ln(inradius)` has dropped by this much
    /// since the previous sample.
    pub sample_log_step: f64,
    /// Keep a profile snapshot every this many steps (0 disables).
    pub snapshot_every: usize,
}

impl Default for FlowConfig {
    fn default() -> Self {
        FlowConfig {
            shape: Shape::Sphere { r: 1.0 },
            n: 2,
            grid: 128,
            cfl: 0.2,
            stop_inradius: 5e-4,
            max_steps: 2_000_000,
            sample_log_step: 0.01,
            snapshot_every: 0,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FlowStatus {
    Converged,
    StepLimit,
    ConvexityLost,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FlowSample {
    pub t: f64,
    pub step: usize,
    /// Support function minimum about the axial centre.
    pub inradius: f64,
    pub circumradius: f64,
    /// Spherical mean of the centred support function.
    pub mean_radius: f64,
    pub pinch_ratio: f64,
    /// `max_i max(k1, k2) / min(k1, k2)`.
    pub roundness: f64,
    /// `max_i |u_i / sqrt(2 f(1..1) (T - t)) - 1|` with `T` the extinction estimate.
    pub rescaled_err: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProfileSnapshot {
    pub t: f64,
    pub step: usize,
    pub theta: Vec<f64>,
    pub u: Vec<f64>,
    pub kappa1: Vec<f64>,
    pub kappa2: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FlowTrace {
    pub config: FlowConfig,
    pub f: crate::symfun::SpeedSpec,
    /// `f(1, ..., 1)`.
    pub f_at_ones: f64,
    pub samples: Vec<FlowSample>,
    pub extinction_estimate: f64,
    pub status: FlowStatus,
    pub steps: usize,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub message: Option<String>,
    #[serde(skip)]
    pub snapshots: Vec<ProfileSnapshot>,
}

impl FlowTrace {
    pub fn last(&self) -> &FlowSample {
        self.samples.last().expect("a trace always holds the initial sample")
    }

    /// Largest decrease of the pinching ratio between consecutive samples.
    pub fn max_pinch_decrease(&self) -> f64 {
        self.samples.windows(2).map(|w| w[0].pinch_ratio - w[1].pinch_ratio).fold(0.0, f64::max)
    }

    /// One row per sample under [`FLOW_CSV_HEADER`].
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(FLOW_CSV_HEADER)?;
        for s in &self.samples {
            w.serialize((s.t, s.inradius, s.circumradius, s.pinch_ratio, s.roundness, s.rescaled_err))?;
        }
        w.flush()?;
        Ok(())
    }
}

impl ProfileSnapshot {
    pub fn of(state: &FlowState, step: usize) -> Result<Self> {
        let k = curvatures(state)?;
        Ok(ProfileSnapshot {
            t: state.time,
            step,
            theta: state.grid.theta.clone(),
            u: state.u.clone(),
            kappa1: k.iter().map(|c| c.k1).collect(),
            kappa2: k.iter().map(|c| c.k2).collect(),
        })
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(PROFILE_CSV_HEADER)?;
        for i in 0..self.theta.len() {
            w.serialize((self.theta[i], self.u[i], self.kappa1[i], self.kappa2[i]))?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Support function about the axial centre `z = (u(0) - u(pi)) / 2`.
fn centred(state: &FlowState) -> Vec<f64> {
    let last = state.len() - 1;
    let z = 0.5 * (state.u[0] - state.u[last]);
    state.u.iter().zip(&state.grid.cos).map(|(u, c)| u - z * c).collect()
}

/// Mean over the unit sphere `S^n` of a function of `theta`
/// (trapezoidal rule with weight `sin^{n-1}`).
fn spherical_mean(v: &[f64], state: &FlowState) -> f64 {
    let (mut num, mut den) = (0.0, 0.0);
    let last = v.len() - 1;
    for i in 0..v.len() {
        let w = state.grid.sin[i].powi(state.n as i32 - 1) * if i == 0 || i == last { 0.5 } else { 1.0 };
        num += w * v[i];
        den += w;
    }
    num / den
}

fn sample(state: &FlowState, step: usize) -> Result<FlowSample> {
    let k = curvatures(state)?;
    let c = centred(state);
    let roundness = k.iter().map(|c| c.k1.max(c.k2) / c.k1.min(c.k2)).fold(1.0, f64::max);
    Ok(FlowSample {
        t: state.time,
        step,
        inradius: c.iter().copied().fold(f64::INFINITY, f64::min),
        circumradius: c.iter().copied().fold(0.0, f64::max),
        mean_radius: spherical_mean(&c, state),
        pinch_ratio: pinch_ratio_of(&k, state.n),
        roundness,
        rescaled_err: f64::NAN,
    })
}

/// Least-squares fit of `mean_radius^2` against `t` over the last
/// [`FIT_WINDOW`] of the samples; returns the zero crossing.
pub fn extinction_fit(samples: &[FlowSample]) -> f64 {
    let m = ((samples.len() as f64 * FIT_WINDOW).ceil() as usize).clamp(2.min(samples.len()), samples.len());
    let w = &samples[samples.len() - m..];
    if w.len() < 2 {
        return f64::NAN;
    }
    let k = w.len() as f64;
    let mt = w.iter().map(|s| s.t).sum::<f64>() / k;
    let my = w.iter().map(|s| s.mean_radius.powi(2)).sum::<f64>() / k;
    let (mut sxy, mut sxx) = (0.0, 0.0);
    for s in w {
        sxy += (s.t - mt) * (s.mean_radius.powi(2) - my);
        sxx += (s.t - mt).powi(2);
    }
    let slope = sxy / sxx;
    mt - my / slope
}

/// Runs the axisymmetric flow until the inradius falls below
/// `stop_inradius` times its initial value, convexity is lost, or the step
/// limit is hit. Errors only for invalid input; loss of convexity is a status.
pub fn run_flow(f: &SpeedFunction, cfg: &FlowConfig) -> Result<FlowTrace> {
    if f.arity() != cfg.n {
        return Err(Error::ArityMismatch { expected: cfg.n, got: f.arity() });
    }
    if !(cfg.cfl > 0.0 && cfg.stop_inradius > 0.0 && cfg.stop_inradius < 1.0 && cfg.sample_log_step > 0.0) {
        return Err(Error::InvalidConfig(format!("{cfg:?}")));
    }
    let f_at_ones = f.eval(&vec![1.0; cfg.n])?;
    let mut state = init_axisymmetric(&cfg.shape, cfg.n, cfg.grid)?;
    let mut samples = vec![sample(&state, 0)?];
    let mut snapshots = Vec::new();
    if cfg.snapshot_every > 0 {
        snapshots.push(ProfileSnapshot::of(&state, 0)?);
    }
    let stop = cfg.stop_inradius * samples[0].inradius;
    let mut last_log = samples[0].inradius.ln();
    let mut steps = 0;
    let mut message = None;
    let status = loop {
        if steps == cfg.max_steps {
            break FlowStatus::StepLimit;
        }
        match midpoint_step(f, &state, cfg.cfl).and_then(|(next, _)| sample(&next, steps + 1).map(|s| (next, s))) {
            Ok((next, s)) => {
                state = next;
                steps += 1;
                if cfg.snapshot_every > 0 && steps % cfg.snapshot_every == 0 {
                    snapshots.push(ProfileSnapshot::of(&state, steps)?);
                }
                let done = s.inradius < stop;
                if done || last_log - s.inradius.ln() >= cfg.sample_log_step {
                    last_log = s.inradius.ln();
                    samples.push(s);
                }
                if done {
                    break FlowStatus::Converged;
                }
            }
            Err(e @ Error::ConvexityLost(_)) => {
                message = Some(e.to_string());
                break FlowStatus::ConvexityLost;
            }
            Err(e) => return Err(e),
        }
    };
    let extinction = extinction_fit(&samples);
    for s in samples.iter_mut() {
        let scale = (2.0 * f_at_ones * (extinction - s.t)).sqrt();
        s.rescaled_err = (s.circumradius / scale - 1.0).abs().max((s.inradius / scale - 1.0).abs());
    }
    Ok(FlowTrace {
        config: cfg.clone(),
        f: f.spec().clone(),
        f_at_ones,
        samples,
        extinction_estimate: extinction,
        status,
        steps,
        message,
        snapshots,
    })
}
