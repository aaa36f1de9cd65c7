//! Convex bodies of revolution in `R^{n+1}` through their support function
//! `u(theta)`, `theta` the angle between the normal and the symmetry axis.
//!
//! Principal radii: `r1 = u'' + u` (meridian, multiplicity 1) and
//! `r2 = u' cot(theta) + u` (rotational, multiplicity `n - 1`). At the poles
//! `r2` takes its limit `r1`. The normal speed `f(kappa)` moves the support
//! function by `u_t = -f(kappa)`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::symfun::{Order, SpeedFunction};

pub const MIN_GRID: usize = 32;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Shape {
    Sphere { r: f64 },
    /// Semi-axis `a` along the symmetry axis, `b` equatorial.
    Ellipsoid { a: f64, b: f64 },
    /// `u = r (1 + amplitude cos(mode theta))`.
    Perturbed { r: f64, amplitude: f64, mode: u32 },
}

impl Shape {
    /// Parses `sphere:R`, `ellipsoid:a,b` or `perturbed:R,amplitude,mode`.
    pub fn parse(s: &str) -> Result<Shape> {
        let bad = || Error::InvalidConfig(format!("cannot parse shape '{s}'"));
        let (kind, args) = s.split_once(':').ok_or_else(bad)?;
        let v: Vec<f64> = args
            .split(',')
            .map(|a| a.trim().parse::<f64>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|_| bad())?;
        match (kind, v.as_slice()) {
            ("sphere", [r]) => Ok(Shape::Sphere { r: *r }),
            ("ellipsoid", [a, b]) => Ok(Shape::Ellipsoid { a: *a, b: *b }),
            ("perturbed", [r, amp, m]) if m.fract() == 0.0 && *m >= 0.0 => {
                Ok(Shape::Perturbed { r: *r, amplitude: *amp, mode: *m as u32 })
            }
            _ => Err(bad()),
        }
    }

    fn support(&self, cos: f64, sin: f64, theta: f64) -> f64 {
        match *self {
            Shape::Sphere { r } => r,
            Shape::Ellipsoid { a, b } => (a * a * cos * cos + b * b * sin * sin).sqrt(),
            Shape::Perturbed { r, amplitude, mode } => r * (1.0 + amplitude * (mode as f64 * theta).cos()),
        }
    }
}

/// Uniform polar grid `theta_i = i pi / (N - 1)` with trigonometric tables
/// that are exactly mirror-symmetric under `theta -> pi - theta`.
#[derive(Clone, Debug, PartialEq)]
pub struct Grid {
    pub theta: Vec<f64>,
    pub cos: Vec<f64>,
    pub sin: Vec<f64>,
    /// `cot(theta)`; unused (zero) at the poles.
    pub cot: Vec<f64>,
    pub dtheta: f64,
}

impl Grid {
    pub fn new(len: usize) -> Grid {
        let dtheta = std::f64::consts::PI / (len - 1) as f64;
        let mut g = Grid {
            theta: vec![0.0; len],
            cos: vec![0.0; len],
            sin: vec![0.0; len],
            cot: vec![0.0; len],
            dtheta,
        };
        for i in 0..len {
            let m = len - 1 - i;
            if i <= m {
                let t = i as f64 * dtheta;
                g.theta[i] = t;
                g.cos[i] = t.cos();
                g.sin[i] = if i == 0 { 0.0 } else { t.sin() };
                g.cot[i] = if i == 0 { 0.0 } else { g.cos[i] / g.sin[i] };
            } else {
                g.theta[i] = std::f64::consts::PI - g.theta[m];
                g.cos[i] = -g.cos[m];
                g.sin[i] = g.sin[m];
                g.cot[i] = -g.cot[m];
            }
        }
        g
    }

    pub fn len(&self) -> usize {
        self.theta.len()
    }

    pub fn is_empty(&self) -> bool {
        self.theta.is_empty()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct FlowState {
    /// Hypersurface dimension.
    pub n: usize,
    pub grid: Grid,
    pub u: Vec<f64>,
    pub time: f64,
}

/// Principal curvatures at one node: `k1` once, `k2` with multiplicity `n - 1`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct NodeCurvature {
    pub k1: f64,
    pub k2: f64,
}

impl NodeCurvature {
    /// `(k1, k2, ..., k2)` of length `n`.
    pub fn expand(&self, n: usize) -> Vec<f64> {
        let mut v = vec![self.k2; n];
        v[0] = self.k1;
        v
    }
}

/// Principal radii at node `i`, with ghost reflection `u_{-1} = u_1` at the poles.
#[inline]
fn radii(u: &[f64], grid: &Grid, i: usize) -> (f64, f64) {
    let last = u.len() - 1;
    let h = grid.dtheta;
    if i == 0 || i == last {
        let nb = if i == 0 { u[1] } else { u[last - 1] };
        let r1 = 2.0 * (nb - u[i]) / (h * h) + u[i];
        return (r1, r1);
    }
    let second = ((u[i + 1] + u[i - 1]) - 2.0 * u[i]) / (h * h);
    let first = (u[i + 1] - u[i - 1]) / (2.0 * h);
    (second + u[i], first * grid.cot[i] + u[i])
}

fn node_curvatures(u: &[f64], grid: &Grid) -> std::result::Result<Vec<NodeCurvature>, (usize, f64, f64)> {
    (0..u.len())
        .map(|i| {
            let (r1, r2) = radii(u, grid, i);
            if r1 > 0.0 && r2 > 0.0 && r1.is_finite() && r2.is_finite() {
                Ok(NodeCurvature { k1: 1.0 / r1, k2: 1.0 / r2 })
            } else {
                Err((i, r1, r2))
            }
        })
        .collect()
}

/// Support function of `shape` on an `N`-node grid.
pub fn init_axisymmetric(shape: &Shape, n: usize, len: usize) -> Result<FlowState> {
    if n < 2 {
        return Err(Error::InvalidConfig("hypersurface dimension must be at least 2".into()));
    }
    if len < MIN_GRID {
        return Err(Error::InvalidConfig(format!("grid needs at least {MIN_GRID} nodes")));
    }
    let positive = |v: f64| v.is_finite() && v > 0.0;
    let ok = match *shape {
        Shape::Sphere { r } => positive(r),
        Shape::Ellipsoid { a, b } => positive(a) && positive(b),
        Shape::Perturbed { r, amplitude, .. } => positive(r) && amplitude.is_finite(),
    };
    if !ok {
        return Err(Error::InvalidConfig(format!("shape parameters out of range: {shape:?}")));
    }
    let grid = Grid::new(len);
    let u: Vec<f64> = (0..len).map(|i| shape.support(grid.cos[i], grid.sin[i], grid.theta[i])).collect();
    if let Err((i, r1, r2)) = node_curvatures(&u, &grid) {
        return Err(Error::NonConvexShape(format!(
            "radii ({r1}, {r2}) at theta = {:.6}",
            grid.theta[i]
        )));
    }
    Ok(FlowState { n, grid, u, time: 0.0 })
}

impl FlowState {
    pub fn len(&self) -> usize {
        self.u.len()
    }

    pub fn is_empty(&self) -> bool {
        self.u.is_empty()
    }
}

/// Principal curvatures at every node.
pub fn curvatures(state: &FlowState) -> Result<Vec<NodeCurvature>> {
    node_curvatures(&state.u, &state.grid).map_err(|(i, r1, r2)| {
        Error::ConvexityLost(format!(
            "radii ({r1}, {r2}) at theta = {:.6}, t = {}",
            state.grid.theta[i], state.time
        ))
    })
}

/// `min_i min(k1, k2) / (k1 + (n - 1) k2)`, in `(0, 1/n]`.
pub fn pinch_ratio(state: &FlowState) -> Result<f64> {
    Ok(pinch_ratio_of(&curvatures(state)?, state.n))
}

pub(crate) fn pinch_ratio_of(k: &[NodeCurvature], n: usize) -> f64 {
    k.iter()
        .map(|c| c.k1.min(c.k2) / (c.k1 + (n - 1) as f64 * c.k2))
        .fold(f64::INFINITY, f64::min)
}

/// Speeds `f(kappa)` at every node, and optionally the stability scale
/// `max_i sum_j grad_j(kappa_i) kappa_ij^2`.
pub(crate) fn speeds(f: &SpeedFunction, state: &FlowState, with_scale: bool) -> Result<(Vec<f64>, f64)> {
    let k = curvatures(state)?;
    let n = state.n;
    let mut out = Vec::with_capacity(k.len());
    let mut scale = 0.0f64;
    let order = if with_scale { Order::Gradient } else { Order::Value };
    for c in &k {
        let x = c.expand(n);
        let jet = f.jet(&x, order)?;
        if with_scale {
            let s: f64 = jet.grad.iter().zip(&x).map(|(g, k)| g * k * k).sum();
            scale = scale.max(s);
        }
        out.push(jet.value);
    }
    Ok((out, scale))
}

fn check_arity(f: &SpeedFunction, state: &FlowState) -> Result<()> {
    if f.arity() != state.n {
        return Err(Error::ArityMismatch { expected: state.n, got: f.arity() });
    }
    Ok(())
}

/// One forward Euler step `u <- u - dt f(kappa)`.
pub fn step(f: &SpeedFunction, state: &FlowState, dt: f64) -> Result<FlowState> {
    check_arity(f, state)?;
    let (v, _) = speeds(f, state, false)?;
    let u = state.u.iter().zip(&v).map(|(u, s)| u - dt * s).collect();
    Ok(FlowState { u, time: state.time + dt, ..state.clone() })
}

/// Explicit midpoint step. Returns the new state and the stable step size
/// that was used: `cfl * dtheta^2 / max_i sum_j grad_j kappa_j^2`.
pub fn midpoint_step(f: &SpeedFunction, state: &FlowState, cfl: f64) -> Result<(FlowState, f64)> {
    check_arity(f, state)?;
    let (v1, scale) = speeds(f, state, true)?;
    let dt = cfl * state.grid.dtheta.powi(2) / scale;
    let half = FlowState {
        u: state.u.iter().zip(&v1).map(|(u, s)| u - 0.5 * dt * s).collect(),
        time: state.time + 0.5 * dt,
        ..state.clone()
    };
    let (v2, _) = speeds(f, &half, false)?;
    let u = state.u.iter().zip(&v2).map(|(u, s)| u - dt * s).collect();
    Ok((FlowState { u, time: state.time + dt, ..state.clone() }, dt))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sphere_is_umbilic() {
        let s = init_axisymmetric(&Shape::Sphere { r: 1.0 }, 2, 64).unwrap();
        assert!(s.u.iter().all(|&v| v == 1.0));
        for c in curvatures(&s).unwrap() {
            assert_eq!((c.k1, c.k2), (1.0, 1.0));
        }
        assert_eq!(pinch_ratio(&s).unwrap(), 0.5);
    }

    #[test]
    fn ellipsoid_support_and_equator() {
        let s = init_axisymmetric(&Shape::Ellipsoid { a: 1.0, b: 2.0 }, 2, 129).unwrap();
        assert!((s.u[0] - 1.0).abs() < 1e-15);
        assert!((s.u[64] - 2.0).abs() < 1e-15);
        let k = curvatures(&s).unwrap();
        assert!((k[64].k1 - 2.0).abs() < 1e-3);
        assert!((k[64].k2 - 0.5).abs() < 1e-12);
        assert!((pinch_ratio(&s).unwrap() - 0.2).abs() < 1e-3);
    }

    #[test]
    fn nonconvex_perturbation_rejected() {
        let e = init_axisymmetric(&Shape::Perturbed { r: 1.0, amplitude: 0.5, mode: 2 }, 2, 64);
        assert!(matches!(e, Err(Error::NonConvexShape(_))));
        assert!(init_axisymmetric(&Shape::Perturbed { r: 1.0, amplitude: 0.1, mode: 2 }, 2, 64).is_ok());
        assert!(init_axisymmetric(&Shape::Sphere { r: 1.0 }, 2, 16).is_err());
    }

    #[test]
    fn euler_step_on_sphere() {
        let f = SpeedFunction::power_mean(0.0, 3).unwrap();
        let s = init_axisymmetric(&Shape::Sphere { r: 2.0 }, 3, 64).unwrap();
        let t = step(&f, &s, 0.01).unwrap();
        assert!(t.u.iter().all(|&v| (v - (2.0 - 0.01 / 2.0)).abs() < 1e-15));
        assert_eq!(step(&f, &s, 0.0).unwrap().u, s.u);
    }

    #[test]
    fn mirror_symmetry_is_exact() {
        let f = SpeedFunction::sym_quotient(2, 1, 3).unwrap();
        let mut s = init_axisymmetric(&Shape::Ellipsoid { a: 1.0, b: 1.5 }, 3, 65).unwrap();
        for _ in 0..50 {
            s = midpoint_step(&f, &s, 0.2).unwrap().0;
        }
        let n = s.len();
        for i in 0..n {
            assert_eq!(s.u[i], s.u[n - 1 - i]);
        }
    }

    #[test]
    fn shape_shorthand() {
        assert_eq!(Shape::parse("ellipsoid:1,1.5").unwrap(), Shape::Ellipsoid { a: 1.0, b: 1.5 });
        assert_eq!(Shape::parse("perturbed:1,0.1,2").unwrap(), Shape::Perturbed { r: 1.0, amplitude: 0.1, mode: 2 });
        assert!(Shape::parse("cube:1").is_err());
        assert!(Shape::parse("perturbed:1,0.1,2.5").is_err());
    }
}
