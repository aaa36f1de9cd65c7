//! Symmetric, degree-one homogeneous speed functions on the positive cone.
//!
//! A [`SpeedFunction`] is a validated expression tree built from a small
//! catalog of leaves (power means, elementary symmetric means and quotients,
//! weighted geometric means of consecutive quotients, positive linear forms)
//! and combinators (composition, power transform, duality). Every node
//! propagates exact first and second derivatives, so the value, gradient and
//! Hessian at a point come out of a single [`SpeedFunction::jet`] call.
//!
//! Conventions: elementary symmetric functions are normalized,
//! `S_k = e_k / C(n, k)`, so `S_k(1, ..., 1) = 1`. Leaves are normalized to
//! degree one: `ElemSym(k)` is `S_k^{1/k}` and `SymQuotient(k, l)` is
//! `(S_k / S_l)^{1/(k-l)}`.

mod check;
mod catalog;
mod esym;
mod shorthand;

pub use catalog::{class_catalog, CatalogEntry};
pub use check::{check_class, recheck, ClassReport, Condition, Witness, HOMOGENEITY_TOL, SYMMETRY_TOL};
pub use shorthand::parse_speed;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use esym::{binomial, ElementaryTables};

/// A point of the positive cone: every coordinate finite and strictly positive.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct ConePoint(Vec<f64>);

impl ConePoint {
    pub fn new(coords: Vec<f64>) -> Result<Self> {
        check_cone(&coords)?;
        Ok(ConePoint(coords))
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }
}

impl TryFrom<Vec<f64>> for ConePoint {
    type Error = Error;
    fn try_from(v: Vec<f64>) -> Result<Self> {
        ConePoint::new(v)
    }
}

impl From<ConePoint> for Vec<f64> {
    fn from(p: ConePoint) -> Vec<f64> {
        p.0
    }
}

fn check_cone(x: &[f64]) -> Result<()> {
    if x.is_empty() {
        return Err(Error::Domain("empty point".into()));
    }
    if let Some((i, v)) = x.iter().enumerate().find(|(_, v)| !(v.is_finite() && **v > 0.0)) {
        return Err(Error::Domain(format!("coordinate {i} is {v}")));
    }
    Ok(())
}

/// Serializable descriptor of a speed function.
///
/// ```json
/// {"kind": "power_mean", "r": -0.5, "n": 3}
/// {"kind": "compose", "outer": {"kind": "linear_combination", "coeffs": [1, 2]},
///  "inners": [{"kind": "sym_quotient", "k": 2, "l": 1, "n": 3},
///             {"kind": "elem_sym", "k": 3, "n": 3}]}
/// ```
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SpeedSpec {
    /// `((1/n) sum x_i^r)^{1/r}`; `r = 0` is the geometric mean.
    PowerMean { r: f64, n: usize },
    /// `S_k^{1/k}`.
    ElemSym { k: usize, n: usize },
    /// `(S_k / S_l)^{1/(k-l)}` with `n >= k > l >= 0`.
    SymQuotient { k: usize, l: usize, n: usize },
    /// `prod_j (S_{j+1} / S_j)^{w_j}`, `j = 0..n-1`; weights non-negative, summing to one.
    WeightedGeoMean { weights: Vec<f64> },
    /// `sum_i c_i x_i` with every `c_i > 0`; arity is `coeffs.len()`.
    LinearCombination { coeffs: Vec<f64> },
    /// `outer(inner_1(x), ..., inner_k(x))`.
    Compose {
        outer: Box<SpeedSpec>,
        inners: Vec<SpeedSpec>,
    },
    /// `base(x_1^r, ..., x_n^r)^{1/r}`, `r` in `[-1, 1] \ {0}`.
    PowerTransform { base: Box<SpeedSpec>, r: f64 },
    /// `-base(1/x_1, ..., 1/x_n)`.
    Dual { base: Box<SpeedSpec> },
}

/// How many derivatives a jet evaluation should carry.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum Order {
    Value,
    Gradient,
    Hessian,
}

/// Value, gradient and (row-major) Hessian of a function at a point.
///
/// `grad` is empty for [`Order::Value`]; `hess` is empty unless
/// [`Order::Hessian`] was requested.
#[derive(Clone, Debug, PartialEq)]
pub struct Jet {
    pub value: f64,
    pub grad: Vec<f64>,
    pub hess: Vec<f64>,
}

impl Jet {
    pub fn dim(&self) -> usize {
        self.grad.len()
    }

    pub fn h(&self, i: usize, j: usize) -> f64 {
        self.hess[i * self.grad.len() + j]
    }

    pub fn hess_matrix(&self) -> DMatrix<f64> {
        let n = self.grad.len();
        DMatrix::from_row_slice(n, n, &self.hess)
    }
}

/// Compiled form of a [`SpeedSpec`].
#[derive(Clone, Debug)]
enum Node {
    PowerMean { r: f64, n: usize },
    /// `prod_k S_k^{p_k}` over the listed `(k, p_k)`.
    SymProduct { n: usize, powers: Vec<(usize, f64)> },
    Linear { coeffs: Vec<f64> },
    Compose { outer: Box<Node>, inners: Vec<Node> },
    PowerTransform { base: Box<Node>, r: f64 },
    Dual { base: Box<Node> },
}

/// A validated speed function. Immutable and cheap to share across threads.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(try_from = "SpeedSpec", into = "SpeedSpec")]
pub struct SpeedFunction {
    spec: SpeedSpec,
    node: Node,
    arity: usize,
}

impl PartialEq for SpeedFunction {
    fn eq(&self, other: &Self) -> bool {
        self.spec == other.spec
    }
}

impl TryFrom<SpeedSpec> for SpeedFunction {
    type Error = Error;
    fn try_from(spec: SpeedSpec) -> Result<Self> {
        SpeedFunction::new(spec)
    }
}

impl From<SpeedFunction> for SpeedSpec {
    fn from(f: SpeedFunction) -> SpeedSpec {
        f.spec
    }
}

fn invalid<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::InvalidSpec(msg.into()))
}

fn compile(spec: &SpeedSpec) -> Result<(Node, usize)> {
    match spec {
        SpeedSpec::PowerMean { r, n } => {
            if !r.is_finite() {
                return invalid(format!("power mean exponent {r}"));
            }
            if *n == 0 {
                return invalid("power mean needs n >= 1");
            }
            Ok((Node::PowerMean { r: *r, n: *n }, *n))
        }
        SpeedSpec::ElemSym { k, n } => {
            if *k == 0 || k > n {
                return invalid(format!("elem_sym needs 1 <= k <= n, got k={k}, n={n}"));
            }
            let powers = vec![(*k, 1.0 / *k as f64)];
            Ok((Node::SymProduct { n: *n, powers }, *n))
        }
        SpeedSpec::SymQuotient { k, l, n } => {
            if !(k > l && k <= n) {
                return invalid(format!("sym_quotient needs n >= k > l >= 0, got k={k}, l={l}, n={n}"));
            }
            let p = 1.0 / (k - l) as f64;
            let mut powers = vec![(*k, p)];
            if *l > 0 {
                powers.push((*l, -p));
            }
            Ok((Node::SymProduct { n: *n, powers }, *n))
        }
        SpeedSpec::WeightedGeoMean { weights } => {
            let n = weights.len();
            if n == 0 {
                return invalid("weighted_geo_mean needs at least one weight");
            }
            if weights.iter().any(|w| !(w.is_finite() && *w >= 0.0)) {
                return invalid("weighted_geo_mean weights must be non-negative");
            }
            let total: f64 = weights.iter().sum();
            if (total - 1.0).abs() > 1e-12 {
                return invalid(format!("weighted_geo_mean weights sum to {total}, not 1"));
            }
            // prod_j (S_{j+1}/S_j)^{w_j} = prod_k S_k^{w_{k-1} - w_k}, w_n = 0
            let powers = (1..=n)
                .map(|k| {
                    let next = if k < n { weights[k] } else { 0.0 };
                    (k, weights[k - 1] - next)
                })
                .filter(|(_, p)| *p != 0.0)
                .collect();
            Ok((Node::SymProduct { n, powers }, n))
        }
        SpeedSpec::LinearCombination { coeffs } => {
            if coeffs.is_empty() {
                return invalid("linear_combination needs at least one coefficient");
            }
            if coeffs.iter().any(|c| !(c.is_finite() && *c > 0.0)) {
                return invalid("linear_combination coefficients must be strictly positive");
            }
            Ok((Node::Linear { coeffs: coeffs.clone() }, coeffs.len()))
        }
        SpeedSpec::Compose { outer, inners } => {
            let (outer_node, outer_arity) = compile(outer)?;
            if inners.len() != outer_arity {
                return Err(Error::ArityMismatch { expected: outer_arity, got: inners.len() });
            }
            let mut nodes = Vec::with_capacity(inners.len());
            let mut arity = None;
            for inner in inners {
                let (node, a) = compile(inner)?;
                match arity {
                    None => arity = Some(a),
                    Some(prev) if prev != a => {
                        return Err(Error::ArityMismatch { expected: prev, got: a })
                    }
                    _ => {}
                }
                nodes.push(node);
            }
            Ok((
                Node::Compose { outer: Box::new(outer_node), inners: nodes },
                arity.expect("outer arity is at least one"),
            ))
        }
        SpeedSpec::PowerTransform { base, r } => {
            if !(r.is_finite() && *r != 0.0 && r.abs() <= 1.0) {
                return invalid(format!("power transform exponent must lie in [-1, 1] \\ {{0}}, got {r}"));
            }
            let (node, arity) = compile(base)?;
            Ok((Node::PowerTransform { base: Box::new(node), r: *r }, arity))
        }
        SpeedSpec::Dual { base } => {
            let (node, arity) = compile(base)?;
            Ok((Node::Dual { base: Box::new(node) }, arity))
        }
    }
}

impl SpeedFunction {
    /// Validate a descriptor and build the function.
    pub fn new(spec: SpeedSpec) -> Result<Self> {
        let (node, arity) = compile(&spec)?;
        Ok(SpeedFunction { spec, node, arity })
    }

    pub fn power_mean(r: f64, n: usize) -> Result<Self> {
        Self::new(SpeedSpec::PowerMean { r, n })
    }

    pub fn elem_sym(k: usize, n: usize) -> Result<Self> {
        Self::new(SpeedSpec::ElemSym { k, n })
    }

    pub fn sym_quotient(k: usize, l: usize, n: usize) -> Result<Self> {
        Self::new(SpeedSpec::SymQuotient { k, l, n })
    }

    pub fn weighted_geo_mean(weights: Vec<f64>) -> Result<Self> {
        Self::new(SpeedSpec::WeightedGeoMean { weights })
    }

    pub fn linear_combination(coeffs: Vec<f64>) -> Result<Self> {
        Self::new(SpeedSpec::LinearCombination { coeffs })
    }

    /// `outer(inners[0](x), ..., inners[k-1](x))`.
    pub fn compose(outer: &SpeedFunction, inners: &[SpeedFunction]) -> Result<Self> {
        Self::new(SpeedSpec::Compose {
            outer: Box::new(outer.spec.clone()),
            inners: inners.iter().map(|f| f.spec.clone()).collect(),
        })
    }

    /// `f_r(x) = f(x_1^r, ..., x_n^r)^{1/r}`.
    pub fn power_transform(&self, r: f64) -> Result<Self> {
        Self::new(SpeedSpec::PowerTransform { base: Box::new(self.spec.clone()), r })
    }

    /// `f*(x) = -f(1/x_1, ..., 1/x_n)`. Negative on the cone and homogeneous
    /// of degree minus one; used to phrase inverse-concavity.
    pub fn dual(&self) -> Self {
        Self::new(SpeedSpec::Dual { base: Box::new(self.spec.clone()) })
            .expect("dual of a valid function is valid")
    }

    pub fn spec(&self) -> &SpeedSpec {
        &self.spec
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(&self.spec).expect("descriptor serializes")
    }

    pub fn eval(&self, x: &[f64]) -> Result<f64> {
        Ok(self.jet(x, Order::Value)?.value)
    }

    pub fn grad(&self, x: &[f64]) -> Result<Vec<f64>> {
        Ok(self.jet(x, Order::Gradient)?.grad)
    }

    pub fn hess(&self, x: &[f64]) -> Result<DMatrix<f64>> {
        Ok(self.jet(x, Order::Hessian)?.hess_matrix())
    }

    /// Value and derivatives up to `order` at `x`.
    pub fn jet(&self, x: &[f64], order: Order) -> Result<Jet> {
        if x.len() != self.arity {
            return Err(Error::ArityMismatch { expected: self.arity, got: x.len() });
        }
        check_cone(x)?;
        node_jet(&self.node, x, order)
    }
}

fn node_jet(node: &Node, x: &[f64], order: Order) -> Result<Jet> {
    match node {
        Node::PowerMean { r, n } => Ok(power_mean_jet(*r, *n, x, order)),
        Node::SymProduct { n, powers } => Ok(sym_product_jet(*n, powers, x, order)),
        Node::Linear { coeffs } => Ok(linear_jet(coeffs, x, order)),
        Node::Compose { outer, inners } => compose_jet(outer, inners, x, order),
        Node::PowerTransform { base, r } => power_transform_jet(base, *r, x, order),
        Node::Dual { base } => dual_jet(base, x, order),
    }
}

fn power_mean_jet(r: f64, n: usize, x: &[f64], order: Order) -> Jet {
    let nf = n as f64;
    let value = if r == 0.0 {
        (x.iter().map(|v| v.ln()).sum::<f64>() / nf).exp()
    } else {
        (x.iter().map(|v| v.powf(r)).sum::<f64>() / nf).powf(1.0 / r)
    };
    let mut jet = Jet { value, grad: Vec::new(), hess: Vec::new() };
    if order == Order::Value {
        return jet;
    }
    // df/dx_i = (x_i / f)^{r-1} / n
    jet.grad = x.iter().map(|xi| (xi / value).powf(r - 1.0) / nf).collect();
    if order == Order::Hessian {
        // (1 - r) (g_i g_j / f - delta_ij g_i / x_i)
        let g = &jet.grad;
        let mut h = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                let mut v = g[i] * g[j] / value;
                if i == j {
                    v -= g[i] / x[i];
                }
                h[i * n + j] = (1.0 - r) * v;
            }
        }
        jet.hess = h;
    }
    jet
}

fn sym_product_jet(n: usize, powers: &[(usize, f64)], x: &[f64], order: Order) -> Jet {
    let tables = ElementaryTables::new(x, order >= Order::Gradient, order == Order::Hessian);
    // log f = sum_k p_k (ln e_k - ln C(n,k))
    let log_f: f64 = powers
        .iter()
        .map(|&(k, p)| p * (tables.e[k].ln() - binomial(n, k).ln()))
        .sum();
    let value = log_f.exp();
    let mut jet = Jet { value, grad: Vec::new(), hess: Vec::new() };
    if order == Order::Value {
        return jet;
    }
    // gradient of log f
    let mut lg = vec![0.0; n];
    for &(k, p) in powers {
        let ek = tables.e[k];
        for (i, g) in lg.iter_mut().enumerate() {
            *g += p * tables.de(k, i) / ek;
        }
    }
    jet.grad = lg.iter().map(|g| value * g).collect();
    if order == Order::Hessian {
        let mut h = vec![0.0; n * n];
        for i in 0..n {
            for j in i..n {
                let mut lh = 0.0;
                for &(k, p) in powers {
                    let ek = tables.e[k];
                    lh += p * (tables.d2e(k, i, j) / ek - tables.de(k, i) * tables.de(k, j) / (ek * ek));
                }
                let v = value * (lh + lg[i] * lg[j]);
                h[i * n + j] = v;
                h[j * n + i] = v;
            }
        }
        jet.hess = h;
    }
    jet
}

fn linear_jet(coeffs: &[f64], x: &[f64], order: Order) -> Jet {
    let n = coeffs.len();
    let value = coeffs.iter().zip(x).map(|(c, v)| c * v).sum();
    Jet {
        value,
        grad: if order >= Order::Gradient { coeffs.to_vec() } else { Vec::new() },
        hess: if order == Order::Hessian { vec![0.0; n * n] } else { Vec::new() },
    }
}

fn compose_jet(outer: &Node, inners: &[Node], x: &[f64], order: Order) -> Result<Jet> {
    let n = x.len();
    let k = inners.len();
    let inner_jets = inners
        .iter()
        .map(|node| node_jet(node, x, order))
        .collect::<Result<Vec<_>>>()?;
    let y: Vec<f64> = inner_jets.iter().map(|j| j.value).collect();
    check_cone(&y).map_err(|e| Error::Domain(format!("inner values of a composition: {e}")))?;
    let outer_jet = node_jet(outer, &y, order)?;
    let mut jet = Jet { value: outer_jet.value, grad: Vec::new(), hess: Vec::new() };
    if order == Order::Value {
        return Ok(jet);
    }
    let mut grad = vec![0.0; n];
    for (p, ij) in inner_jets.iter().enumerate() {
        for (g, gi) in grad.iter_mut().zip(&ij.grad) {
            *g += outer_jet.grad[p] * gi;
        }
    }
    jet.grad = grad;
    if order == Order::Hessian {
        let mut h = vec![0.0; n * n];
        for i in 0..n {
            for j in i..n {
                let mut v = 0.0;
                for p in 0..k {
                    let gp = inner_jets[p].grad[i];
                    for q in 0..k {
                        v += outer_jet.h(p, q) * gp * inner_jets[q].grad[j];
                    }
                    v += outer_jet.grad[p] * inner_jets[p].h(i, j);
                }
                h[i * n + j] = v;
                h[j * n + i] = v;
            }
        }
        jet.hess = h;
    }
    Ok(jet)
}

/// Jet of `g(x) = f(y(x))` for a coordinatewise map `y_i = y(x_i)` with
/// first and second derivatives `dy[i]`, `d2y[i]`.
fn chain_coordinatewise(inner: &Jet, dy: &[f64], d2y: &[f64], order: Order) -> Jet {
    let n = dy.len();
    let mut jet = Jet { value: inner.value, grad: Vec::new(), hess: Vec::new() };
    if order == Order::Value {
        return jet;
    }
    jet.grad = (0..n).map(|i| inner.grad[i] * dy[i]).collect();
    if order == Order::Hessian {
        let mut h = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                let mut v = inner.h(i, j) * dy[i] * dy[j];
                if i == j {
                    v += inner.grad[i] * d2y[i];
                }
                h[i * n + j] = v;
            }
        }
        jet.hess = h;
    }
    jet
}

/// Jet of `h(g(x))` for a scalar `h` with `h(g) = h0`, `h'(g) = h1`, `h''(g) = h2`.
fn chain_scalar(g: &Jet, h0: f64, h1: f64, h2: f64, order: Order) -> Jet {
    let n = g.grad.len();
    let mut jet = Jet { value: h0, grad: Vec::new(), hess: Vec::new() };
    if order == Order::Value {
        return jet;
    }
    jet.grad = g.grad.iter().map(|v| h1 * v).collect();
    if order == Order::Hessian {
        let mut h = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                h[i * n + j] = h2 * g.grad[i] * g.grad[j] + h1 * g.h(i, j);
            }
        }
        jet.hess = h;
    }
    jet
}

fn power_transform_jet(base: &Node, r: f64, x: &[f64], order: Order) -> Result<Jet> {
    let y: Vec<f64> = x.iter().map(|v| v.powf(r)).collect();
    let inner = node_jet(base, &y, order)?;
    let g_val = inner.value;
    if !(g_val > 0.0) {
        return Err(Error::Domain(format!("power transform of a non-positive value {g_val}")));
    }
    let dy: Vec<f64> = x.iter().map(|v| r * v.powf(r - 1.0)).collect();
    let d2y: Vec<f64> = x.iter().map(|v| r * (r - 1.0) * v.powf(r - 2.0)).collect();
    let g = chain_coordinatewise(&inner, &dy, &d2y, order);
    let s = 1.0 / r;
    let h0 = g_val.powf(s);
    let h1 = s * g_val.powf(s - 1.0);
    let h2 = s * (s - 1.0) * g_val.powf(s - 2.0);
    Ok(chain_scalar(&g, h0, h1, h2, order))
}

fn dual_jet(base: &Node, x: &[f64], order: Order) -> Result<Jet> {
    let y: Vec<f64> = x.iter().map(|v| 1.0 / v).collect();
    let inner = node_jet(base, &y, order)?;
    let dy: Vec<f64> = x.iter().map(|v| -1.0 / (v * v)).collect();
    let d2y: Vec<f64> = x.iter().map(|v| 2.0 / (v * v * v)).collect();
    let g = chain_coordinatewise(&inner, &dy, &d2y, order);
    Ok(chain_scalar(&g, -g.value, -1.0, 0.0, order))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn arithmetic_and_harmonic_means() {
        let h1 = SpeedFunction::power_mean(1.0, 3).unwrap();
        assert_relative_eq!(h1.eval(&[1.0, 2.0, 3.0]).unwrap(), 2.0, epsilon = 1e-15);
        let hm = SpeedFunction::power_mean(-1.0, 2).unwrap();
        assert_relative_eq!(hm.eval(&[1.0, 2.0]).unwrap(), 4.0 / 3.0, epsilon = 1e-15);
        let g = h1.grad(&[0.3, 4.0, 7.0]).unwrap();
        for gi in g {
            assert_relative_eq!(gi, 1.0 / 3.0, epsilon = 1e-15);
        }
        assert!(h1.hess(&[0.3, 4.0, 7.0]).unwrap().iter().all(|v| *v == 0.0));
    }

    #[test]
    fn quotient_normalized_at_ones() {
        let q = SpeedFunction::sym_quotient(2, 1, 3).unwrap();
        assert_relative_eq!(q.eval(&[1.0, 1.0, 1.0]).unwrap(), 1.0, epsilon = 1e-15);
        // S_2 / S_1 at (1,2,3): S_2 = 11/3, S_1 = 2
        assert_relative_eq!(q.eval(&[1.0, 2.0, 3.0]).unwrap(), 11.0 / 6.0, epsilon = 1e-14);
    }

    #[test]
    fn geometric_mean_derivatives() {
        let g = SpeedFunction::power_mean(0.0, 2).unwrap();
        let grad = g.grad(&[1.0, 2.0]).unwrap();
        assert_relative_eq!(grad[0], 2f64.sqrt() / 2.0, epsilon = 1e-15);
        assert_relative_eq!(grad[1], 2f64.sqrt() / 4.0, epsilon = 1e-15);
        let h = g.hess(&[1.0, 1.0]).unwrap();
        let expect = [[-0.25, 0.25], [0.25, -0.25]];
        for i in 0..2 {
            for j in 0..2 {
                assert_relative_eq!(h[(i, j)], expect[i][j], epsilon = 1e-15);
            }
        }
    }

    #[test]
    fn degenerate_weights_give_arithmetic_mean() {
        let w = SpeedFunction::weighted_geo_mean(vec![1.0, 0.0, 0.0]).unwrap();
        let h = SpeedFunction::power_mean(1.0, 3).unwrap();
        let x = [0.4, 2.5, 9.0];
        assert_relative_eq!(w.eval(&x).unwrap(), h.eval(&x).unwrap(), max_relative = 1e-14);
    }

    #[test]
    fn duals() {
        let g = SpeedFunction::power_mean(0.0, 3).unwrap().dual();
        assert_relative_eq!(g.eval(&[1.0, 1.0, 1.0]).unwrap(), -1.0, epsilon = 1e-15);
        let h = SpeedFunction::power_mean(1.0, 2).unwrap().dual();
        assert_relative_eq!(h.eval(&[1.0, 2.0]).unwrap(), -0.75, epsilon = 1e-15);
    }

    #[test]
    fn compose_mean_of_ones() {
        let outer = SpeedFunction::power_mean(1.0, 2).unwrap();
        let inners = [
            SpeedFunction::sym_quotient(2, 1, 3).unwrap(),
            SpeedFunction::elem_sym(1, 3).unwrap(),
        ];
        let f = SpeedFunction::compose(&outer, &inners).unwrap();
        assert_relative_eq!(f.eval(&[1.0, 1.0, 1.0]).unwrap(), 1.0, epsilon = 1e-15);
    }

    #[test]
    fn invalid_specs_rejected() {
        assert!(matches!(SpeedFunction::sym_quotient(1, 1, 3), Err(Error::InvalidSpec(_))));
        assert!(matches!(SpeedFunction::sym_quotient(4, 1, 3), Err(Error::InvalidSpec(_))));
        assert!(matches!(SpeedFunction::elem_sym(0, 3), Err(Error::InvalidSpec(_))));
        assert!(matches!(
            SpeedFunction::weighted_geo_mean(vec![1.2, -0.2]),
            Err(Error::InvalidSpec(_))
        ));
        assert!(matches!(
            SpeedFunction::weighted_geo_mean(vec![0.5, 0.4]),
            Err(Error::InvalidSpec(_))
        ));
        assert!(matches!(
            SpeedFunction::linear_combination(vec![1.0, 0.0]),
            Err(Error::InvalidSpec(_))
        ));
        let h = SpeedFunction::power_mean(1.0, 3).unwrap();
        assert!(matches!(h.power_transform(0.0), Err(Error::InvalidSpec(_))));
        assert!(matches!(h.power_transform(1.5), Err(Error::InvalidSpec(_))));
        let outer = SpeedFunction::power_mean(1.0, 2).unwrap();
        assert!(matches!(
            SpeedFunction::compose(&outer, std::slice::from_ref(&h)),
            Err(Error::ArityMismatch { .. })
        ));
        let h2 = SpeedFunction::power_mean(1.0, 2).unwrap();
        assert!(matches!(
            SpeedFunction::compose(&outer, &[h, h2]),
            Err(Error::ArityMismatch { .. })
        ));
    }

    #[test]
    fn domain_errors() {
        let h = SpeedFunction::power_mean(0.5, 2).unwrap();
        assert!(matches!(h.eval(&[1.0, 0.0]), Err(Error::Domain(_))));
        assert!(matches!(h.eval(&[1.0, -2.0]), Err(Error::Domain(_))));
        assert!(matches!(h.eval(&[1.0, f64::NAN]), Err(Error::Domain(_))));
        assert!(matches!(h.eval(&[1.0]), Err(Error::ArityMismatch { .. })));
        assert!(ConePoint::new(vec![1.0, 0.0]).is_err());
    }

    #[test]
    fn json_round_trip() {
        let text = r#"{"kind":"power_mean","r":-0.5,"n":3}"#;
        let f: SpeedFunction = serde_json::from_str(text).unwrap();
        assert_eq!(f.spec(), &SpeedSpec::PowerMean { r: -0.5, n: 3 });
        assert_eq!(f.to_json(), text);
        let bad = r#"{"kind":"sym_quotient","k":1,"l":2,"n":3}"#;
        assert!(serde_json::from_str::<SpeedFunction>(bad).is_err());
    }
}
