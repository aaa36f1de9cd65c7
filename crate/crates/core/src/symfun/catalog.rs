//! The standard family of class members used throughout tests and
//! experiments: power means with `|r| <= 1`, `S_k^{1/k}`,
//! `(S_k/S_l)^{1/(k-l)}`, weighted geometric means of consecutive quotients
//! `S_{j+1}/S_j`, and positive linear combinations of these.

use rand::seq::IndexedRandom;
use rand::Rng;

use super::SpeedFunction;
use crate::sampling;

#[derive(Clone, Debug)]
pub struct CatalogEntry {
    pub name: String,
    pub function: SpeedFunction,
}

pub const CATALOG_POWERS: [f64; 5] = [-1.0, -0.5, 0.0, 0.5, 1.0];

/// Class members of arity `n`. The random weighted geometric means and
/// linear combinations are drawn from `seed`.
pub fn class_catalog(n: usize, seed: u64) -> Vec<CatalogEntry> {
    let mut out = Vec::new();
    let mut push = |name: String, f: SpeedFunction| out.push(CatalogEntry { name, function: f });

    for r in CATALOG_POWERS {
        push(format!("power-mean:{r}"), SpeedFunction::power_mean(r, n).unwrap());
    }
    for k in 1..=n {
        push(format!("elem-sym:{k}"), SpeedFunction::elem_sym(k, n).unwrap());
    }
    for k in 1..=n {
        for l in 0..k {
            push(format!("sym-quotient:{k},{l}"), SpeedFunction::sym_quotient(k, l, n).unwrap());
        }
    }
    let mut rng = sampling::stream(seed, 0);
    for i in 0..3 {
        let raw: Vec<f64> = (0..n).map(|_| -(1.0 - rng.random::<f64>()).ln()).collect();
        let total: f64 = raw.iter().sum();
        let weights: Vec<f64> = raw.iter().map(|w| w / total).collect();
        push(format!("geo-mix#{i}"), SpeedFunction::weighted_geo_mean(weights).unwrap());
    }
    let members: Vec<SpeedFunction> = out.iter().map(|e| e.function.clone()).collect();
    for i in 0..2 {
        let terms = 2 + i;
        let inners: Vec<SpeedFunction> = members.choose_multiple(&mut rng, terms).cloned().collect();
        let coeffs: Vec<f64> = (0..terms).map(|_| 0.5 + 1.5 * rng.random::<f64>()).collect();
        let outer = SpeedFunction::linear_combination(coeffs).unwrap();
        out.push(CatalogEntry {
            name: format!("linear-mix#{i}"),
            function: SpeedFunction::compose(&outer, &inners).unwrap(),
        });
    }
    out
}
