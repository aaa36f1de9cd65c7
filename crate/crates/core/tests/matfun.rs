use curvflow::matfun::{
    check_fstar_concavity, d2f_quadform, df, dualconc_quadform, eigh, eval_f, random, SymMatrix, GAP_THRESHOLD,
};
use curvflow::sampling::stream;
use curvflow::symfun::{class_catalog, SpeedFunction};
use nalgebra::DMatrix;
use proptest::prelude::*;

fn member(n: usize, pick: usize) -> SpeedFunction {
    let catalog = class_catalog(n, 2024);
    catalog[pick % catalog.len()].function.clone()
}

/// `Q^T A Q` computed densely, independent of `SymMatrix::congruence`.
fn rotate(a: &SymMatrix, q: &DMatrix<f64>) -> SymMatrix {
    SymMatrix::from_dmatrix(&(q.transpose() * a.to_dmatrix() * q))
}

fn max_abs_diff(a: &SymMatrix, b: &SymMatrix) -> f64 {
    (a.to_dmatrix() - b.to_dmatrix()).abs().max()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn orthogonal_invariance(n in 2usize..=5, pick in any::<usize>(), seed in any::<u64>()) {
        let f = member(n, pick);
        let mut rng = stream(seed, 0);
        let a = random::spd_with_gap(&mut rng, n, 1e-3);
        let q = random::orthogonal(&mut rng, n);
        let b = rotate(&a, &q);
        let (fa, fb) = (eval_f(&f, &a).unwrap(), eval_f(&f, &b).unwrap());
        prop_assert!((fa - fb).abs() <= 1e-9 * fa.abs());
        let da = df(&f, &a).unwrap();
        let db = df(&f, &b).unwrap();
        prop_assert!(max_abs_diff(&rotate(&da, &q), &db) <= 1e-9 * da.frobenius());
    }

    #[test]
    fn eigh_reconstructs(n in 1usize..=6, seed in any::<u64>()) {
        let mut rng = stream(seed, 1);
        let a = random::symmetric(&mut rng, n);
        let eig = eigh(&a).unwrap();
        prop_assert!(eig.values.windows(2).all(|w| w[0] <= w[1]));
        let rebuilt = &eig.vectors * DMatrix::from_diagonal(&nalgebra::DVector::from_vec(eig.values.clone())) * eig.vectors.transpose();
        prop_assert!((rebuilt - a.to_dmatrix()).abs().max() <= 1e-12 * a.frobenius().max(1.0));
    }

    #[test]
    fn derivative_oracles(n in 2usize..=5, pick in any::<usize>(), seed in any::<u64>()) {
        let f = member(n, pick);
        let mut rng = stream(seed, 2);
        let a = random::spd_with_gap(&mut rng, n, 1e-3);
        let b = random::symmetric(&mut rng, n);
        let b = b.scale(1.0 / b.frobenius());
        let fa = eval_f(&f, &a).unwrap();
        let along = |s: f64| eval_f(&f, &a.axpy(s, &b)).unwrap();

        let h = 1e-5;
        let fd1 = (along(h) - along(-h)) / (2.0 * h);
        let d1 = df(&f, &a).unwrap().inner(&b);
        let scale1 = fa.abs() / a.frobenius();
        prop_assert!((d1 - fd1).abs() <= 1e-6 * (fd1.abs() + scale1), "{d1} vs {fd1}");

        let h = 1e-3;
        let second = |h: f64| (along(h) - 2.0 * fa + along(-h)) / (h * h);
        let fd2 = (4.0 * second(h) - second(2.0 * h)) / 3.0;
        let d2 = d2f_quadform(&f, &a, &b).unwrap();
        let scale2 = scale1 / a.frobenius();
        prop_assert!((d2 - fd2).abs() <= 1e-4 * (fd2.abs() + scale2), "{d2} vs {fd2}");
    }
}

#[test]
fn second_derivative_is_continuous_across_gap_threshold() {
    for n in 2..=4 {
        for (idx, entry) in class_catalog(n, 2024).into_iter().enumerate() {
            let mut rng = stream(77, idx as u64);
            let q = random::orthogonal(&mut rng, n);
            let b = random::symmetric(&mut rng, n);
            let base: Vec<f64> = (0..n).map(|i| 1.5 + i as f64).collect();
            let at_gap = |gap: f64| {
                let mut lam = base.clone();
                lam[1] = lam[0] + gap * lam[0];
                let a = rotate(&SymMatrix::diag(&lam), &q.transpose());
                d2f_quadform(&entry.function, &a, &b).unwrap()
            };
            let (wide, narrow) = (at_gap(10.0 * GAP_THRESHOLD), at_gap(0.1 * GAP_THRESHOLD));
            assert!(
                (wide - narrow).abs() <= 1e-5 * wide.abs().max(narrow.abs()).max(1e-3),
                "{} n = {n}: {wide} vs {narrow}",
                entry.name
            );
        }
    }
}

/// `dualconc_quadform >= -tol ||X||^2` on random directions exactly when the
/// eigenbasis conditions hold; on failure the reported witness is negative.
fn dual_concavity_agrees(f: &SpeedFunction, seed: u64) -> bool {
    let n = f.arity();
    let mut rng = stream(seed, 0);
    let a = random::spd_with_gap(&mut rng, n, 1e-2);
    let check = check_fstar_concavity(f, &a, 1e-9).unwrap();
    let scale = df(f, &a).unwrap().frobenius() / eigh(&a).unwrap().values[0];
    if check.holds {
        for _ in 0..50 {
            let x = random::symmetric(&mut rng, n);
            let q = dualconc_quadform(f, &a, &x).unwrap();
            assert!(q >= -1e-9 * scale * x.frobenius().powi(2), "{q}");
        }
    } else {
        let w = &check.witness;
        assert!(dualconc_quadform(f, &a, w).unwrap() < 0.0);
    }
    check.holds
}

#[test]
fn dual_concavity_form_matches_eigenbasis_test() {
    for n in 2..=5 {
        for (i, entry) in class_catalog(n, 2024).into_iter().enumerate() {
            for s in 0..5 {
                assert!(dual_concavity_agrees(&entry.function, 100 * i as u64 + s), "{} n = {n}", entry.name);
            }
        }
    }
    let h_minus_two = SpeedFunction::power_mean(-2.0, 3).unwrap();
    let failures = (0..40).filter(|&s| !dual_concavity_agrees(&h_minus_two, s)).count();
    assert!(failures > 0);
}
