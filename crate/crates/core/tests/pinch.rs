use curvflow::pinch::{
    check_phi_star, gamma_term, optimal_gamma, q_blocks, q_direct, random_instance, PinchInstance, DEFAULT_GAP_MIN,
};
use curvflow::sampling::{normal, stream};
use curvflow::symfun::{class_catalog, SpeedFunction};
use proptest::prelude::*;

fn member(n: usize, pick: usize) -> SpeedFunction {
    let catalog = class_catalog(n, 2024);
    catalog[pick % catalog.len()].function.clone()
}

fn instance(n: usize, seed: u64) -> PinchInstance {
    random_instance(&mut stream(seed, 0), n, DEFAULT_GAP_MIN)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn blocks_sum_to_direct_form(n in 2usize..=5, pick in any::<usize>(), seed in any::<u64>()) {
        let f = member(n, pick);
        let inst = instance(n, seed);
        let q = q_blocks(&f, &inst).unwrap();
        prop_assert!(q.identity_residual() <= 1e-9, "{q:?}");
        prop_assert!(q.min_block() >= -1e-9 * inst.t.norm_sq(), "{q:?}");
    }

    #[test]
    fn closed_form_gamma_is_optimal(n in 2usize..=5, pick in any::<usize>(), seed in any::<u64>()) {
        let f = member(n, pick);
        let inst = instance(n, seed);
        let best = optimal_gamma(&inst);
        let top = gamma_term(&f, &inst, &best).unwrap();

        let g = f.grad(&inst.lambda).unwrap();
        let mut oracle = 0.0;
        for (k, gk) in g.iter().enumerate() {
            for p in 1..n {
                oracle += 2.0 * gk * inst.t.get(k, p, 0).powi(2) / (inst.lambda[p] - inst.lambda[0]);
            }
        }
        prop_assert!((top - oracle).abs() <= 1e-12 * (1.0 + oracle.abs()));

        let mut rng = stream(seed, 1);
        for i in 0..20 {
            let size = 10f64.powi(-(i % 4));
            let moved: Vec<Vec<f64>> = best
                .iter()
                .map(|row| row.iter().map(|v| v + size * normal(&mut rng)).collect())
                .collect();
            prop_assert!(gamma_term(&f, &inst, &moved).unwrap() < top);
        }
    }

    #[test]
    fn quadratic_in_tensor(n in 2usize..=5, pick in any::<usize>(), seed in any::<u64>(), c in 0.1f64..10.0) {
        let f = member(n, pick);
        let inst = instance(n, seed);
        let q = q_direct(&f, &inst).unwrap();
        let qc = q_direct(&f, &inst.scaled_tensor(c)).unwrap();
        prop_assert!((qc - c * c * q).abs() <= 1e-9 * c * c * inst.t.norm_sq().max(q.abs()));
    }

    #[test]
    fn spectral_rescaling_divides_form(n in 2usize..=5, pick in any::<usize>(), seed in any::<u64>(), c in 0.1f64..10.0) {
        let f = member(n, pick);
        let inst = instance(n, seed);
        let scaled = PinchInstance { lambda: inst.lambda.iter().map(|l| c * l).collect(), ..inst.clone() };
        let q = q_direct(&f, &inst).unwrap();
        let qs = q_direct(&f, &scaled).unwrap();
        prop_assert!((qs - q / c).abs() <= 1e-9 * (inst.t.norm_sq() + q.abs()) / c);
    }
}

#[test]
fn reduced_dual_is_concave_for_class_members() {
    for n in 2..=4 {
        for (i, entry) in class_catalog(n, 2024).into_iter().enumerate() {
            let lambda: Vec<f64> = (0..n).map(|j| 0.5 + j as f64 * 0.7).collect();
            let report = check_phi_star(&entry.function, &lambda, 200, 1e-9, i as u64).unwrap();
            assert!(report.holds, "{} n = {n}: {report:?}", entry.name);
            assert!(report.max_identity_residual <= 1e-12);
        }
    }
}

#[test]
fn power_mean_two_admits_negative_form() {
    let f = SpeedFunction::power_mean(2.0, 3).unwrap();
    let negative = (0..100_000).any(|s| {
        let inst = instance(3, s);
        q_direct(&f, &inst).unwrap() < -1e-9 * inst.t.norm_sq()
    });
    assert!(negative);
}
