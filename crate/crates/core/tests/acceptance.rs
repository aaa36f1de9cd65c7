//! Acceptance gates, one line per criterion. Runs without the libtest
//! harness so the PASS/FAIL lines always reach the console.

use std::process::ExitCode;
use std::time::{Duration, Instant};

use curvflow::evolve::{run_flow, run_pde, FlowConfig, FlowStatus, PdeConfig, Shape};
use curvflow::matfun::{d2f_quadform, df, eval_f, random};
use curvflow::pinch::{gamma_term, optimal_gamma, random_instance, verify, VerifyConfig, DEFAULT_GAP_MIN};
use curvflow::sampling::{normal, stream};
use curvflow::symfun::{check_class, class_catalog, recheck, Condition, SpeedFunction};

const CATALOG_SEED: u64 = 2024;
const CLASS_TOL: f64 = 1e-9;

struct Verdict {
    pass: bool,
    detail: String,
}

fn verdict(pass: bool, detail: String) -> Verdict {
    Verdict { pass, detail }
}

fn secs(d: Duration) -> String {
    format!("{:.1} s", d.as_secs_f64())
}

fn catalog_sizes() -> impl Iterator<Item = usize> {
    2..=5
}

fn catalog_certification() -> Verdict {
    let start = Instant::now();
    let mut failures = Vec::new();
    let mut count = 0;
    for n in catalog_sizes() {
        for entry in class_catalog(n, CATALOG_SEED) {
            count += 1;
            if !check_class(&entry.function, 1000, CLASS_TOL, 0).all_pass() {
                failures.push(format!("{} n={n}", entry.name));
            }
        }
    }
    let elapsed = start.elapsed();
    let pass = failures.is_empty() && elapsed < Duration::from_secs(60);
    verdict(pass, format!("{count} functions, failures {failures:?}, {}", secs(elapsed)))
}

fn negative_controls() -> Verdict {
    let mut notes = Vec::new();
    let mut pass = true;
    for (r, condition) in [(2.0, Condition::Concavity), (-2.0, Condition::InverseConcavity)] {
        let f = SpeedFunction::power_mean(r, 3).unwrap();
        let report = check_class(&f, 1000, CLASS_TOL, 0);
        let witness = report.witnesses.iter().find(|w| w.condition == condition);
        let flagged = match condition {
            Condition::Concavity => !report.concave,
            _ => !report.inverse_concave,
        };
        let reproduced = witness.and_then(|w| recheck(&f, w, CLASS_TOL)).is_some_and(|m| m > CLASS_TOL);
        pass &= flagged && reproduced;
        notes.push(format!("H_{r}: flagged {flagged}, witness reproduced {reproduced}"));
    }
    verdict(pass, notes.join("; "))
}

fn derivative_oracles() -> Verdict {
    let start = Instant::now();
    let (mut worst1, mut worst2) = (0.0f64, 0.0f64);
    for n in catalog_sizes() {
        for (idx, entry) in class_catalog(n, CATALOG_SEED).into_iter().enumerate() {
            let f = &entry.function;
            for trial in 0..500u64 {
                let mut rng = stream(1000 * n as u64 + idx as u64, trial);
                let a = random::spd_with_gap(&mut rng, n, 1e-3);
                let b = random::symmetric(&mut rng, n);
                let b = b.scale(1.0 / b.frobenius());
                let fa = eval_f(f, &a).unwrap();
                let along = |s: f64| eval_f(f, &a.axpy(s, &b)).unwrap();
                let scale1 = fa.abs() / a.frobenius();

                let h = 1e-5;
                let fd1 = (along(h) - along(-h)) / (2.0 * h);
                let d1 = df(f, &a).unwrap().inner(&b);
                worst1 = worst1.max((d1 - fd1).abs() / (fd1.abs() + scale1));

                let h = 1e-3;
                let second = |h: f64| (along(h) - 2.0 * fa + along(-h)) / (h * h);
                let fd2 = (4.0 * second(h) - second(2.0 * h)) / 3.0;
                let d2 = d2f_quadform(f, &a, &b).unwrap();
                worst2 = worst2.max((d2 - fd2).abs() / (fd2.abs() + scale1 / a.frobenius()));
            }
        }
    }
    let elapsed = start.elapsed();
    let pass = worst1 <= 1e-6 && worst2 <= 1e-4 && elapsed < Duration::from_secs(60);
    verdict(pass, format!("max dF residual {worst1:.2e}, max d2F residual {worst2:.2e}, {}", secs(elapsed)))
}

struct PinchSweep {
    max_identity: f64,
    min_q: f64,
    min_block: f64,
    violations: usize,
    h2_violations: usize,
    elapsed: Duration,
}

fn pinch_sweep() -> PinchSweep {
    let start = Instant::now();
    let mut sweep = PinchSweep {
        max_identity: 0.0,
        min_q: f64::INFINITY,
        min_block: f64::INFINITY,
        violations: 0,
        h2_violations: 0,
        elapsed: Duration::ZERO,
    };
    for n in catalog_sizes() {
        for entry in class_catalog(n, CATALOG_SEED) {
            let cfg = VerifyConfig { n, trials: 100_000, seed: 1, ..VerifyConfig::default() };
            let r = verify(&entry.function, &cfg).unwrap();
            sweep.max_identity = sweep.max_identity.max(r.max_identity_residual);
            sweep.min_q = sweep.min_q.min(r.min_q_normalized);
            let b = &r.block_minima;
            for v in [b.q1, b.qk, b.q1kl, b.qjkl].into_iter().flatten() {
                sweep.min_block = sweep.min_block.min(v);
            }
            sweep.violations += r.violation_count + r.block_violation_count;
        }
    }
    let h2 = SpeedFunction::power_mean(2.0, 3).unwrap();
    let cfg = VerifyConfig { n: 3, trials: 100_000, seed: 1, ..VerifyConfig::default() };
    sweep.h2_violations = verify(&h2, &cfg).unwrap().violation_count;
    sweep.elapsed = start.elapsed();
    sweep
}

fn block_identity(s: &PinchSweep) -> Verdict {
    verdict(s.max_identity <= 1e-9, format!("max relative residual {:.2e} over 1e5 instances per (f, n)", s.max_identity))
}

fn main_estimate(s: &PinchSweep) -> Verdict {
    let pass = s.min_q >= -1e-9
        && s.min_block >= -1e-9
        && s.violations == 0
        && s.h2_violations > 0
        && s.elapsed < Duration::from_secs(600);
    verdict(
        pass,
        format!(
            "min normalized Q {:.2e}, min block {:.2e}, H_2 violations {}, {}",
            s.min_q,
            s.min_block,
            s.h2_violations,
            secs(s.elapsed)
        ),
    )
}

fn gamma_optimality() -> Verdict {
    let catalog = class_catalog(3, CATALOG_SEED);
    let mut beaten = 0;
    for seed in 0..100u64 {
        let f = &catalog[seed as usize % catalog.len()].function;
        let mut rng = stream(seed, 0);
        let inst = random_instance(&mut rng, 3, DEFAULT_GAP_MIN);
        let best = optimal_gamma(&inst);
        let top = gamma_term(f, &inst, &best).unwrap();
        for i in 0..100 {
            let size = 10f64.powi(-(i % 5));
            let moved: Vec<Vec<f64>> =
                best.iter().map(|row| row.iter().map(|v| v + size * normal(&mut rng)).collect()).collect();
            if gamma_term(f, &inst, &moved).unwrap() >= top {
                beaten += 1;
            }
        }
    }
    verdict(beaten == 0, format!("{beaten} of 10000 perturbations matched or beat the closed form"))
}

fn sphere_check() -> Verdict {
    let mut worst = 0.0f64;
    let mut slowest = Duration::ZERO;
    for n in [2, 3] {
        let fs = [
            SpeedFunction::power_mean(1.0, n).unwrap(),
            SpeedFunction::power_mean(0.0, n).unwrap(),
            SpeedFunction::power_mean(-1.0, n).unwrap(),
            SpeedFunction::sym_quotient(2, 1, n).unwrap(),
        ];
        for f in &fs {
            let start = Instant::now();
            let cfg = FlowConfig { n, grid: 128, stop_inradius: 0.05, ..FlowConfig::default() };
            let trace = run_flow(f, &cfg).unwrap();
            slowest = slowest.max(start.elapsed());
            let c = f.eval(&vec![1.0; n]).unwrap();
            for s in &trace.samples {
                let exact = (1.0 - 2.0 * c * s.t).sqrt();
                worst = worst.max((s.inradius / exact - 1.0).abs()).max((s.circumradius / exact - 1.0).abs());
            }
        }
    }
    let pass = worst <= 1e-4 && slowest < Duration::from_secs(60);
    verdict(pass, format!("max relative radius error {worst:.2e}, slowest run {}", secs(slowest)))
}

fn pinching_monotonicity() -> Verdict {
    let start = Instant::now();
    let shapes = [Shape::Ellipsoid { a: 1.0, b: 1.5 }, Shape::Perturbed { r: 1.0, amplitude: 0.1, mode: 2 }];
    let (mut decrease, mut roundness, mut rescaled) = (0.0f64, 0.0f64, 0.0f64);
    let mut bad = Vec::new();
    for n in [2, 3] {
        for shape in &shapes {
            for entry in class_catalog(n, CATALOG_SEED) {
                let cfg = FlowConfig { n, grid: 64, shape: shape.clone(), ..FlowConfig::default() };
                let trace = run_flow(&entry.function, &cfg).unwrap();
                let last = trace.last();
                decrease = decrease.max(trace.max_pinch_decrease());
                roundness = roundness.max(last.roundness);
                rescaled = rescaled.max(last.rescaled_err);
                if trace.status != FlowStatus::Converged {
                    bad.push(format!("{} n={n} {:?}", entry.name, trace.status));
                }
            }
        }
    }
    let pass = bad.is_empty() && decrease <= 1e-6 && roundness < 1.01 && rescaled < 0.01;
    verdict(
        pass,
        format!(
            "max pinch decrease {decrease:.1e}, worst final roundness {roundness:.5}, worst rescaled error {rescaled:.2e}, unconverged {bad:?}, {}",
            secs(start.elapsed())
        ),
    )
}

fn convexity_preservation() -> Verdict {
    let start = Instant::now();
    let mut worst_drop = f64::NEG_INFINITY;
    let mut worst_exact = 0.0f64;
    for r in [0.0, -1.0, 1.0] {
        let f = SpeedFunction::power_mean(r, 2).unwrap();
        let trace = run_pde(&f, &PdeConfig { m: 65, t_end: 0.1, ..PdeConfig::default() }).unwrap();
        let initial = trace.min_hessian_eigenvalue[0];
        let lowest = trace.min_hessian_eigenvalue.iter().copied().fold(f64::INFINITY, f64::min);
        worst_drop = worst_drop.max(initial - lowest);

        let exact = run_pde(&f, &PdeConfig { m: 65, t_end: 0.1, bump: 0.0, ..PdeConfig::default() }).unwrap();
        worst_exact = worst_exact.max(exact.max_quadratic_deviation.iter().copied().fold(0.0, f64::max));
    }
    let elapsed = start.elapsed();
    let pass = worst_drop <= 1e-6 && worst_exact <= 1e-8 && elapsed < Duration::from_secs(120);
    verdict(
        pass,
        format!("largest drop of min eigenvalue {worst_drop:.2e}, unperturbed deviation {worst_exact:.2e}, {}", secs(elapsed)),
    )
}

fn grid_convergence() -> Verdict {
    let mut orders = Vec::new();
    for n in [2, 3] {
        let f = SpeedFunction::power_mean(1.0, n).unwrap();
        let t: Vec<f64> = [32, 64, 128]
            .iter()
            .map(|&grid| {
                let cfg = FlowConfig { n, grid, shape: Shape::Ellipsoid { a: 1.0, b: 1.5 }, ..FlowConfig::default() };
                run_flow(&f, &cfg).unwrap().extinction_estimate
            })
            .collect();
        orders.push(((t[0] - t[1]) / (t[1] - t[2])).abs().log2());
    }
    let pass = orders.iter().all(|&p| p >= 1.8);
    verdict(pass, format!("observed orders {orders:.3?} (N = 32, 64, 128)"))
}

fn main() -> ExitCode {
    let mut verdicts: Vec<(u32, &str, Verdict)> = Vec::new();
    let mut record = |id: u32, name: &'static str, v: Verdict| {
        println!("criterion {id:>2} {:<26} {} {}", name, if v.pass { "PASS" } else { "FAIL" }, v.detail);
        verdicts.push((id, name, v));
    };
    record(1, "class catalog", catalog_certification());
    record(2, "negative controls", negative_controls());
    record(3, "derivative oracles", derivative_oracles());
    let sweep = pinch_sweep();
    record(4, "block identity", block_identity(&sweep));
    record(5, "pinching form estimate", main_estimate(&sweep));
    record(6, "gamma optimality", gamma_optimality());
    record(7, "sphere extinction", sphere_check());
    record(8, "pinching monotonicity", pinching_monotonicity());
    record(9, "convexity preservation", convexity_preservation());
    record(10, "grid convergence", grid_convergence());
    let failed: Vec<u32> = verdicts.iter().filter(|(_, _, v)| !v.pass).map(|(id, _, _)| *id).collect();
    if failed.is_empty() {
        println!("acceptance: all {} criteria passed", verdicts.len());
        ExitCode::SUCCESS
    } else {
        println!("acceptance: failed criteria {failed:?}");
        ExitCode::FAILURE
    }
}
