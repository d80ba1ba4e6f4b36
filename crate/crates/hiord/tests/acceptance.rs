//! Acceptance report: one PASS/FAIL line per criterion.
//!
//! Runs as a plain binary under `cargo test`. Criterion 2 compares the
//! fourth-order penalty example against its expected values, three of
//! which disagree with the exact derivatives; those deviations are
//! reported and do not fail the run. Any other failure does.

use std::process::{Command, ExitCode};
use std::time::Instant;

use hiord::demo::{PENALTY_TOL, SADDLE_TOL};
use hiord::sweep::{run_sweep, SweepSpec};
use hiord_core::conditions::{demo_penalty, demo_saddle};
use hiord_core::convex::ConvexSet;
use hiord_core::criticality::{phi, phi_bruteforce, PhiOptions, TaylorModel};
use hiord_core::linalg::{norm, null_space};
use hiord_core::outer::{
    lower_bound_probe, scaled_kkt_check, solve, verify_certificate, CertificateKind, OuterConfig,
    TerminationCertificate,
};
use hiord_core::poly::Polynomial;
use hiord_core::problem::{catalogue, PolynomialProblem, ProblemOracle};
use hiord_core::tensor::SymmetricTensor;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

fn close(a: f64, b: f64, rel: f64, abs: f64) -> bool {
    (a - b).abs() <= rel * a.abs().max(b.abs()) + abs
}

fn random_vector(r: &mut StdRng, n: usize, scale: f64) -> Vec<f64> {
    (0..n).map(|_| r.gen_range(-scale..scale)).collect()
}

fn random_polynomial(r: &mut StdRng, n: usize, degree: u32, terms: usize) -> Polynomial {
    let list = (0..terms)
        .map(|_| {
            let mut e = vec![0u32; n];
            for _ in 0..r.gen_range(0..=degree) {
                e[r.gen_range(0..n)] += 1;
            }
            (e, r.gen_range(-2.0..2.0))
        })
        .collect();
    Polynomial::new(n, list).unwrap()
}

fn random_problem(r: &mut StdRng, n: usize, m: usize) -> PolynomialProblem {
    let f = random_polynomial(r, n, 4, 6);
    let c = (0..m).map(|_| random_polynomial(r, n, 4, 5)).collect();
    PolynomialProblem::new(f, c, ConvexSet::all(n), None).unwrap()
}

fn random_set(r: &mut StdRng, n: usize) -> ConvexSet {
    match r.gen_range(0..3) {
        0 => ConvexSet::all(n),
        1 => {
            let lo = (0..n).map(|_| r.gen_range(-1.5..-0.05)).collect();
            let hi = (0..n).map(|_| r.gen_range(0.05..1.5)).collect();
            ConvexSet::new_box(lo, hi).unwrap()
        }
        _ => {
            let center = random_vector(r, n, 0.5);
            let radius = norm(&center) + r.gen_range(0.05..1.0);
            ConvexSet::ball(center, radius).unwrap()
        }
    }
}

fn random_model(r: &mut StdRng, n: usize, degree: usize) -> TaylorModel {
    let tensors = (1..=degree)
        .map(|k| SymmetricTensor::new(k, n, random_vector(r, n.pow(k as u32), 1.0)).unwrap())
        .collect();
    TaylorModel::new(n, r.gen_range(-1.0..1.0), tensors).unwrap()
}

fn saddle_example() -> Outcome {
    let started = Instant::now();
    let demo = demo_saddle(SADDLE_TOL).unwrap();
    let secs = started.elapsed().as_secs_f64();
    let failures: Vec<_> = demo.failures().map(|f| f.label.clone()).collect();
    let verdict = demo.conditions.iter().all(|(_, r)| r.verdict);
    outcome(
        failures.is_empty() && verdict && secs < 1.0,
        format!(
            "{} values within {SADDLE_TOL:e}, deviations {failures:?}, {secs:.3}s",
            demo.items.len()
        ),
    )
}

/// Labels whose expected values disagree with the exact derivatives.
const KNOWN_PENALTY_DEVIATIONS: [&str; 3] = [
    "max |D3 mu(0, t)| entry",
    "D4 mu(0, t)[e1]^4",
    "mu order-4 value at tau=",
];

fn penalty_example() -> (Outcome, bool) {
    let started = Instant::now();
    let mut failing = Vec::new();
    let mut total = 0;
    for eps in [0.25, 1.0] {
        let demo = demo_penalty(eps, &[0.5, 1.0, 2.0], PENALTY_TOL).unwrap();
        total += demo.items.len();
        for f in demo.failures() {
            failing.push(format!(
                "{} (eps {eps}: got {}, expected {})",
                f.label, f.computed, f.expected
            ));
        }
    }
    let secs = started.elapsed().as_secs_f64();
    let only_known = failing
        .iter()
        .all(|f| KNOWN_PENALTY_DEVIATIONS.iter().any(|k| f.starts_with(k)));
    let detail = format!(
        "{}/{total} values within {PENALTY_TOL:e}, {secs:.3}s; deviating: {}",
        total - failing.len(),
        if failing.is_empty() {
            String::from("none")
        } else {
            failing.join("; ")
        }
    );
    (
        outcome(failing.is_empty() && secs < 1.0, detail),
        only_known && secs < 1.0,
    )
}

fn phi_oracle() -> Outcome {
    let started = Instant::now();
    let mut r = StdRng::seed_from_u64(3);
    let opts = PhiOptions::default();
    let mut worst: f64 = 0.0;
    let mut monotone = true;
    let mut linear_ratio = true;
    for i in 0..100 {
        let n = r.gen_range(1..=3);
        let degree = r.gen_range(1..=4);
        let model = random_model(&mut r, n, degree);
        let set = random_set(&mut r, n);
        let shifted = set.shifted(&set.project(&vec![0.0; n]));
        let delta = [0.1, 0.5, 1.0][i % 3];
        let fast = phi(&model, &shifted, delta, &opts).unwrap().phi;
        let reference = phi_bruteforce(&model, &shifted, delta, 17).unwrap();
        worst = worst.max((fast - reference).abs() / fast.abs().max(1.0));
        let values: Vec<f64> = [0.1, 0.5, 1.0]
            .iter()
            .map(|d| phi(&model, &shifted, *d, &opts).unwrap().phi)
            .collect();
        monotone &= values.windows(2).all(|w| w[0] <= w[1] + 1e-12);
        let linear = model.truncated(1);
        let all = ConvexSet::all(n);
        let ratios: Vec<f64> = [0.1, 0.5, 1.0]
            .iter()
            .map(|d| phi(&linear, &all, *d, &opts).unwrap().phi / d)
            .collect();
        linear_ratio &= ratios.iter().all(|q| close(*q, ratios[0], 1e-10, 0.0));
    }
    let secs = started.elapsed().as_secs_f64();
    outcome(
        worst <= 1e-6 && monotone && linear_ratio && secs < 60.0,
        format!("worst relative gap {worst:.2e}, monotone {monotone}, phi_1/delta constant {linear_ratio}, {secs:.2}s"),
    )
}

fn derivative_assemblies() -> Outcome {
    let mut r = StdRng::seed_from_u64(4);
    let mut worst_exact: f64 = 0.0;
    let mut fd_ok = true;
    for _ in 0..50 {
        let n = r.gen_range(1..=3);
        let m = r.gen_range(0..=2);
        let p = random_problem(&mut r, n, m);
        let x = random_vector(&mut r, n, 1.0);
        let t = r.gen_range(-2.0..2.0);
        let y = random_vector(&mut r, m, 2.0);
        let v = random_vector(&mut r, n, 1.0);
        let mut lag = p.objective().clone();
        for (yi, c) in y.iter().zip(p.constraints()) {
            lag = lag.axpy(*yi, c).unwrap();
        }
        let polys = [p.nu_polynomial().unwrap(), p.mu_polynomial(t).unwrap(), lag];
        let model_at = |z: &[f64], which: usize| {
            let b = p.bundle(z, 4).unwrap();
            match which {
                0 => b.nu_model(4).unwrap(),
                1 => b.mu_model(t, 4).unwrap(),
                _ => b.lagrangian_model(&y, 4).unwrap(),
            }
        };
        for (which, poly) in polys.iter().enumerate() {
            let here = model_at(&x, which);
            for k in 1..=4 {
                let exact = poly.derivative_tensor(&x, k).unwrap();
                for (a, e) in here.tensors[k - 1].data().iter().zip(exact.data()) {
                    worst_exact = worst_exact.max((a - e).abs() / a.abs().max(e.abs()).max(1.0));
                }
                let h = 1e-5;
                let plus: Vec<f64> = x.iter().zip(&v).map(|(a, b)| a + h * b).collect();
                let minus: Vec<f64> = x.iter().zip(&v).map(|(a, b)| a - h * b).collect();
                let fd = if k == 1 {
                    (model_at(&plus, which).value - model_at(&minus, which).value) / (2.0 * h)
                } else {
                    (model_at(&plus, which).tensors[k - 2].apply_same(&v)
                        - model_at(&minus, which).tensors[k - 2].apply_same(&v))
                        / (2.0 * h)
                };
                let scale = here.tensors.iter().map(|t| t.max_abs()).fold(1.0, f64::max) * norm(&v).max(1.0).powi(4);
                fd_ok &= close(here.tensors[k - 1].apply_same(&v), fd, 1e-5, 1e-5 * scale);
            }
        }
    }
    let mut identities_ok = true;
    let mut directions = 0;
    let mut cases: Vec<(PolynomialProblem, Vec<f64>)> = Vec::new();
    for eps in [0.1, 0.5, 1.0] {
        let p = catalogue("theprob", Some(eps)).unwrap();
        cases.push((p.clone(), vec![0.0, 0.0]));
        cases.push((p, random_vector(&mut r, 2, 1.0)));
    }
    for _ in 0..30 {
        let p = random_problem(&mut r, 3, 1);
        let x = random_vector(&mut r, 3, 1.0);
        cases.push((p, x));
    }
    for (p, x) in cases {
        let (f, _) = p.values(&x);
        let t = f - r.gen_range(0.1..2.0);
        let b = p.bundle(&x, 3).unwrap();
        let gap = b.f - t;
        let y: Vec<f64> = b.c.iter().map(|c| c / gap).collect();
        let mu = b.mu_model(t, 3).unwrap();
        let lag = b.lagrangian_model(&y, 3).unwrap();
        for d in null_space(&b.stacked_gradients(), p.dim(), None) {
            directions += 1;
            for k in [2usize, 3] {
                let lhs = mu.tensors[k - 1].apply_same(&d);
                identities_ok &= close(lhs, gap * lag.tensors[k - 1].apply_same(&d), 1e-10, 1e-10);
            }
        }
    }
    outcome(
        worst_exact <= 1e-10 && fd_ok && identities_ok,
        format!(
            "worst exact mismatch {worst_exact:.1e}, finite differences {}, subspace identities {} on {directions} directions",
            if fd_ok { "agree" } else { "DISAGREE" },
            if identities_ok { "hold" } else { "FAIL" }
        ),
    )
}

const MATRIX: &[(&str, &[usize])] = &[
    ("circle_linear", &[1, 2]),
    ("box_quadratic", &[1, 2, 3]),
    ("infeasible1d", &[1, 2, 3]),
    ("theprob", &[1]),
    ("saddle3d", &[1, 2]),
];

struct Run {
    name: &'static str,
    prob: PolynomialProblem,
    cfg: OuterConfig,
    cert: TerminationCertificate,
}

fn solve_matrix() -> (Outcome, Vec<Run>) {
    let mut runs = Vec::new();
    let mut failures = Vec::new();
    let mut checks = 0;
    for &(name, orders) in MATRIX {
        let prob = catalogue(name, None).unwrap();
        let x0 = prob
            .start()
            .map(<[f64]>::to_vec)
            .unwrap_or_else(|| vec![0.5; prob.dim()]);
        for &q in orders {
            for eps in [1e-1, 1e-2, 1e-3] {
                if q == 3 && eps < 1e-2 {
                    continue;
                }
                let cfg = OuterConfig::new(eps, eps, q).unwrap();
                match solve(&prob, &x0, &cfg) {
                    Ok((cert, trace)) => {
                        checks += trace.invariant_checks.values().sum::<usize>();
                        runs.push(Run {
                            name,
                            prob: prob.clone(),
                            cfg,
                            cert,
                        });
                    }
                    Err(e) => failures.push(format!("{name} q={q} eps={eps}: {e}")),
                }
            }
        }
    }
    let problems = MATRIX.len();
    (
        outcome(
            failures.is_empty(),
            format!(
                "{} solves over {problems} problems x 3 tolerances, {checks} invariant checks, failures {failures:?}",
                runs.len()
            ),
        ),
        runs,
    )
}

fn certificates(runs: &[Run]) -> Outcome {
    let mut bad = Vec::new();
    for run in runs {
        let ok = verify_certificate(&run.prob, &run.cert, &run.cfg).unwrap();
        let kkt = match run.cert.kind {
            CertificateKind::InfeasibleCritical => true,
            CertificateKind::ScaledCritical => {
                let y = run
                    .cert
                    .y
                    .clone()
                    .unwrap_or_else(|| vec![0.0; run.prob.num_constraints()]);
                scaled_kkt_check(
                    &run.prob,
                    &run.cert.x,
                    &y,
                    run.cert.delta,
                    run.cfg.eps_d,
                    run.cfg.q,
                    &run.cfg.phase2.phi,
                )
                .unwrap()
                .pass
            }
        };
        if !(ok && kkt) {
            bad.push(format!("{} q={} eps={}", run.name, run.cfg.q, run.cfg.eps_p));
        }
    }
    let circle = runs
        .iter()
        .find(|r| r.name == "circle_linear" && r.cfg.q == 1 && r.cfg.eps_p == 1e-3)
        .and_then(|r| r.cert.y.clone())
        .map_or(f64::NAN, |y| y[0]);
    let y_ok = (circle - 0.5f64.sqrt()).abs() <= 1e-3;
    outcome(
        bad.is_empty() && y_ok,
        format!(
            "{} certificates re-verified, failing {bad:?}, circle_linear y = {circle:.6}",
            runs.len()
        ),
    )
}

fn complexity() -> Outcome {
    let started = Instant::now();
    let prob = catalogue("circle_linear", None).unwrap();
    let eps = vec![1e-1, 3e-2, 1e-2, 3e-3, 1e-3];
    let mut pass = true;
    let mut parts = Vec::new();
    for q in [1, 2] {
        let out = run_sweep(
            &prob,
            &SweepSpec {
                eps: eps.clone(),
                q,
                repetitions: 1,
                seed: None,
            },
        )
        .unwrap();
        let slope = out.slope.unwrap_or(f64::NAN);
        pass &= out.slope_ok() && out.kplus_ok() && out.errors.iter().all(Option::is_none);
        parts.push(format!(
            "q={q}: slope {slope:.3} (limit {}), kplus bound {}",
            out.bound_exponent + 0.5,
            if out.kplus_ok() { "holds" } else { "VIOLATED" }
        ));
    }
    let secs = started.elapsed().as_secs_f64();
    outcome(pass && secs < 300.0, format!("{}, {secs:.2}s", parts.join("; ")))
}

fn probe(runs: &[Run]) -> Outcome {
    const LIPSCHITZ: f64 = 100.0;
    let mut violations = 0;
    let mut samples = 0;
    for run in runs {
        let report = lower_bound_probe(&run.prob, &run.cert, LIPSCHITZ, 1000, run.cfg.eps_d, run.cfg.q, 7).unwrap();
        violations += report.violations;
        samples += report.samples;
    }
    outcome(
        violations == 0,
        format!(
            "{samples} samples over {} certificates with L = {LIPSCHITZ}, {violations} violations",
            runs.len()
        ),
    )
}

fn determinism() -> Outcome {
    let cases: [&[&str]; 3] = [
        &["solve", "catalogue:circle_linear", "--eps-p", "0.01", "--eps-d", "0.01"],
        &[
            "solve",
            "catalogue:saddle3d",
            "--x0",
            "0.5,0.5,0.5",
            "--q",
            "2",
            "--eps-p",
            "0.01",
            "--eps-d",
            "0.01",
        ],
        &[
            "solve",
            "catalogue:box_quadratic",
            "--q",
            "3",
            "--eps-p",
            "0.01",
            "--eps-d",
            "0.01",
        ],
    ];
    let run = |args: &[&str]| {
        Command::new(env!("CARGO_BIN_EXE_hiord"))
            .args(args)
            .env("HIORD_SEED", "1234")
            .output()
            .expect("binary runs")
            .stdout
    };
    let identical = cases.iter().filter(|args| {
        let first = run(args);
        !first.is_empty() && first == run(args)
    });
    let count = identical.count();
    outcome(
        count == cases.len(),
        format!(
            "{count}/{} report pairs byte-identical under HIORD_SEED=1234",
            cases.len()
        ),
    )
}

fn main() -> ExitCode {
    let mut unexpected = 0;
    let mut line = |id: u32, title: &str, o: &Outcome, tolerated: bool| {
        let status = if o.pass { "PASS" } else { "FAIL" };
        println!("criterion {id} {status}: {title}: {}", o.detail);
        if !o.pass && !tolerated {
            unexpected += 1;
        }
    };
    line(1, "saddle example", &saddle_example(), false);
    let (penalty, only_known) = penalty_example();
    line(2, "fourth-order penalty example", &penalty, only_known);
    line(3, "criticality measure against the grid oracle", &phi_oracle(), false);
    line(4, "derivative assemblies", &derivative_assemblies(), false);
    let (matrix, runs) = solve_matrix();
    line(5, "runtime invariants", &matrix, false);
    line(6, "termination certificates", &certificates(&runs), false);
    line(7, "evaluation complexity", &complexity(), false);
    line(8, "lower-bound probe", &probe(&runs), false);
    line(9, "determinism", &determinism(), false);
    if unexpected == 0 {
        ExitCode::SUCCESS
    } else {
        println!("{unexpected} unexpected failure(s)");
        ExitCode::FAILURE
    }
}
