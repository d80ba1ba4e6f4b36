use std::fs;
use std::io::{self, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use hiord::demo::{self, ConditionsView};
use hiord::problem_file::{load_problem, problem_to_json};
use hiord::report::RunReport;
use hiord::sweep::{run_sweep, SweepSpec, SLOPE_BAND};
use hiord::{parse_vector, seed_from_env, HarnessError, Result};
use hiord_core::conditions::{check_necessary, check_necessary_mu, complete_feasible_directions, CONDITION_TOL};
use hiord_core::criticality::{phi, phi_bruteforce, PhiOptions};
use hiord_core::outer::{solve, CertificateKind, OuterConfig};
use hiord_core::problem::{catalogue, PolynomialProblem, ProblemOracle};

/// High-order trust-region solver for polynomial problems with equality
/// constraints over simple convex sets.
///
/// PROBLEM arguments are JSON files or `catalogue:NAME[:PARAM]`.
#[derive(Debug, Parser)]
#[command(name = "hiord", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Psi {
    Nu,
    Mu,
    Lagrangian,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum DemoName {
    Saddle3,
    Penalty4,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run the two-phase solver; exits 0 at a scaled critical point and 2
    /// at an infeasible critical point.
    Solve {
        problem: String,
        #[arg(long, default_value_t = 1e-3)]
        eps_p: f64,
        #[arg(long, default_value_t = 1e-3)]
        eps_d: f64,
        #[arg(long, default_value_t = 0.5)]
        delta: f64,
        #[arg(long, default_value_t = 1)]
        q: usize,
        /// Starting point, comma separated; defaults to the problem's x0
        /// or the origin.
        #[arg(long, allow_hyphen_values = true)]
        x0: Option<String>,
        #[arg(long, default_value_t = 200_000)]
        max_outer: usize,
        /// Write the JSON report here instead of standard output.
        #[arg(long)]
        report_out: Option<PathBuf>,
    },
    /// Evaluate the criticality measure of a Taylor model at a point.
    Phi {
        problem: String,
        #[arg(long, allow_hyphen_values = true)]
        x: String,
        #[arg(long, value_enum)]
        psi: Psi,
        /// Target, required for `mu`.
        #[arg(long, allow_hyphen_values = true)]
        t: Option<f64>,
        /// Multipliers, required for `lagrangian`.
        #[arg(long, allow_hyphen_values = true)]
        y: Option<String>,
        #[arg(long, default_value_t = 1.0)]
        delta_ball: f64,
        #[arg(long, default_value_t = 1)]
        j: usize,
        /// Cross-check against the grid-search reference.
        #[arg(long)]
        oracle: bool,
        #[arg(long, default_value_t = 17)]
        resolution: usize,
    },
    /// Evaluate the necessary optimality conditions along an arc and
    /// print the result as JSON.
    CheckConditions {
        problem: String,
        #[arg(long, allow_hyphen_values = true)]
        x: String,
        /// Multipliers of the Lagrangian.
        #[arg(long, allow_hyphen_values = true, conflicts_with = "t")]
        y: Option<String>,
        /// Target of the least-squares merit function instead of the
        /// Lagrangian.
        #[arg(long, allow_hyphen_values = true)]
        t: Option<f64>,
        /// Arc coefficients `s1;s2;...`, each comma separated.
        #[arg(long, allow_hyphen_values = true, conflicts_with = "s1")]
        dirs: Option<String>,
        /// First arc coefficient; the rest are completed to keep the
        /// constraints satisfied.
        #[arg(long, allow_hyphen_values = true)]
        s1: Option<String>,
        #[arg(long)]
        q: usize,
        #[arg(long, default_value_t = CONDITION_TOL)]
        tol: f64,
    },
    /// Solve over decreasing tolerances and fit the evaluation-count slope.
    Sweep {
        problem: String,
        /// Tolerances, comma separated and strictly decreasing.
        #[arg(long, default_value = "1e-1,3e-2,1e-2,3e-3,1e-3")]
        eps: String,
        #[arg(long, default_value_t = 1)]
        q: usize,
        #[arg(long, default_value_t = 1)]
        repetitions: usize,
        /// CSV destination; standard output when absent.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Reproduce a worked example.
    Demo {
        #[arg(value_enum)]
        name: DemoName,
    },
    /// Print a built-in problem as JSON.
    Catalogue {
        name: String,
        #[arg(long)]
        param: Option<f64>,
    },
}

fn options() -> Result<PhiOptions> {
    let mut opts = PhiOptions::default();
    if let Some(seed) = seed_from_env()? {
        opts.seed = seed;
    }
    Ok(opts)
}

fn point(prob: &PolynomialProblem, text: &str, name: &str) -> Result<Vec<f64>> {
    let x = parse_vector(text)?;
    if x.len() != prob.dim() {
        return Err(HarnessError::input(format!("--{name} needs {} entries", prob.dim())));
    }
    Ok(x)
}

fn write_output(path: Option<&PathBuf>, text: &str) -> Result<()> {
    match path {
        Some(p) => fs::write(p, text).map_err(|source| HarnessError::Io {
            path: p.clone(),
            source,
        }),
        None => {
            let mut stdout = io::stdout().lock();
            writeln!(stdout, "{text}").map_err(|source| HarnessError::Io {
                path: "<stdout>".into(),
                source,
            })
        }
    }
}

fn run(cli: Cli) -> Result<u8> {
    match cli.command {
        Command::Solve {
            problem,
            eps_p,
            eps_d,
            delta,
            q,
            x0,
            max_outer,
            report_out,
        } => {
            let prob = load_problem(&problem)?;
            let opts = options()?;
            let mut cfg = OuterConfig::new(eps_p, eps_d, q)
                .map_err(|e| HarnessError::input(e.to_string()))?
                .with_seed(opts.seed);
            cfg.delta = delta;
            cfg.max_outer = max_outer;
            cfg.validate().map_err(|e| HarnessError::input(e.to_string()))?;
            let start = match &x0 {
                Some(text) => point(&prob, text, "x0")?,
                None => prob
                    .start()
                    .map(<[f64]>::to_vec)
                    .unwrap_or_else(|| vec![0.0; prob.dim()]),
            };
            let (cert, trace) = solve(&prob, &start, &cfg)?;
            let report = RunReport::new(&problem, &cfg, &cert, &trace);
            write_output(report_out.as_ref(), &report.to_json())?;
            Ok(match cert.kind {
                CertificateKind::ScaledCritical => 0,
                CertificateKind::InfeasibleCritical => 2,
            })
        }
        Command::Phi {
            problem,
            x,
            psi,
            t,
            y,
            delta_ball,
            j,
            oracle,
            resolution,
        } => {
            let prob = load_problem(&problem)?;
            let x = point(&prob, &x, "x")?;
            if !prob.feasible_set().member(&x, 1e-12) {
                return Err(HarnessError::input("--x must lie in the feasible set"));
            }
            if !(1..=4).contains(&j) {
                return Err(HarnessError::input("--j must be between 1 and 4"));
            }
            if !(delta_ball > 0.0 && delta_ball <= 1.0) {
                return Err(HarnessError::input("--delta-ball must lie in (0, 1]"));
            }
            let bundle = prob.bundle(&x, j)?;
            let model = match psi {
                Psi::Nu => bundle.nu_model(j)?,
                Psi::Mu => {
                    let t = t.ok_or_else(|| HarnessError::input("--psi mu needs --t"))?;
                    bundle.mu_model(t, j)?
                }
                Psi::Lagrangian => {
                    let y = y.ok_or_else(|| HarnessError::input("--psi lagrangian needs --y"))?;
                    let y = parse_vector(&y)?;
                    if y.len() != prob.num_constraints() {
                        return Err(HarnessError::input(format!(
                            "--y needs {} entries",
                            prob.num_constraints()
                        )));
                    }
                    bundle.lagrangian_model(&y, j)?
                }
            };
            let shifted = prob.feasible_set().shifted(&x);
            let result = phi(&model, &shifted, delta_ball, &options()?)?;
            println!("phi = {}", result.phi);
            println!("d* = {:?}", result.step);
            if oracle {
                let reference = phi_bruteforce(&model, &shifted, delta_ball, resolution)?;
                let gap = (result.phi - reference).abs();
                let agree = gap <= 1e-6 * result.phi.abs().max(1.0);
                println!("oracle = {reference}");
                println!("oracle gap = {gap:.3e} ({})", if agree { "agree" } else { "DISAGREE" });
                if !agree {
                    return Ok(1);
                }
            }
            Ok(0)
        }
        Command::CheckConditions {
            problem,
            x,
            y,
            t,
            dirs,
            s1,
            q,
            tol,
        } => {
            let prob = load_problem(&problem)?;
            let x = point(&prob, &x, "x")?;
            if !(1..=4).contains(&q) {
                return Err(HarnessError::input("--q must be between 1 and 4"));
            }
            let dirs = match (dirs, s1) {
                (Some(text), None) => {
                    let dirs = text
                        .split(';')
                        .map(|s| point(&prob, s, "dirs"))
                        .collect::<Result<Vec<_>>>()?;
                    if dirs.len() < q {
                        return Err(HarnessError::input(format!("--dirs needs {q} vectors")));
                    }
                    dirs
                }
                (None, Some(text)) => {
                    let s1 = point(&prob, &text, "s1")?;
                    complete_feasible_directions(&prob.bundle(&x, q)?, &s1, q)?
                }
                _ => return Err(HarnessError::input("give exactly one of --dirs and --s1")),
            };
            let report = match (y, t) {
                (Some(y), None) => {
                    let y = parse_vector(&y)?;
                    if y.len() != prob.num_constraints() {
                        return Err(HarnessError::input(format!(
                            "--y needs {} entries",
                            prob.num_constraints()
                        )));
                    }
                    check_necessary(&prob, &x, &y, &dirs, q, tol)?
                }
                (None, Some(t)) => check_necessary_mu(&prob, &x, t, &dirs, q, tol)?,
                _ => return Err(HarnessError::input("give exactly one of --y and --t")),
            };
            let view = ConditionsView::from(&report);
            println!("{}", serde_json::to_string_pretty(&view)?);
            Ok(0)
        }
        Command::Sweep {
            problem,
            eps,
            q,
            repetitions,
            out,
        } => {
            let prob = load_problem(&problem)?;
            let spec = SweepSpec {
                eps: parse_vector(&eps)?,
                q,
                repetitions,
                seed: seed_from_env()?,
            };
            let outcome = run_sweep(&prob, &spec)?;
            match &out {
                Some(path) => {
                    let file = fs::File::create(path).map_err(|source| HarnessError::Io {
                        path: path.clone(),
                        source,
                    })?;
                    outcome.write_csv(file)?;
                }
                None => outcome.write_csv(io::stdout().lock())?,
            }
            for (row, err) in outcome.rows.iter().zip(&outcome.errors) {
                if let Some(err) = err {
                    eprintln!("eps = {}: {err}", row.eps);
                }
            }
            match outcome.slope {
                Some(s) => eprintln!(
                    "slope = {s:.4} (bound exponent {}, allowed {}): {}",
                    outcome.bound_exponent,
                    outcome.bound_exponent + SLOPE_BAND,
                    if outcome.slope_ok() { "ok" } else { "EXCEEDED" }
                ),
                None => eprintln!("slope = n/a (fewer than two successful rows)"),
            }
            eprintln!("kplus bound: {}", if outcome.kplus_ok() { "holds" } else { "VIOLATED" });
            Ok(if outcome.errors.iter().any(Option::is_some) {
                1
            } else {
                0
            })
        }
        Command::Demo { name } => {
            let out = match name {
                DemoName::Saddle3 => demo::saddle3()?,
                DemoName::Penalty4 => demo::penalty4()?,
            };
            print!("{}", out.text);
            Ok(if out.pass { 0 } else { 1 })
        }
        Command::Catalogue { name, param } => {
            let prob = catalogue(&name, param).map_err(|e| HarnessError::input(e.to_string()))?;
            println!("{}", problem_to_json(&prob));
            Ok(0)
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 64 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
