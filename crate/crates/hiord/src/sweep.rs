//! Tolerance sweeps: evaluation counts against `1/eps` and the fitted
//! log-log slope.

use std::io::Write;
use std::time::Instant;

use hiord_core::outer::{bound_audit, solve, OuterConfig};
use hiord_core::problem::{PolynomialProblem, ProblemOracle};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{HarnessError, Result};

/// Allowed excess of the fitted slope over the worst-case exponent.
pub const SLOPE_BAND: f64 = 0.5;

#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    /// Tolerances used for both `eps_p` and `eps_d`, strictly decreasing.
    pub eps: Vec<f64>,
    pub q: usize,
    /// Solves per tolerance; all must report the same counts.
    pub repetitions: usize,
    pub seed: Option<u64>,
}

impl SweepSpec {
    pub fn validate(&self) -> Result<()> {
        if self.eps.len() < 3 {
            return Err(HarnessError::input("a sweep needs at least three tolerances"));
        }
        if self.eps.iter().any(|e| !(*e > 0.0 && *e < 1.0)) {
            return Err(HarnessError::input("tolerances must lie in (0, 1)"));
        }
        if self.eps.windows(2).any(|w| w[1] >= w[0]) {
            return Err(HarnessError::input("tolerances must be strictly decreasing"));
        }
        if self.repetitions == 0 {
            return Err(HarnessError::input("repetitions must be at least 1"));
        }
        if !(1..=3).contains(&self.q) {
            return Err(HarnessError::input("q must be 1, 2 or 3"));
        }
        Ok(())
    }

    /// Worst-case exponent of the evaluation bound, `2q + 1`.
    pub fn bound_exponent(&self) -> f64 {
        (2 * self.q + 1) as f64
    }
}

/// One CSV line.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub eps: f64,
    pub q: usize,
    pub ph1_f: usize,
    pub ph1_df: usize,
    pub ph2_f: usize,
    pub ph2_df: usize,
    pub kplus: usize,
    pub kminus: usize,
    /// Termination kind, `error` or `nondeterministic`.
    pub term: String,
    pub wall_ms: f64,
}

impl SweepRow {
    pub fn total_evals(&self) -> usize {
        self.ph1_f + self.ph1_df + self.ph2_f + self.ph2_df
    }

    pub fn succeeded(&self) -> bool {
        self.term == "scaled_critical" || self.term == "infeasible_critical"
    }
}

/// Per-row check of the bound on the number of target updates.
#[derive(Debug, Clone, PartialEq)]
pub struct KplusCheck {
    pub bound: f64,
    pub holds: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepOutcome {
    pub rows: Vec<SweepRow>,
    /// `None` when the problem has no lower bound or the row failed.
    pub kplus: Vec<Option<KplusCheck>>,
    /// Messages of failed rows, by row.
    pub errors: Vec<Option<String>>,
    /// Least-squares slope of `ln(total evals)` against `ln(1/eps)`.
    pub slope: Option<f64>,
    pub bound_exponent: f64,
}

impl SweepOutcome {
    pub fn slope_ok(&self) -> bool {
        self.slope.is_some_and(|s| s <= self.bound_exponent + SLOPE_BAND)
    }

    pub fn kplus_ok(&self) -> bool {
        self.kplus.iter().flatten().all(|k| k.holds)
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut writer = csv::Writer::from_writer(out);
        for row in &self.rows {
            writer.serialize(row)?;
        }
        writer.flush().map_err(|source| HarnessError::Io {
            path: "<csv>".into(),
            source,
        })?;
        Ok(())
    }
}

/// Ordinary least-squares slope of `ys` against `xs`.
pub fn ols_slope(xs: &[f64], ys: &[f64]) -> Option<f64> {
    let n = xs.len();
    if n < 2 || n != ys.len() {
        return None;
    }
    let mx = xs.iter().sum::<f64>() / n as f64;
    let my = ys.iter().sum::<f64>() / n as f64;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    (sxx > 0.0).then(|| sxy / sxx)
}

fn config(spec: &SweepSpec, eps: f64) -> Result<OuterConfig> {
    let cfg = OuterConfig::new(eps, eps, spec.q)?;
    Ok(match spec.seed {
        Some(seed) => cfg.with_seed(seed),
        None => cfg,
    })
}

fn run_row(
    prob: &PolynomialProblem,
    x0: &[f64],
    spec: &SweepSpec,
    eps: f64,
) -> (SweepRow, Option<KplusCheck>, Option<String>) {
    let mut row = SweepRow {
        eps,
        q: spec.q,
        ph1_f: 0,
        ph1_df: 0,
        ph2_f: 0,
        ph2_df: 0,
        kplus: 0,
        kminus: 0,
        term: String::from("error"),
        wall_ms: f64::INFINITY,
    };
    let cfg = match config(spec, eps) {
        Ok(cfg) => cfg,
        Err(e) => return (row, None, Some(e.to_string())),
    };
    let mut first: Option<SweepRow> = None;
    let mut kplus = None;
    for _ in 0..spec.repetitions {
        let started = Instant::now();
        let outcome = solve(prob, x0, &cfg);
        let wall_ms = (started.elapsed().as_secs_f64() * 1e6).round() / 1e3;
        let (cert, trace) = match outcome {
            Ok(done) => done,
            Err(e) => return (row, None, Some(e.to_string())),
        };
        let c = &trace.counters;
        let current = SweepRow {
            ph1_f: c.phase1_f,
            ph1_df: c.phase1_df,
            ph2_f: c.phase2_f,
            ph2_df: c.phase2_df,
            kplus: trace.kplus(),
            kminus: trace.kminus(),
            term: cert.kind.as_str().to_string(),
            wall_ms,
            ..row.clone()
        };
        match &first {
            None => {
                kplus = bound_audit(&trace, prob, &cfg, (spec.q + 1) as f64)
                    .ok()
                    .map(|b| KplusCheck {
                        bound: b.kplus_bound,
                        holds: b.kplus_ok,
                    });
                first = Some(current);
            }
            Some(f) => {
                let same = SweepRow {
                    wall_ms: f.wall_ms,
                    ..current.clone()
                } == *f;
                if !same {
                    row = SweepRow {
                        term: String::from("nondeterministic"),
                        ..f.clone()
                    };
                    return (row, kplus, Some(String::from("repeated solves gave different counts")));
                }
                first = Some(SweepRow {
                    wall_ms: f.wall_ms.min(current.wall_ms),
                    ..f.clone()
                });
            }
        }
    }
    (first.expect("at least one repetition"), kplus, None)
}

/// Runs one solve per tolerance, concurrently, keeping the rows in the
/// order of `spec.eps`. Failed solves are recorded and the sweep goes on.
pub fn run_sweep(prob: &PolynomialProblem, spec: &SweepSpec) -> Result<SweepOutcome> {
    spec.validate()?;
    let x0 = prob
        .start()
        .map(<[f64]>::to_vec)
        .unwrap_or_else(|| vec![0.0; prob.dim()]);
    let results: Vec<_> = spec.eps.par_iter().map(|&eps| run_row(prob, &x0, spec, eps)).collect();
    let mut rows = Vec::with_capacity(results.len());
    let mut kplus = Vec::with_capacity(results.len());
    let mut errors = Vec::with_capacity(results.len());
    for (row, k, e) in results {
        rows.push(row);
        kplus.push(k);
        errors.push(e);
    }
    let (xs, ys): (Vec<f64>, Vec<f64>) = rows
        .iter()
        .filter(|r| r.succeeded())
        .map(|r| ((1.0 / r.eps).ln(), (r.total_evals() as f64).ln()))
        .unzip();
    let slope = ols_slope(&xs, &ys);
    Ok(SweepOutcome {
        rows,
        kplus,
        errors,
        slope,
        bound_exponent: spec.bound_exponent(),
    })
}
