//! Trust-region minimization with a non-increasing radius over a simple
//! convex set.
//!
//! Each iteration minimizes the degree-`q` Taylor model over the shifted set
//! intersected with the trust region (through [`criticality::phi`]), takes
//! one objective evaluation at the trial point, and accepts the step when
//! the achieved decrease is at least `eta` times the predicted one. Rejected
//! steps shrink the radius; the radius never grows. Derivatives are
//! evaluated once per accepted step.
//!
//! [`criticality::phi`]: crate::criticality::phi

use alloc::boxed::Box;
use alloc::vec::Vec;

use crate::convex::ConvexSet;
use crate::criticality::{criticality_report, is_critical, is_ls_critical, CriticalityReport, PhiOptions, TaylorModel};
use crate::error::{arg_err, Error, Result};
use crate::linalg::{axpy, norm};
use crate::problem::least_squares_model;
use crate::tensor::SymmetricTensor;

/// Predicted decreases below this value make an iteration unsuccessful.
pub const MIN_PREDICTED_DECREASE: f64 = 1e-14;

#[derive(Debug, Clone, PartialEq)]
pub struct InnerConfig {
    /// Degree of the Taylor models, 1 to 3.
    pub q: usize,
    /// Initial trust-region radius in `(0, 1]`.
    pub delta0: f64,
    /// Factor applied to the radius after an unsuccessful iteration.
    pub shrink: f64,
    /// Acceptance threshold on achieved over predicted decrease.
    pub eta: f64,
    /// Settings of the model minimization.
    pub phi: PhiOptions,
    pub max_iter: usize,
}

impl InnerConfig {
    pub fn new(q: usize) -> Self {
        InnerConfig {
            q,
            delta0: 1.0,
            shrink: 0.5,
            eta: 0.1,
            phi: PhiOptions::default(),
            max_iter: 200_000,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(1..=3).contains(&self.q) {
            return arg_err("model degree q must be 1, 2 or 3");
        }
        if !(self.delta0 > 0.0 && self.delta0 <= 1.0) {
            return arg_err("initial radius must lie in (0, 1]");
        }
        if !(self.shrink > 0.0 && self.shrink < 1.0) {
            return arg_err("shrink factor must lie in (0, 1)");
        }
        if !(self.eta > 0.0 && self.eta < 1.0) {
            return arg_err("acceptance threshold must lie in (0, 1)");
        }
        Ok(())
    }
}

/// Objective value at a point; `residual` holds the residual vector for
/// least-squares objectives and is empty otherwise.
#[derive(Debug, Clone, PartialEq)]
pub struct Evaluation {
    pub value: f64,
    pub residual: Vec<f64>,
}

/// A smooth objective with Taylor models.
pub trait Objective {
    fn dim(&self) -> usize;
    /// One objective evaluation.
    fn evaluate(&mut self, x: &[f64]) -> Result<Evaluation>;
    /// One derivative evaluation: value and tensors of orders `1..=degree`.
    fn model(&mut self, x: &[f64], degree: usize) -> Result<TaylorModel>;
}

/// A residual map `r(x)` with derivatives, minimized as `1/2 |r(x)|^2`.
pub trait ResidualOracle {
    fn dim(&self) -> usize;
    fn residual(&mut self, x: &[f64]) -> Result<Vec<f64>>;
    /// Residual and `derivs[i][k - 1]`, the k-th derivative of `r_i`, for
    /// `k = 1..=order`.
    fn residual_jet(&mut self, x: &[f64], order: usize) -> Result<(Vec<f64>, Vec<Vec<SymmetricTensor>>)>;
}

/// `1/2 |r(x)|^2` as an [`Objective`].
#[derive(Debug)]
pub struct LeastSquares<R>(pub R);

impl<R: ResidualOracle> Objective for LeastSquares<R> {
    fn dim(&self) -> usize {
        self.0.dim()
    }

    fn evaluate(&mut self, x: &[f64]) -> Result<Evaluation> {
        let residual = self.0.residual(x)?;
        let value = 0.5 * residual.iter().map(|r| r * r).sum::<f64>();
        Ok(Evaluation { value, residual })
    }

    fn model(&mut self, x: &[f64], degree: usize) -> Result<TaylorModel> {
        let (r, derivs) = self.0.residual_jet(x, degree)?;
        let slices: Vec<&[SymmetricTensor]> = derivs.iter().map(|d| d.as_slice()).collect();
        least_squares_model(self.0.dim(), &r, &slices, degree)
    }
}

/// What the stopping rule sees before each iteration.
#[derive(Debug)]
pub struct StopInput<'a> {
    pub x: &'a [f64],
    pub delta: f64,
    pub eval: &'a Evaluation,
    pub report: &'a CriticalityReport,
}

/// Record of one run.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct InnerTrace {
    /// Starting point followed by every accepted iterate.
    pub iterates: Vec<Vec<f64>>,
    /// Objective values at `iterates`.
    pub values: Vec<f64>,
    /// Radius used by each iteration.
    pub radii: Vec<f64>,
    /// Indices of the successful iterations.
    pub successes: Vec<usize>,
    /// Achieved decrease of each successful iteration.
    pub decreases: Vec<f64>,
    /// Objective evaluations requested after each iteration (cumulative,
    /// including the one at the starting point).
    pub function_evals: Vec<usize>,
    /// Derivative evaluations requested after each iteration (cumulative).
    pub derivative_evals: Vec<usize>,
}

impl InnerTrace {
    pub fn iterations(&self) -> usize {
        self.radii.len()
    }

    pub fn total_function_evals(&self) -> usize {
        self.function_evals.last().copied().unwrap_or(1)
    }

    pub fn total_derivative_evals(&self) -> usize {
        self.derivative_evals.last().copied().unwrap_or(1)
    }
}

/// Result of a run that stopped through its stopping rule.
#[derive(Debug, Clone)]
pub struct InnerOutcome {
    pub x: Vec<f64>,
    /// Radius at termination.
    pub delta: f64,
    pub eval: Evaluation,
    /// Taylor model of degree `q` at `x`.
    pub model: TaylorModel,
    /// Measures at `x` and `delta` that triggered the stop.
    pub report: CriticalityReport,
    pub trace: InnerTrace,
}

/// Runs the trust-region method from `x0` until `stop` holds.
///
/// The stopping rule is checked before every iteration and takes precedence
/// over the iteration limit.
pub fn minimize(
    obj: &mut dyn Objective,
    set: &ConvexSet,
    x0: &[f64],
    stop: &mut dyn FnMut(&StopInput) -> bool,
    cfg: &InnerConfig,
) -> Result<InnerOutcome> {
    cfg.validate()?;
    if x0.len() != obj.dim() || set.dim() != obj.dim() {
        return arg_err("starting point, set and objective dimensions differ");
    }
    if !set.member(x0, 1e-10) {
        return arg_err("starting point is not in the feasible set");
    }
    let q = cfg.q;
    let mut x = x0.to_vec();
    let mut eval = obj.evaluate(&x)?;
    let mut model = obj.model(&x, q)?;
    let mut delta = cfg.delta0;
    let mut fevals = 1;
    let mut devals = 1;
    let mut trace = InnerTrace {
        iterates: alloc::vec![x.clone()],
        values: alloc::vec![eval.value],
        ..InnerTrace::default()
    };
    loop {
        let report = criticality_report(&model, &x, set, delta, q, &cfg.phi)?;
        let done = stop(&StopInput {
            x: &x,
            delta,
            eval: &eval,
            report: &report,
        });
        if done {
            return Ok(InnerOutcome {
                x,
                delta,
                eval,
                model,
                report,
                trace,
            });
        }
        let k = trace.iterations();
        if k >= cfg.max_iter {
            return Err(Error::MaxIterExceeded {
                limit: cfg.max_iter,
                trace: Box::new(trace),
            });
        }
        let predicted = report.phi[q - 1];
        let trial = set.project(&axpy(&x, 1.0, &report.steps[q - 1]));
        let trial_eval = obj.evaluate(&trial)?;
        fevals += 1;
        trace.radii.push(delta);
        let achieved = eval.value - trial_eval.value;
        if predicted >= MIN_PREDICTED_DECREASE && achieved >= cfg.eta * predicted {
            x = trial;
            eval = trial_eval;
            model = obj.model(&x, q)?;
            devals += 1;
            trace.successes.push(k);
            trace.decreases.push(achieved);
            trace.iterates.push(x.clone());
            trace.values.push(eval.value);
        } else {
            delta *= cfg.shrink;
        }
        trace.function_evals.push(fevals);
        trace.derivative_evals.push(devals);
    }
}

/// Minimizes `1/2 |r(x)|^2` until `|r(x)| <= eps_p` or
/// `phi_j <= eps_d delta^j |r(x)|` for `j = 1..=q`.
pub fn minimize_least_squares(
    oracle: &mut dyn ResidualOracle,
    set: &ConvexSet,
    x0: &[f64],
    eps_p: f64,
    eps_d: f64,
    cfg: &InnerConfig,
) -> Result<InnerOutcome> {
    struct Wrap<'a>(&'a mut dyn ResidualOracle);
    impl ResidualOracle for Wrap<'_> {
        fn dim(&self) -> usize {
            self.0.dim()
        }
        fn residual(&mut self, x: &[f64]) -> Result<Vec<f64>> {
            self.0.residual(x)
        }
        fn residual_jet(&mut self, x: &[f64], order: usize) -> Result<(Vec<f64>, Vec<Vec<SymmetricTensor>>)> {
            self.0.residual_jet(x, order)
        }
    }
    let q = cfg.q;
    let mut obj = LeastSquares(Wrap(oracle));
    minimize(
        &mut obj,
        set,
        x0,
        &mut |s: &StopInput| is_ls_critical(s.report, norm(&s.eval.residual), eps_p, eps_d, q),
        cfg,
    )
}

/// Minimizes until the approximate criticality test `phi_j <= eps delta^j`
/// holds for `j = 1..=q`.
pub fn minimize_to_criticality(
    obj: &mut dyn Objective,
    set: &ConvexSet,
    x0: &[f64],
    eps: f64,
    cfg: &InnerConfig,
) -> Result<InnerOutcome> {
    let q = cfg.q;
    minimize(obj, set, x0, &mut |s: &StopInput| is_critical(s.report, eps, q), cfg)
}

/// Measured constant of the unsuccessful-iteration bound.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UnsuccessfulAudit {
    pub iterations: usize,
    pub successes: usize,
    /// `max_k k / |S ∩ {0..k-1}|` over the prefixes that contain a success.
    pub ratio: f64,
    pub pass: bool,
}

/// Checks that the number of iterations stays within a constant multiple
/// of the number of successful ones on every prefix of the run.
pub fn audit_unsuccessful_bound(trace: &InnerTrace) -> UnsuccessfulAudit {
    let total = trace.iterations();
    let mut successes = 0usize;
    let mut ratio: f64 = if total == 0 { 1.0 } else { 0.0 };
    let mut next = trace.successes.iter().peekable();
    for k in 0..total {
        while next.peek().is_some_and(|&&s| s <= k) {
            next.next();
            successes += 1;
        }
        if successes > 0 {
            ratio = ratio.max((k + 1) as f64 / successes as f64);
        }
    }
    if total > 0 && trace.successes.is_empty() {
        ratio = f64::INFINITY;
    }
    UnsuccessfulAudit {
        iterations: total,
        successes: trace.successes.len(),
        ratio,
        pass: ratio.is_finite(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::criticality::{phi, TaylorModel};
    use alloc::vec;

    /// `1/2 |x|^2` with call counters.
    struct Bowl {
        dim: usize,
        evals: usize,
        models: usize,
    }

    impl Objective for Bowl {
        fn dim(&self) -> usize {
            self.dim
        }
        fn evaluate(&mut self, x: &[f64]) -> Result<Evaluation> {
            self.evals += 1;
            Ok(Evaluation {
                value: 0.5 * x.iter().map(|v| v * v).sum::<f64>(),
                residual: Vec::new(),
            })
        }
        fn model(&mut self, x: &[f64], degree: usize) -> Result<TaylorModel> {
            self.models += 1;
            let n = self.dim;
            let mut tensors = vec![SymmetricTensor::from_vector(x)?];
            if degree >= 2 {
                let mut id = vec![0.0; n * n];
                (0..n).for_each(|i| id[i * n + i] = 1.0);
                tensors.push(SymmetricTensor::from_matrix(n, &id)?);
            }
            if degree >= 3 {
                tensors.push(SymmetricTensor::zeros(3, n)?);
            }
            TaylorModel::new(n, 0.5 * x.iter().map(|v| v * v).sum::<f64>(), tensors)
        }
    }

    struct Affine {
        slope: f64,
    }

    impl Objective for Affine {
        fn dim(&self) -> usize {
            1
        }
        fn evaluate(&mut self, x: &[f64]) -> Result<Evaluation> {
            Ok(Evaluation {
                value: self.slope * x[0],
                residual: Vec::new(),
            })
        }
        fn model(&mut self, x: &[f64], degree: usize) -> Result<TaylorModel> {
            let mut tensors = vec![SymmetricTensor::from_vector(&[self.slope])?];
            for k in 2..=degree {
                tensors.push(SymmetricTensor::zeros(k, 1)?);
            }
            TaylorModel::new(1, self.slope * x[0], tensors)
        }
    }

    /// Residual `r(x) = x^2 + shift` in one variable.
    struct Parabola {
        shift: f64,
    }

    impl ResidualOracle for Parabola {
        fn dim(&self) -> usize {
            1
        }
        fn residual(&mut self, x: &[f64]) -> Result<Vec<f64>> {
            Ok(vec![x[0] * x[0] + self.shift])
        }
        fn residual_jet(&mut self, x: &[f64], order: usize) -> Result<(Vec<f64>, Vec<Vec<SymmetricTensor>>)> {
            let d = [2.0 * x[0], 2.0, 0.0, 0.0];
            let t = (1..=order)
                .map(|k| SymmetricTensor::new(k, 1, vec![d[k - 1]]))
                .collect::<Result<_>>()?;
            Ok((vec![x[0] * x[0] + self.shift], vec![t]))
        }
    }

    struct Identity;

    impl ResidualOracle for Identity {
        fn dim(&self) -> usize {
            1
        }
        fn residual(&mut self, x: &[f64]) -> Result<Vec<f64>> {
            Ok(x.to_vec())
        }
        fn residual_jet(&mut self, x: &[f64], order: usize) -> Result<(Vec<f64>, Vec<Vec<SymmetricTensor>>)> {
            let mut t = vec![SymmetricTensor::from_vector(&[1.0])?];
            for k in 2..=order {
                t.push(SymmetricTensor::zeros(k, 1)?);
            }
            Ok((x.to_vec(), vec![t]))
        }
    }

    #[test]
    fn bowl_reaches_approximate_minimizer() {
        let mut bowl = Bowl {
            dim: 2,
            evals: 0,
            models: 0,
        };
        let set = ConvexSet::all(2);
        let cfg = InnerConfig::new(2);
        let out = minimize_to_criticality(&mut bowl, &set, &[1.0, 1.0], 1e-4, &cfg).unwrap();
        assert!(out.report.phi[0] <= 1e-4 * out.delta);
        assert!(norm(&out.x) <= 1e-2);
        // Independent recomputation agrees with the stop decision.
        let again = phi(&out.model.truncated(1), &set.shifted(&out.x), out.delta, &cfg.phi).unwrap();
        assert!(again.phi <= 1e-4 * out.delta);
        // One evaluation per iteration, derivatives per success.
        let t = &out.trace;
        assert_eq!(bowl.evals, t.iterations() + 1);
        assert_eq!(bowl.models, t.successes.len() + 1);
        assert_eq!(t.total_function_evals(), bowl.evals);
        assert!(t.radii.windows(2).all(|w| w[1] <= w[0]));
        assert!(t.values.windows(2).all(|w| w[1] <= w[0]));
        assert!(audit_unsuccessful_bound(t).pass);
    }

    #[test]
    fn linear_on_box_stops_at_vertex() {
        let set = ConvexSet::new_box(vec![0.0], vec![1.0]).unwrap();
        let out =
            minimize_to_criticality(&mut Affine { slope: 1.0 }, &set, &[1.0], 1e-8, &InnerConfig::new(1)).unwrap();
        assert_eq!(out.x, vec![0.0]);
        assert_eq!(out.report.phi[0], 0.0);
    }

    #[test]
    fn least_squares_feasible_and_infeasible() {
        let set = ConvexSet::all(1);
        let out = minimize_least_squares(&mut Identity, &set, &[1.0], 1e-3, 1e-3, &InnerConfig::new(1)).unwrap();
        assert!(out.x[0].abs() <= 1e-3);
        let out = minimize_least_squares(
            &mut Parabola { shift: 1.0 },
            &set,
            &[1.0],
            1e-3,
            1e-3,
            &InnerConfig::new(2),
        )
        .unwrap();
        assert!(out.x[0].abs() < 1e-2);
        assert!((norm(&out.eval.residual) - 1.0).abs() < 1e-3);
    }

    #[test]
    fn start_outside_set_rejected() {
        let set = ConvexSet::new_box(vec![0.0], vec![1.0]).unwrap();
        let r = minimize_to_criticality(&mut Affine { slope: 1.0 }, &set, &[2.0], 1e-8, &InnerConfig::new(1));
        assert!(matches!(r, Err(Error::Argument(_))));
    }

    #[test]
    fn iteration_limit_carries_trace() {
        let mut cfg = InnerConfig::new(1);
        cfg.max_iter = 3;
        let r = minimize_to_criticality(
            &mut Bowl {
                dim: 2,
                evals: 0,
                models: 0,
            },
            &ConvexSet::all(2),
            &[1.0, 1.0],
            1e-12,
            &cfg,
        );
        match r {
            Err(Error::MaxIterExceeded { limit: 3, trace }) => assert_eq!(trace.iterations(), 3),
            other => panic!("unexpected {other:?}"),
        }
        // Stop wins when it already holds.
        cfg.max_iter = 0;
        assert!(minimize_to_criticality(
            &mut Bowl {
                dim: 2,
                evals: 0,
                models: 0
            },
            &ConvexSet::all(2),
            &[0.0, 0.0],
            1e-12,
            &cfg
        )
        .is_ok());
    }

    #[test]
    fn audit_ratios() {
        let mk = |s: Vec<usize>, n: usize| InnerTrace {
            successes: s,
            radii: vec![1.0; n],
            ..InnerTrace::default()
        };
        assert_eq!(audit_unsuccessful_bound(&mk(vec![0, 1, 2, 3], 4)).ratio, 1.0);
        assert_eq!(audit_unsuccessful_bound(&mk(vec![0, 2, 4], 6)).ratio, 2.0);
        let none = audit_unsuccessful_bound(&mk(vec![], 3));
        assert!(!none.pass);
    }

    #[test]
    fn invalid_config() {
        let mut cfg = InnerConfig::new(4);
        assert!(cfg.validate().is_err());
        cfg.q = 1;
        cfg.shrink = 1.0;
        assert!(cfg.validate().is_err());
    }
}
