//! The two-phase outer method for equality-constrained problems.
//!
//! Phase 1 minimizes `nu(x) = 1/2 |c(x)|^2` over `F` until the constraint
//! violation is small or `x` is an approximate critical point of `nu`.
//! Phase 2 follows a decreasing target `t_k` by minimizing
//! `mu(x, t) = 1/2 |c(x)|^2 + 1/2 (f(x) - t)^2`, lowering the target after
//! every inner solve, until a scaled critical point is found.
//!
//! Every run asserts the target-sequence invariants and re-verifies the
//! final certificate from freshly evaluated derivatives.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;

use crate::convex::{ConvexSet, StepRegion};
use crate::criticality::{criticality_report, is_critical, phi, phi_hat, CriticalityReport, PhiOptions};
use crate::error::{arg_err, Error, Result};
use crate::inner::{minimize, InnerConfig, InnerTrace, LeastSquares, ResidualOracle, StopInput};
use crate::linalg::{axpy, norm};
use crate::problem::{DerivativeBundle, ProblemOracle};
use crate::seeds::Stream;
use crate::tensor::SymmetricTensor;

/// Slack of the runtime invariants, relative to `max(1, |f|, |t|)`.
pub const INVARIANT_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct OuterConfig {
    /// Primal (feasibility) tolerance in `(0, 1)`.
    pub eps_p: f64,
    /// Dual (criticality) tolerance in `(0, 1)`.
    pub eps_d: f64,
    /// Fraction of `eps_p` targeted by Phase 1, in `(0, 1)`.
    pub delta: f64,
    /// Criticality order, 1 to 3.
    pub q: usize,
    pub phase1: InnerConfig,
    pub phase2: InnerConfig,
    /// Limit on the number of Phase 2 iterations.
    pub max_outer: usize,
}

impl OuterConfig {
    pub fn new(eps_p: f64, eps_d: f64, q: usize) -> Result<Self> {
        let cfg = OuterConfig {
            eps_p,
            eps_d,
            delta: 0.5,
            q,
            phase1: InnerConfig::new(q),
            phase2: InnerConfig::new(q),
            max_outer: 200_000,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    /// Uses `seed` for the model minimizations of both phases.
    pub fn with_seed(mut self, seed: u64) -> Self {
        self.phase1.phi.seed = seed;
        self.phase2.phi.seed = seed;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let unit = |v: f64| v > 0.0 && v < 1.0;
        if !unit(self.eps_p) || !unit(self.eps_d) || !unit(self.delta) {
            return arg_err("eps_p, eps_d and delta must lie in (0, 1)");
        }
        if !(1..=3).contains(&self.q) {
            return arg_err("criticality order q must be 1, 2 or 3");
        }
        if self.phase1.q != self.q || self.phase2.q != self.q {
            return arg_err("inner model degrees must equal q");
        }
        self.phase1.validate()?;
        self.phase2.validate()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CertificateKind {
    /// `x` is an approximate critical point of `nu` with `|c(x)| > delta eps_p`.
    InfeasibleCritical,
    /// `|c(x)| <= eps_p` and `x` is an approximate critical point of `mu(., t)`.
    ScaledCritical,
}

impl CertificateKind {
    pub fn as_str(self) -> &'static str {
        match self {
            CertificateKind::InfeasibleCritical => "infeasible_critical",
            CertificateKind::ScaledCritical => "scaled_critical",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TerminationCertificate {
    pub kind: CertificateKind,
    pub x: Vec<f64>,
    /// Final target (Phase 2 only).
    pub t: Option<f64>,
    /// Multiplier estimate, present when `f(x) > t`.
    pub y: Option<Vec<f64>>,
    /// Trust-region radius at termination.
    pub delta: f64,
    /// `phi[j - 1]`: measure of order `j` of `nu` or `mu(., t)` at `x`.
    pub phi: Vec<f64>,
    pub objective: f64,
    pub constraint_norm: f64,
    /// `|c(x)|` or `|r(x, t)|`, the residual the measures are scaled by.
    pub residual_norm: f64,
}

/// Which target update an outer iteration applied.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Phase2Case {
    /// Residual below `delta eps_p`: target moved down to restore `|r| = eps_p`.
    Update,
    /// Objective below the target: target reflected through `f`.
    Swap,
    /// Neither: the inner stop was criticality at the current target.
    Stationary,
}

/// Membership of a non-terminal outer iteration in `K+` or `K-`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Partition {
    Plus,
    Minus,
}

impl Partition {
    pub fn symbol(self) -> &'static str {
        match self {
            Partition::Plus => "+",
            Partition::Minus => "-",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OuterIteration {
    /// Target `t_k` used by the inner solve.
    pub t: f64,
    /// Updated target, absent in the stationary case.
    pub t_next: Option<f64>,
    pub case: Phase2Case,
    /// `None` for the terminating iteration.
    pub tag: Option<Partition>,
    pub terminated: bool,
    /// `|r(x_{k+1}, t_k)|`
    pub residual_before: f64,
    /// `|r(x_{k+1}, t_{k+1})|`
    pub residual_after: f64,
    /// Radius at the end of the inner solve.
    pub delta: f64,
    pub x: Vec<f64>,
    pub inner: InnerTrace,
}

/// Evaluations of the problem functions actually performed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct EvalCounters {
    pub phase1_f: usize,
    pub phase1_df: usize,
    pub phase2_f: usize,
    pub phase2_df: usize,
    /// Derivative evaluations spent re-verifying the certificate.
    pub verification_df: usize,
}

impl EvalCounters {
    pub fn total(&self) -> usize {
        self.phase1_f + self.phase1_df + self.phase2_f + self.phase2_df
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct OuterTrace {
    /// `x_0`, the projection of the user's starting point.
    pub x0: Vec<f64>,
    pub phase1: InnerTrace,
    /// First Phase 2 point, absent if Phase 1 terminated.
    pub x1: Option<Vec<f64>>,
    pub f_x1: Option<f64>,
    /// `t_1, t_2, ...` including the final target.
    pub t_history: Vec<f64>,
    pub iterations: Vec<OuterIteration>,
    pub counters: EvalCounters,
    pub termination: Option<CertificateKind>,
    /// Number of times each runtime invariant was checked.
    pub invariant_checks: BTreeMap<&'static str, usize>,
}

impl OuterTrace {
    /// Tags of the non-terminal outer iterations.
    pub fn partition(&self) -> Vec<Partition> {
        self.iterations.iter().filter_map(|it| it.tag).collect()
    }

    pub fn kplus(&self) -> usize {
        self.partition().iter().filter(|p| **p == Partition::Plus).count()
    }

    pub fn kminus(&self) -> usize {
        self.partition().iter().filter(|p| **p == Partition::Minus).count()
    }

    fn check(&mut self, name: &'static str, ok: bool, detail: impl FnOnce() -> String) -> Result<()> {
        *self.invariant_checks.entry(name).or_insert(0) += 1;
        if ok {
            Ok(())
        } else {
            Err(Error::InvariantViolation(format!("{name}: {}", detail())))
        }
    }
}

/// Last trial values and last derivative bundle, so that restarts and
/// target changes reuse what was already evaluated.
#[derive(Debug, Default)]
struct PointCache {
    values: Option<(Vec<f64>, f64, Vec<f64>)>,
    bundle: Option<DerivativeBundle>,
}

#[derive(Debug, Default, Clone, Copy)]
struct Counts {
    f: usize,
    df: usize,
}

/// The residual `c(x)` (no target) or `r(x, t)` over a problem oracle.
struct Merit<'a, P: ProblemOracle + ?Sized> {
    prob: &'a P,
    target: Option<f64>,
    order: usize,
    cache: &'a mut PointCache,
    counts: &'a mut Counts,
}

impl<P: ProblemOracle + ?Sized> Merit<'_, P> {
    fn assemble(&self, f: f64, c: &[f64]) -> Vec<f64> {
        let mut r = c.to_vec();
        if let Some(t) = self.target {
            r.push(f - t);
        }
        r
    }

    fn bundle_at(&mut self, x: &[f64], order: usize) -> Result<&DerivativeBundle> {
        let hit = self
            .cache
            .bundle
            .as_ref()
            .is_some_and(|b| b.x.as_slice() == x && b.order() >= order);
        if !hit {
            let b = self.prob.bundle(x, order.max(self.order))?;
            self.counts.df += 1;
            self.cache.bundle = Some(b);
        }
        Ok(self.cache.bundle.as_ref().expect("bundle cached above"))
    }
}

impl<P: ProblemOracle + ?Sized> ResidualOracle for Merit<'_, P> {
    fn dim(&self) -> usize {
        self.prob.dim()
    }

    fn residual(&mut self, x: &[f64]) -> Result<Vec<f64>> {
        if let Some(b) = self.cache.bundle.as_ref().filter(|b| b.x.as_slice() == x) {
            return Ok(self.assemble(b.f, &b.c));
        }
        if let Some((_, f, c)) = self.cache.values.as_ref().filter(|v| v.0.as_slice() == x) {
            return Ok(self.assemble(*f, c));
        }
        let (f, c) = self.prob.values(x);
        self.counts.f += 1;
        let r = self.assemble(f, &c);
        self.cache.values = Some((x.to_vec(), f, c));
        Ok(r)
    }

    fn residual_jet(&mut self, x: &[f64], order: usize) -> Result<(Vec<f64>, Vec<Vec<SymmetricTensor>>)> {
        let target = self.target;
        let b = self.bundle_at(x, order)?;
        let mut derivs: Vec<Vec<SymmetricTensor>> = b.dc.iter().map(|d| d[..order].to_vec()).collect();
        let mut r = b.c.clone();
        if let Some(t) = target {
            derivs.push(b.df[..order].to_vec());
            r.push(b.f - t);
        }
        Ok((r, derivs))
    }
}

/// What Phase 1 produced.
#[derive(Debug, Clone, PartialEq)]
pub struct Phase1Result {
    /// `x_0 = P_F(x_start)`.
    pub x0: Vec<f64>,
    /// Final point: `x_1`, or the infeasible critical point.
    pub x: Vec<f64>,
    pub delta: f64,
    pub constraint_norm: f64,
    pub trace: InnerTrace,
    pub f_evals: usize,
    pub df_evals: usize,
    /// Present when Phase 1 ended at an infeasible critical point.
    pub certificate: Option<TerminationCertificate>,
}

fn check_problem<P: ProblemOracle + ?Sized>(prob: &P, x: &[f64]) -> Result<()> {
    if x.len() != prob.dim() {
        return arg_err(format!(
            "starting point has length {} but the problem has {} variables",
            x.len(),
            prob.dim()
        ));
    }
    if x.iter().any(|v| !v.is_finite()) {
        return arg_err("starting point must be finite");
    }
    Ok(())
}

fn phase1_cached<P: ProblemOracle + ?Sized>(
    prob: &P,
    x_start: &[f64],
    cfg: &OuterConfig,
    cache: &mut PointCache,
    counts: &mut Counts,
) -> Result<Phase1Result> {
    check_problem(prob, x_start)?;
    let set = prob.feasible_set();
    let x0 = set.project(x_start);
    let (q, eps_d, threshold) = (cfg.q, cfg.eps_d, cfg.delta * cfg.eps_p);
    let merit = Merit {
        prob,
        target: None,
        order: q,
        cache,
        counts: &mut *counts,
    };
    let mut obj = LeastSquares(merit);
    let mut stop = |s: &StopInput| {
        let c = norm(&s.eval.residual);
        c < threshold || is_critical(s.report, eps_d * c, q)
    };
    let out = minimize(&mut obj, set, &x0, &mut stop, &cfg.phase1)?;
    let c_norm = norm(&out.eval.residual);
    let certificate = if c_norm > threshold {
        let bundle = obj.0.bundle_at(&out.x, q)?;
        Some(TerminationCertificate {
            kind: CertificateKind::InfeasibleCritical,
            x: out.x.clone(),
            t: None,
            y: None,
            delta: out.delta,
            phi: out.report.phi.clone(),
            objective: bundle.f,
            constraint_norm: c_norm,
            residual_norm: c_norm,
        })
    } else {
        None
    };
    Ok(Phase1Result {
        x0,
        x: out.x,
        delta: out.delta,
        constraint_norm: c_norm,
        trace: out.trace,
        f_evals: counts.f,
        df_evals: counts.df,
        certificate,
    })
}

/// Phase 1 from `P_F(x_start)`.
pub fn phase1<P: ProblemOracle + ?Sized>(prob: &P, x_start: &[f64], cfg: &OuterConfig) -> Result<Phase1Result> {
    cfg.validate()?;
    phase1_cached(prob, x_start, cfg, &mut PointCache::default(), &mut Counts::default())
}

/// `t_1 = f(x_1) - sqrt(eps_p^2 - |c(x_1)|^2)`.
pub fn initial_target(f: f64, constraint_norm: f64, eps_p: f64) -> Result<f64> {
    target_update(f, constraint_norm, eps_p)
}

fn target_update(f: f64, constraint_norm: f64, eps_p: f64) -> Result<f64> {
    let radicand = eps_p * eps_p - constraint_norm * constraint_norm;
    if radicand < -1e-14 {
        return Err(Error::InvariantViolation(format!(
            "constraint norm {constraint_norm} exceeds eps_p {eps_p} in a target update"
        )));
    }
    Ok(f - radicand.max(0.0).sqrt())
}

/// Outcome of one Phase 2 iteration.
#[derive(Debug, Clone, PartialEq)]
pub struct Phase2Step {
    pub x: Vec<f64>,
    pub case: Phase2Case,
    /// `t_{k+1}`; equal to `t_k` in the stationary case.
    pub t: f64,
    pub delta: f64,
    pub residual_before: f64,
    pub residual_after: f64,
    /// Objective and constraint norm at `x`.
    pub objective: f64,
    pub constraint_norm: f64,
    pub inner: InnerTrace,
    pub f_evals: usize,
    pub df_evals: usize,
    pub certificate: Option<TerminationCertificate>,
}

fn mu_report(
    bundle: &DerivativeBundle,
    set: &ConvexSet,
    t: f64,
    delta: f64,
    q: usize,
    opts: &PhiOptions,
) -> Result<CriticalityReport> {
    criticality_report(&bundle.mu_model(t, q)?, &bundle.x, set, delta, q, opts)
}

fn scaled_certificate(bundle: &DerivativeBundle, t: f64, delta: f64, phi: Vec<f64>) -> TerminationCertificate {
    let residual_norm = norm(&bundle.residual(t));
    let gap = bundle.f - t;
    TerminationCertificate {
        kind: CertificateKind::ScaledCritical,
        x: bundle.x.clone(),
        t: Some(t),
        y: (gap > 0.0).then(|| bundle.c.iter().map(|ci| ci / gap).collect()),
        delta,
        phi,
        objective: bundle.f,
        constraint_norm: norm(&bundle.c),
        residual_norm,
    }
}

fn phase2_step_cached<P: ProblemOracle + ?Sized>(
    prob: &P,
    x_k: &[f64],
    t_k: f64,
    delta_prev: f64,
    cfg: &OuterConfig,
    cache: &mut PointCache,
    counts: &mut Counts,
) -> Result<Phase2Step> {
    let set = prob.feasible_set();
    let (q, eps_d, eps_p, threshold) = (cfg.q, cfg.eps_d, cfg.eps_p, cfg.delta * cfg.eps_p);
    let before = *counts;
    let mut inner_cfg = cfg.phase2.clone();
    inner_cfg.delta0 = delta_prev.min(1.0);
    let merit = Merit {
        prob,
        target: Some(t_k),
        order: q,
        cache,
        counts: &mut *counts,
    };
    let mut obj = LeastSquares(merit);
    let mut stop = |s: &StopInput| {
        let r = norm(&s.eval.residual);
        let gap = *s.eval.residual.last().expect("residual includes the target component");
        r < threshold || gap < 0.0 || is_critical(s.report, eps_d * r, q)
    };
    let out = minimize(&mut obj, set, x_k, &mut stop, &inner_cfg)?;
    let bundle = obj.0.bundle_at(&out.x, q)?.clone();
    let residual_before = norm(&out.eval.residual);
    let f = bundle.f;
    let c_norm = norm(&bundle.c);
    let delta = out.delta;

    let (case, t_next) = if residual_before < threshold {
        (Phase2Case::Update, target_update(f, c_norm, eps_p)?)
    } else if f < t_k {
        (Phase2Case::Swap, 2.0 * f - t_k)
    } else {
        (Phase2Case::Stationary, t_k)
    };
    let certificate = match case {
        Phase2Case::Stationary => Some(scaled_certificate(&bundle, t_k, delta, out.report.phi.clone())),
        _ => {
            let report = mu_report(&bundle, set, t_next, delta, q, &cfg.phase2.phi)?;
            let r = norm(&bundle.residual(t_next));
            is_critical(&report, eps_d * r, q).then(|| scaled_certificate(&bundle, t_next, delta, report.phi))
        }
    };
    Ok(Phase2Step {
        x: out.x,
        case,
        t: t_next,
        delta,
        residual_before,
        residual_after: norm(&bundle.residual(t_next)),
        objective: f,
        constraint_norm: c_norm,
        inner: out.trace,
        f_evals: counts.f - before.f,
        df_evals: counts.df - before.df,
        certificate,
    })
}

/// One Phase 2 iteration from `(x_k, t_k)` with starting radius
/// `min(delta_prev, 1)`.
pub fn phase2_step<P: ProblemOracle + ?Sized>(
    prob: &P,
    x_k: &[f64],
    t_k: f64,
    delta_prev: f64,
    cfg: &OuterConfig,
) -> Result<Phase2Step> {
    cfg.validate()?;
    check_problem(prob, x_k)?;
    if !(delta_prev > 0.0) {
        return arg_err("previous radius must be positive");
    }
    phase2_step_cached(
        prob,
        x_k,
        t_k,
        delta_prev,
        cfg,
        &mut PointCache::default(),
        &mut Counts::default(),
    )
}

/// Runs Phase 1 and then Phase 2 iterations until a certificate is issued.
pub fn solve<P: ProblemOracle + ?Sized>(
    prob: &P,
    x_start: &[f64],
    cfg: &OuterConfig,
) -> Result<(TerminationCertificate, OuterTrace)> {
    cfg.validate()?;
    let mut cache = PointCache::default();
    let mut counts = Counts::default();
    let p1 = phase1_cached(prob, x_start, cfg, &mut cache, &mut counts)?;
    let mut trace = OuterTrace {
        x0: p1.x0.clone(),
        phase1: p1.trace.clone(),
        ..OuterTrace::default()
    };
    trace.counters.phase1_f = counts.f;
    trace.counters.phase1_df = counts.df;

    if let Some(cert) = p1.certificate {
        finish(prob, cfg, &cert, &mut trace)?;
        return Ok((cert, trace));
    }

    let eps_p = cfg.eps_p;
    let phase1_counts = counts;
    let (f1, _) = cached_values(&cache, &p1.x).expect("phase 1 leaves its final point cached");
    let mut x = p1.x.clone();
    let mut t = initial_target(f1, p1.constraint_norm, eps_p)?;
    let mut f_x = f1;
    let mut c_x = p1.constraint_norm;
    let mut delta = p1.delta;
    trace.x1 = Some(x.clone());
    trace.f_x1 = Some(f1);
    trace.t_history.push(t);

    loop {
        let k = trace.iterations.len();
        if k >= cfg.max_outer {
            return Err(Error::OuterLimit { limit: cfg.max_outer });
        }
        let tol = INVARIANT_TOL * f_x.abs().max(t.abs()).max(1.0);
        trace.check("target_below_objective", f_x - t >= -tol, || {
            format!("iteration {k}: f(x_k) - t_k = {}", f_x - t)
        })?;
        trace.check(
            "approximate_feasibility",
            c_x <= eps_p + tol && f_x - t <= eps_p + tol,
            || {
                format!(
                    "iteration {k}: |c(x_k)| = {c_x}, f(x_k) - t_k = {}, eps_p = {eps_p}",
                    f_x - t
                )
            },
        )?;

        let step = phase2_step_cached(prob, &x, t, delta, cfg, &mut cache, &mut counts)?;
        trace.counters.phase2_f = counts.f - phase1_counts.f;
        trace.counters.phase2_df = counts.df - phase1_counts.df;

        let terminated = step.certificate.is_some();
        let tag = match (terminated, step.case) {
            (false, Phase2Case::Update) => Some(Partition::Plus),
            (false, Phase2Case::Swap) => Some(Partition::Minus),
            _ => None,
        };
        if step.case != Phase2Case::Stationary {
            trace.check("target_decreasing", step.t < t, || {
                format!("iteration {k}: t_k = {t}, t_(k+1) = {}", step.t)
            })?;
            trace.t_history.push(step.t);
        }
        match step.case {
            Phase2Case::Update => {
                trace.check("kplus_residual", (step.residual_after - eps_p).abs() <= tol, || {
                    format!("iteration {k}: |r(x_(k+1), t_(k+1))| = {}", step.residual_after)
                })?;
                trace.check("kplus_decrease", t - step.t >= (1.0 - cfg.delta) * eps_p - tol, || {
                    format!("iteration {k}: t_k - t_(k+1) = {}", t - step.t)
                })?;
            }
            Phase2Case::Swap => {
                trace.check(
                    "kminus_residual",
                    (step.residual_after - step.residual_before).abs() <= tol && step.residual_after <= eps_p + tol,
                    || {
                        format!(
                            "iteration {k}: residual {} before and {} after the swap",
                            step.residual_before, step.residual_after
                        )
                    },
                )?;
            }
            Phase2Case::Stationary => {}
        }

        trace.iterations.push(OuterIteration {
            t,
            t_next: (step.case != Phase2Case::Stationary).then_some(step.t),
            case: step.case,
            tag,
            terminated,
            residual_before: step.residual_before,
            residual_after: step.residual_after,
            delta: step.delta,
            x: step.x.clone(),
            inner: step.inner,
        });

        if let Some(cert) = step.certificate {
            let t_eps = cert.t.expect("phase 2 certificates carry a target");
            let tol = INVARIANT_TOL * cert.objective.abs().max(t_eps.abs()).max(1.0);
            trace.check(
                "termination_conditions",
                cert.residual_norm >= cfg.delta * eps_p - tol && cert.objective >= t_eps,
                || {
                    format!(
                        "|r(x, t)| = {}, f(x) = {}, t = {t_eps}",
                        cert.residual_norm, cert.objective
                    )
                },
            )?;
            finish(prob, cfg, &cert, &mut trace)?;
            return Ok((cert, trace));
        }
        x = step.x;
        t = step.t;
        f_x = step.objective;
        c_x = step.constraint_norm;
        delta = step.delta;
    }
}

fn cached_values(cache: &PointCache, x: &[f64]) -> Option<(f64, Vec<f64>)> {
    if let Some(b) = cache.bundle.as_ref().filter(|b| b.x.as_slice() == x) {
        return Some((b.f, b.c.clone()));
    }
    cache
        .values
        .as_ref()
        .filter(|v| v.0.as_slice() == x)
        .map(|v| (v.1, v.2.clone()))
}

fn finish<P: ProblemOracle + ?Sized>(
    prob: &P,
    cfg: &OuterConfig,
    cert: &TerminationCertificate,
    trace: &mut OuterTrace,
) -> Result<()> {
    let ok = verify_certificate(prob, cert, cfg)?;
    trace.counters.verification_df += 1;
    trace.check("certificate_reverified", ok, || {
        format!("{} certificate at {:?} not reproduced", cert.kind.as_str(), cert.x)
    })?;
    trace.termination = Some(cert.kind);
    Ok(())
}

/// Re-evaluates the derivatives at the certificate point, recomputes every
/// measure and checks the conditions the certificate claims. Costs one
/// derivative evaluation.
pub fn verify_certificate<P: ProblemOracle + ?Sized>(
    prob: &P,
    cert: &TerminationCertificate,
    cfg: &OuterConfig,
) -> Result<bool> {
    let q = cfg.q;
    let set = prob.feasible_set();
    let bundle = prob.bundle(&cert.x, q)?;
    let c_norm = norm(&bundle.c);
    match cert.kind {
        CertificateKind::InfeasibleCritical => {
            let opts = &cfg.phase1.phi;
            let report = criticality_report(&bundle.nu_model(q)?, &cert.x, set, cert.delta, q, opts)?;
            Ok(c_norm > cfg.delta * cfg.eps_p && is_critical(&report, cfg.eps_d * c_norm, q))
        }
        CertificateKind::ScaledCritical => {
            let Some(t) = cert.t else { return Ok(false) };
            let report = mu_report(&bundle, set, t, cert.delta, q, &cfg.phase2.phi)?;
            let r = norm(&bundle.residual(t));
            Ok(c_norm <= cfg.eps_p + INVARIANT_TOL && is_critical(&report, cfg.eps_d * r, q))
        }
    }
}

/// `y = c(x) / (f(x) - t)`.
pub fn recover_multiplier<P: ProblemOracle + ?Sized>(prob: &P, x: &[f64], t: f64) -> Result<Vec<f64>> {
    check_problem(prob, x)?;
    let (f, c) = prob.values(x);
    multiplier_from_values(f, &c, t)
}

pub fn multiplier_from_values(f: f64, c: &[f64], t: f64) -> Result<Vec<f64>> {
    let gap = f - t;
    if !(gap > 0.0) {
        return Err(Error::NotApplicable(format!(
            "multiplier requires f(x) > t, got f(x) - t = {gap}"
        )));
    }
    Ok(c.iter().map(|ci| ci / gap).collect())
}

/// One measured quantity against its bound.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundCheck {
    pub order: usize,
    pub value: f64,
    pub bound: f64,
    pub pass: bool,
}

/// Optimality of `x` for the Lagrangian `f + y . c`, scaled by `|(1, y)|`.
#[derive(Debug, Clone, PartialEq)]
pub struct KktReport {
    /// `|(1, y)|`
    pub scale: f64,
    /// First-order measure over `F(x)`, then the measures of orders
    /// `2..=q` restricted to `F(x) ∩ M(x)`.
    pub measures: Vec<BoundCheck>,
    /// Norm of the projection of `-grad L` onto the tangent cone of `F`.
    pub projected_gradient: BoundCheck,
    /// All measures pass (the projected gradient is informational).
    pub pass: bool,
}

fn within(value: f64, bound: f64) -> bool {
    value <= bound * (1.0 + 1e-6) + 1e-12
}

/// Evaluates the scaled first- and higher-order conditions for the
/// Lagrangian at `(x, y)` with radius `delta`.
pub fn scaled_kkt_check<P: ProblemOracle + ?Sized>(
    prob: &P,
    x: &[f64],
    y: &[f64],
    delta: f64,
    eps_d: f64,
    q: usize,
    opts: &PhiOptions,
) -> Result<KktReport> {
    check_problem(prob, x)?;
    if !(1..=3).contains(&q) {
        return arg_err("criticality order q must be 1, 2 or 3");
    }
    let bundle = prob.bundle(x, q)?;
    let model = bundle.lagrangian_model(y, q)?;
    let scale = (1.0 + y.iter().map(|v| v * v).sum::<f64>()).sqrt();
    let set = prob.feasible_set();
    let shifted = set.shifted(x);
    let mut measures = Vec::with_capacity(q);
    let phi1 = phi(&model.truncated(1), &shifted, delta, opts)?.phi;
    let bound1 = eps_d * delta * scale;
    measures.push(BoundCheck {
        order: 1,
        value: phi1,
        bound: bound1,
        pass: within(phi1, bound1),
    });
    if q >= 2 {
        let basis = crate::linalg::null_space(&bundle.stacked_gradients(), prob.dim(), None);
        for j in 2..=q {
            let value = phi_hat(&model.truncated(j), &shifted, &basis, delta, opts)?.phi;
            let bound = eps_d * delta.powi(j as i32) * scale;
            measures.push(BoundCheck {
                order: j,
                value,
                bound,
                pass: within(value, bound),
            });
        }
    }
    let grad = model.tensors[0].data();
    let minus: Vec<f64> = grad.iter().map(|g| -g).collect();
    let (tangent, _) = set.moreau_decompose(x, &minus)?;
    let pg = norm(&tangent);
    let pg_bound = eps_d * scale;
    Ok(KktReport {
        scale,
        pass: measures.iter().all(|m| m.pass),
        measures,
        projected_gradient: BoundCheck {
            order: 1,
            value: pg,
            bound: pg_bound,
            pass: within(pg, pg_bound),
        },
    })
}

/// Sampled check of the local lower bound implied by a certificate.
#[derive(Debug, Clone, PartialEq)]
pub struct ProbeReport {
    /// Radius of the sampled neighbourhood.
    pub radius: f64,
    pub samples: usize,
    pub violations: usize,
    /// Smallest `psi(x + d) - psi(x) + 2 eps delta^q` over the samples.
    pub worst_margin: f64,
}

/// Samples feasible `d` with `|d| <= (q! eps delta^q / L)^(1/(q+1))` and
/// counts those with `psi(x + d) < psi(x) - 2 eps delta^q`, where `psi` is
/// `nu` or `mu(., t)` according to the certificate and `eps = eps_d |r|`.
pub fn lower_bound_probe<P: ProblemOracle + ?Sized>(
    prob: &P,
    cert: &TerminationCertificate,
    lipschitz: f64,
    samples: usize,
    eps_d: f64,
    q: usize,
    seed: u64,
) -> Result<ProbeReport> {
    check_problem(prob, &cert.x)?;
    if !(lipschitz > 0.0) {
        return arg_err("Lipschitz estimate must be positive");
    }
    if !(1..=3).contains(&q) {
        return arg_err("criticality order q must be 1, 2 or 3");
    }
    let psi = |x: &[f64]| -> f64 {
        let (f, c) = prob.values(x);
        let mut s: f64 = c.iter().map(|v| v * v).sum();
        if let Some(t) = cert.t {
            s += (f - t) * (f - t);
        }
        0.5 * s
    };
    let eps = eps_d * cert.residual_norm;
    let slack = 2.0 * eps * cert.delta.powi(q as i32);
    let factorial: f64 = (1..=q).map(|i| i as f64).product();
    let radius = (factorial * eps * cert.delta.powi(q as i32) / lipschitz).powf(1.0 / (q as f64 + 1.0));
    let base = psi(&cert.x);
    let set = prob.feasible_set();
    let shifted = set.shifted(&cert.x);
    let region = StepRegion::new(&shifted, radius);
    let mut stream = Stream::new(seed);
    let mut violations = 0;
    let mut worst = f64::INFINITY;
    for _ in 0..samples {
        let mut d = stream.in_ball(prob.dim(), radius);
        if !shifted.member(&d, 0.0) {
            d = region.project(&d);
        }
        let margin = psi(&axpy(&cert.x, 1.0, &d)) - base + slack;
        worst = worst.min(margin);
        if margin < 0.0 {
            violations += 1;
        }
    }
    Ok(ProbeReport {
        radius,
        samples,
        violations,
        worst_margin: worst,
    })
}

/// Observed iteration and evaluation counts against the complexity bounds.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundReport {
    pub kplus: usize,
    /// `(f(x_1) - f_low + 1) / ((1 - delta) eps_p)`
    pub kplus_bound: f64,
    pub kplus_ok: bool,
    pub total_evals: usize,
    /// `max(1 / eps_p, eps_p^(1 - pi) eps_d^(-pi))`
    pub shape: f64,
    /// `total_evals / shape`
    pub fitted_constant: f64,
}

pub fn bound_audit<P: ProblemOracle + ?Sized>(
    trace: &OuterTrace,
    prob: &P,
    cfg: &OuterConfig,
    pi: f64,
) -> Result<BoundReport> {
    let f_low = prob
        .f_low()
        .ok_or_else(|| Error::NotApplicable(String::from("the problem declares no lower bound f_low")))?;
    let kplus = trace.kplus();
    let kplus_bound = match trace.f_x1 {
        Some(f1) => (f1 - f_low + 1.0) / ((1.0 - cfg.delta) * cfg.eps_p),
        None => f64::INFINITY,
    };
    let shape = (1.0 / cfg.eps_p).max(cfg.eps_p.powf(1.0 - pi) * cfg.eps_d.powf(-pi));
    let total_evals = trace.counters.total();
    Ok(BoundReport {
        kplus,
        kplus_bound,
        kplus_ok: kplus as f64 <= kplus_bound,
        total_evals,
        shape,
        fitted_constant: total_evals as f64 / shape,
    })
}
