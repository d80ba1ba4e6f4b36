//! Necessary optimality conditions of arbitrary order along polynomial arcs.
//!
//! For a direction sequence `s_1, ..., s_q` the arc
//! `x(a) = x + a s_1 + a^2 s_2 + ... + a^q s_q` is substituted into a
//! smooth function; the coefficient of `a^j` in the expansion is
//!
//! ```text
//! sum_{k=1}^{j} 1/k! sum_{(l_1..l_k) in P(j,k)} D^k g(x)[s_{l_1}, ..., s_{l_k}]
//! ```
//!
//! where `P(j,k)` holds the ordered k-tuples of positive integers summing
//! to `j`. Feasible arcs make these coefficients vanish for every
//! constraint; at a minimizer the coefficients of the Lagrangian vanish
//! below order `q` and the order-`q` coefficient is nonnegative.
//!
//! The module also carries two worked reproductions: the third-order saddle
//! of `saddle3d` and the fourth-order behaviour of the penalty function
//! `mu` on `theprob`.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;

use crate::convex::ConvexSet;
use crate::error::{arg_err, Error, Result};
use crate::linalg::{axpy, dot, norm, null_space, unit_vector};
use crate::problem::{catalogue, DerivativeBundle, ProblemOracle};
use crate::tensor::{SymmetricTensor, MAX_ORDER};

/// Default absolute tolerance on condition values.
pub const CONDITION_TOL: f64 = 1e-9;

/// The set `P(j, k)` in lexicographic order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CompositionSet {
    pub j: usize,
    pub k: usize,
    pub tuples: Vec<Vec<usize>>,
}

/// Enumerates the ordered `k`-tuples of positive integers summing to `j`.
pub fn compositions(j: usize, k: usize) -> Result<CompositionSet> {
    if k == 0 || k > j || j > MAX_ORDER {
        return arg_err(format!(
            "compositions need 1 <= k <= j <= {MAX_ORDER}, got j = {j}, k = {k}"
        ));
    }
    fn extend(rest: usize, slots: usize, prefix: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if slots == 0 {
            if rest == 0 {
                out.push(prefix.clone());
            }
            return;
        }
        for first in 1..=rest.saturating_sub(slots - 1) {
            prefix.push(first);
            extend(rest - first, slots - 1, prefix, out);
            prefix.pop();
        }
    }
    let mut tuples = Vec::new();
    extend(j, k, &mut Vec::with_capacity(k), &mut tuples);
    Ok(CompositionSet { j, k, tuples })
}

fn factorial(k: usize) -> f64 {
    (1..=k).map(|i| i as f64).product()
}

/// Coefficient of `a^j` in `g(x(a))` from the derivative tensors of `g`
/// (`tensors[k - 1]` of order `k`).
pub fn arc_coefficient(tensors: &[SymmetricTensor], dirs: &[Vec<f64>], j: usize) -> Result<f64> {
    if j == 0 || j > MAX_ORDER {
        return Err(Error::UnsupportedOrder(j));
    }
    if tensors.len() < j {
        return arg_err(format!("derivative tensors up to order {j} are required"));
    }
    if dirs.len() < j {
        return arg_err(format!("directions s_1 to s_{j} are required"));
    }
    let mut total = 0.0;
    for k in 1..=j {
        let mut inner = 0.0;
        for tuple in compositions(j, k)?.tuples {
            let args: Vec<&[f64]> = tuple.iter().map(|&l| dirs[l - 1].as_slice()).collect();
            inner += tensors[k - 1].apply(&args)?;
        }
        total += inner / factorial(k);
    }
    Ok(total)
}

/// Order-`j` coefficient of the Lagrangian along the arc.
pub fn lagrangian_condition_value(lagrangian: &[SymmetricTensor], dirs: &[Vec<f64>], j: usize) -> Result<f64> {
    arc_coefficient(lagrangian, dirs, j)
}

/// Order-`i` coefficients of every constraint along the arc
/// (`constraints[c][k - 1]` is the k-th derivative of constraint `c`).
pub fn feasibility_condition_value(
    constraints: &[Vec<SymmetricTensor>],
    dirs: &[Vec<f64>],
    i: usize,
) -> Result<Vec<f64>> {
    constraints.iter().map(|c| arc_coefficient(c, dirs, i)).collect()
}

/// Conditions of one order.
#[derive(Debug, Clone, PartialEq)]
pub struct OrderConditions {
    pub order: usize,
    /// Arc coefficient of the objective or Lagrangian.
    pub value: f64,
    /// Arc coefficients of the constraints.
    pub feasibility: Vec<f64>,
    pub feasibility_holds: bool,
    /// `|value| <= tol` (required below the final order).
    pub vanishes: bool,
}

/// Distance of a sampled arc point to the feasible set.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ArcSample {
    pub alpha: f64,
    pub distance: f64,
    /// Allowed remainder `alpha^(q + 1/2)`.
    pub slack: f64,
    /// Constraint violation `|c(x(alpha))|` (informational).
    pub constraint_norm: f64,
    pub holds: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConditionsReport {
    /// `-grad` of the objective or Lagrangian lies in the normal cone.
    pub first_order_cone: bool,
    pub orders: Vec<OrderConditions>,
    pub arc: Vec<ArcSample>,
    pub verdict: bool,
}

impl ConditionsReport {
    /// Arc coefficient of the highest order checked.
    pub fn final_value(&self) -> f64 {
        self.orders.last().map_or(0.0, |o| o.value)
    }
}

/// Arc parameters at which the arc is sampled.
pub const ARC_ALPHAS: [f64; 3] = [1e-1, 1e-2, 1e-3];

/// Checks the conditions of orders `1..=q` for a function with derivative
/// tensors `objective`, constraints with tensors `constraints`, at `x` in
/// `set`, along `dirs`.
#[allow(clippy::too_many_arguments)]
pub fn evaluate_conditions<P: ProblemOracle + ?Sized>(
    prob: &P,
    objective: &[SymmetricTensor],
    constraints: &[Vec<SymmetricTensor>],
    x: &[f64],
    dirs: &[Vec<f64>],
    q: usize,
    tol: f64,
) -> Result<ConditionsReport> {
    if q == 0 || q > MAX_ORDER {
        return Err(Error::UnsupportedOrder(q));
    }
    let n = prob.dim();
    if x.len() != n || dirs.iter().any(|s| s.len() != n) {
        return arg_err("point and directions must match the problem dimension");
    }
    let set = prob.feasible_set();
    let minus_grad: Vec<f64> = objective[0].data().iter().map(|g| -g).collect();
    let first_order_cone = set.normal_cone_member(x, &minus_grad, tol)?;
    let mut orders = Vec::with_capacity(q);
    for i in 1..=q {
        let value = arc_coefficient(objective, dirs, i)?;
        let feasibility = feasibility_condition_value(constraints, dirs, i)?;
        orders.push(OrderConditions {
            order: i,
            value,
            feasibility_holds: feasibility.iter().all(|v| v.abs() <= tol),
            feasibility,
            vanishes: value.abs() <= tol,
        });
    }
    let arc = sample_arc(prob, set, x, dirs, q);
    let verdict = first_order_cone
        && orders.iter().all(|o| o.feasibility_holds)
        && orders[..q - 1].iter().all(|o| o.vanishes)
        && orders[q - 1].value >= -tol
        && arc.iter().all(|a| a.holds);
    Ok(ConditionsReport {
        first_order_cone,
        orders,
        arc,
        verdict,
    })
}

fn sample_arc<P: ProblemOracle + ?Sized>(
    prob: &P,
    set: &ConvexSet,
    x: &[f64],
    dirs: &[Vec<f64>],
    q: usize,
) -> Vec<ArcSample> {
    ARC_ALPHAS
        .iter()
        .map(|&alpha| {
            let mut point = x.to_vec();
            for (i, s) in dirs.iter().take(q).enumerate() {
                point = axpy(&point, alpha.powi(i as i32 + 1), s);
            }
            let distance = crate::linalg::dist(&point, &set.project(&point));
            let slack = alpha.powf(q as f64 + 0.5);
            let constraint_norm = norm(&prob.values(&point).1);
            ArcSample {
                alpha,
                distance,
                slack,
                constraint_norm,
                holds: distance <= slack,
            }
        })
        .collect()
}

/// Checks the necessary conditions of orders `1..=q` for the Lagrangian
/// `f + y . c` at `x` along `dirs`.
pub fn check_necessary<P: ProblemOracle + ?Sized>(
    prob: &P,
    x: &[f64],
    y: &[f64],
    dirs: &[Vec<f64>],
    q: usize,
    tol: f64,
) -> Result<ConditionsReport> {
    if q == 0 || q > MAX_ORDER {
        return Err(Error::UnsupportedOrder(q));
    }
    let bundle = prob.bundle(x, q)?;
    let lagrangian = bundle.lagrangian_model(y, q)?;
    evaluate_conditions(prob, &lagrangian.tensors, &bundle.dc, x, dirs, q, tol)
}

/// Checks the conditions of orders `1..=q` for minimizing `mu(., t)`
/// along arcs that are feasible for the constraints of `prob`.
pub fn check_necessary_mu<P: ProblemOracle + ?Sized>(
    prob: &P,
    x: &[f64],
    t: f64,
    dirs: &[Vec<f64>],
    q: usize,
    tol: f64,
) -> Result<ConditionsReport> {
    if q == 0 || q > MAX_ORDER {
        return Err(Error::UnsupportedOrder(q));
    }
    let bundle = prob.bundle(x, q)?;
    let mu = bundle.mu_model(t, q)?;
    evaluate_conditions(prob, &mu.tensors, &bundle.dc, x, dirs, q, tol)
}

/// The term of the fourth derivative of `mu` that has no counterpart in
/// `(f - t)` times the fourth derivative of the Lagrangian:
/// `3 / (f - t) [sum_i (D^2 c_i[d]^2)^2 + (D^2 f[d]^2)^2]`.
pub fn penalty_fourth_order_terms<P: ProblemOracle + ?Sized>(prob: &P, x: &[f64], t: f64, d: &[f64]) -> Result<f64> {
    if d.len() != prob.dim() || x.len() != prob.dim() {
        return arg_err("point and direction must match the problem dimension");
    }
    let b = prob.bundle(x, 2)?;
    let gap = b.f - t;
    if !(gap > 0.0) {
        return Err(Error::NotApplicable(format!("requires f(x) > t, got f(x) - t = {gap}")));
    }
    let mut s = b.df[1].apply_same(d).powi(2);
    for dc in &b.dc {
        s += dc[1].apply_same(d).powi(2);
    }
    Ok(3.0 * s / gap)
}

/// Completes `s_1` to a sequence `s_1..s_q` along which every constraint
/// coefficient vanishes, choosing each `s_i` of least norm. Requires the
/// constraint gradients to be linearly independent.
pub fn complete_feasible_directions(bundle: &DerivativeBundle, s1: &[f64], q: usize) -> Result<Vec<Vec<f64>>> {
    let n = bundle.dim();
    if s1.len() != n {
        return arg_err("first direction must match the problem dimension");
    }
    if q == 0 || q > bundle.order() {
        return Err(Error::UnsupportedOrder(q));
    }
    let rows: Vec<Vec<f64>> = bundle.dc.iter().map(|d| d[0].data().to_vec()).collect();
    let gram: Vec<Vec<f64>> = rows.iter().map(|a| rows.iter().map(|b| dot(a, b)).collect()).collect();
    let mut dirs = vec![s1.to_vec()];
    for i in 2..=q {
        dirs.push(vec![0.0; n]);
        let residual = feasibility_condition_value(&bundle.dc, &dirs, i)?;
        let z = solve_dense(&gram, &residual)?;
        let mut s = vec![0.0; n];
        for (zi, row) in z.iter().zip(&rows) {
            s = axpy(&s, -zi, row);
        }
        dirs[i - 1] = s;
    }
    Ok(dirs)
}

/// Gaussian elimination with partial pivoting.
fn solve_dense(a: &[Vec<f64>], b: &[f64]) -> Result<Vec<f64>> {
    let m = b.len();
    let mut aug: Vec<Vec<f64>> = a
        .iter()
        .zip(b)
        .map(|(row, &bi)| {
            let mut r = row.clone();
            r.push(bi);
            r
        })
        .collect();
    for col in 0..m {
        let pivot = (col..m)
            .max_by(|&i, &j| aug[i][col].abs().total_cmp(&aug[j][col].abs()))
            .expect("non-empty pivot range");
        if aug[pivot][col].abs() < 1e-14 {
            return Err(Error::NotApplicable(String::from(
                "constraint gradients are linearly dependent",
            )));
        }
        aug.swap(col, pivot);
        let (upper, lower) = aug.split_at_mut(col + 1);
        let pivot_row = &upper[col];
        for row in lower.iter_mut() {
            let factor = row[col] / pivot_row[col];
            for (v, p) in row[col..].iter_mut().zip(&pivot_row[col..]) {
                *v -= factor * p;
            }
        }
    }
    let mut z = vec![0.0; m];
    for r in (0..m).rev() {
        let s: f64 = (r + 1..m).map(|c| aug[r][c] * z[c]).sum();
        z[r] = (aug[r][m] - s) / aug[r][r];
    }
    Ok(z)
}

/// One reproduced quantity next to the value it should have.
#[derive(Debug, Clone, PartialEq)]
pub struct Reproduction {
    pub label: String,
    pub computed: f64,
    pub expected: f64,
    pub tol: f64,
}

impl Reproduction {
    fn new(label: impl Into<String>, computed: f64, expected: f64, tol: f64) -> Self {
        Reproduction {
            label: label.into(),
            computed,
            expected,
            tol,
        }
    }

    pub fn deviation(&self) -> f64 {
        (self.computed - self.expected).abs()
    }

    pub fn pass(&self) -> bool {
        self.deviation() <= self.tol
    }
}

/// A worked example: reproduced quantities and the condition checks.
#[derive(Debug, Clone, PartialEq)]
pub struct DemoReport {
    pub title: String,
    pub items: Vec<Reproduction>,
    pub conditions: Vec<(String, ConditionsReport)>,
}

impl DemoReport {
    pub fn pass(&self) -> bool {
        self.items.iter().all(Reproduction::pass)
    }

    pub fn failures(&self) -> impl Iterator<Item = &Reproduction> {
        self.items.iter().filter(|r| !r.pass())
    }
}

/// The third-order saddle point of `saddle3d` at the origin with
/// `y = (1, 0)` and directions `(e2, -e1, e3)`.
pub fn demo_saddle(tol: f64) -> Result<DemoReport> {
    let prob = catalogue("saddle3d", None)?;
    let x = [0.0; 3];
    let y = [1.0, 0.0];
    let (e1, e2, e3) = (unit_vector(3, 0), unit_vector(3, 1), unit_vector(3, 2));
    let dirs = vec![e2.clone(), e1.iter().map(|v| -v).collect(), e3];
    let bundle = prob.bundle(&x, 3)?;
    let lag = bundle.lagrangian_model(&y, 3)?;
    let mut items = Vec::new();
    for (i, g) in lag.tensors[0].data().iter().enumerate() {
        items.push(Reproduction::new(
            format!("grad Lambda(0, y0)[{}]", i + 1),
            *g,
            0.0,
            tol,
        ));
    }
    let jac: Vec<Vec<f64>> = bundle.dc.iter().map(|d| d[0].data().to_vec()).collect();
    let kernel = null_space(&jac, 3, None);
    items.push(Reproduction::new("dim ker grad c(0)", kernel.len() as f64, 1.0, tol));
    let along_e2 = kernel.first().map_or(0.0, |b| dot(b, &e2).abs());
    items.push(Reproduction::new("|<ker grad c(0), e2>|", along_e2, 1.0, tol));
    let printed = [[0.0, 1.0, 0.0], [1.0, 0.0, 0.0], [0.0, 0.0, 0.0]];
    for (r, row) in printed.iter().enumerate() {
        for (c, &v) in row.iter().enumerate() {
            let got = lag.tensors[1].entry(&[r, c]);
            items.push(Reproduction::new(
                format!("Hess Lambda(0, y0)[{},{}]", r + 1, c + 1),
                got,
                v,
                tol,
            ));
        }
    }
    let third = &lag.tensors[2];
    items.push(Reproduction::new(
        "D3 Lambda(0, y0)[2,2,2]",
        third.entry(&[1, 1, 1]),
        6.0,
        tol,
    ));
    let others = (0..27)
        .filter(|&i| i != 13)
        .map(|i| third.entry(&[i / 9, (i / 3) % 3, i % 3]).abs())
        .fold(0.0, f64::max);
    items.push(Reproduction::new(
        "max other |D3 Lambda(0, y0)| entry",
        others,
        0.0,
        tol,
    ));
    for i in 2..=3 {
        for (c, v) in feasibility_condition_value(&bundle.dc, &dirs, i)?.iter().enumerate() {
            items.push(Reproduction::new(
                format!("feasibility order {i}, constraint {}", c + 1),
                *v,
                0.0,
                tol,
            ));
        }
    }
    items.push(Reproduction::new(
        "Hess Lambda(0, y0)[s1, s2]",
        lag.tensors[1].apply(&[&dirs[0], &dirs[1]])?,
        -1.0,
        tol,
    ));
    items.push(Reproduction::new(
        "D3 Lambda(0, y0)[s1]^3",
        third.apply_same(&dirs[0]),
        6.0,
        tol,
    ));
    let report = check_necessary(&prob, &x, &y, &dirs, 3, tol.max(CONDITION_TOL))?;
    items.push(Reproduction::new(
        "order-3 condition value",
        report.final_value(),
        0.0,
        tol,
    ));
    Ok(DemoReport {
        title: String::from("third-order saddle of saddle3d at the origin"),
        items,
        conditions: vec![(String::from("Lagrangian, y = (1, 0), q = 3"), report)],
    })
}

/// Fourth-order behaviour of `mu(., -eps)` and of the Lagrangian with
/// `y = 1` on `theprob(eps)` at the origin, along the feasible arcs with
/// `s_1 = tau e1`. Expected values are the textbook ones.
pub fn demo_penalty(eps: f64, taus: &[f64], tol: f64) -> Result<DemoReport> {
    let prob = catalogue("theprob", Some(eps))?;
    let x = [0.0, 0.0];
    let t = -eps;
    let bundle = prob.bundle(&x, 4)?;
    let mu = bundle.mu_model(t, 4)?;
    let lag = bundle.lagrangian_model(&[1.0], 4)?;
    let e1 = unit_vector(2, 0);
    let e2 = unit_vector(2, 1);
    let mut items = Vec::new();

    items.push(Reproduction::new(
        "c(0) - (f(0) - t)",
        bundle.c[0] - (bundle.f - t),
        0.0,
        tol,
    ));
    for k in 0..3 {
        let sum = bundle.dc[0][k].add(&bundle.df[k])?;
        items.push(Reproduction::new(
            format!("max |D{} c(0) + D{} f(0)|", k + 1, k + 1),
            sum.max_abs(),
            0.0,
            tol,
        ));
    }
    for (i, g) in mu.tensors[0].data().iter().enumerate() {
        items.push(Reproduction::new(format!("grad mu(0, t)[{}]", i + 1), *g, 0.0, tol));
    }
    for (r, c, v) in [(0, 0, 0.0), (0, 1, 0.0), (1, 1, 2.0)] {
        items.push(Reproduction::new(
            format!("Hess mu(0, t)[{},{}]", r + 1, c + 1),
            mu.tensors[1].entry(&[r, c]),
            v,
            tol,
        ));
    }
    items.push(Reproduction::new(
        "max |D3 mu(0, t)| entry",
        mu.tensors[2].max_abs(),
        0.0,
        tol,
    ));
    items.push(Reproduction::new(
        "D3 mu(0, t)[e1]^3",
        mu.tensors[2].apply_same(&e1),
        0.0,
        tol,
    ));
    items.push(Reproduction::new(
        "D4 mu(0, t)[e1]^4",
        mu.tensors[3].apply_same(&e1),
        12.0 * (1.0 - eps),
        tol,
    ));
    items.push(Reproduction::new(
        "D4 Lambda(0, 1)[e1]^4",
        lag.tensors[3].apply_same(&e1),
        -12.0,
        tol,
    ));
    items.push(Reproduction::new(
        "penalty fourth-order term along e1",
        penalty_fourth_order_terms(&prob, &x, t, &e1)?,
        24.0 / eps,
        tol * (1.0 + 24.0 / eps),
    ));

    let mut conditions = Vec::new();
    for &tau in taus {
        let s1: Vec<f64> = e1.iter().map(|v| v * tau).collect();
        let dirs = complete_feasible_directions(&bundle, &s1, 4)?;
        items.push(Reproduction::new(
            format!("e2 . s2 at tau={tau}"),
            dot(&e2, &dirs[1]),
            -tau * tau,
            tol,
        ));
        let mu_report = check_necessary_mu(&prob, &x, t, &dirs, 4, tol.max(CONDITION_TOL))?;
        items.push(Reproduction::new(
            format!("mu order-4 value at tau={tau}"),
            mu_report.final_value(),
            (1.0 - 0.5 * eps) * tau.powi(4),
            tol,
        ));
        let lag_report = check_necessary(&prob, &x, &[1.0], &dirs, 4, tol.max(CONDITION_TOL))?;
        items.push(Reproduction::new(
            format!("Lambda order-4 value at tau={tau}"),
            lag_report.final_value(),
            -0.5 * tau.powi(4),
            tol,
        ));
        conditions.push((format!("mu, tau = {tau}, q = 4"), mu_report));
        conditions.push((format!("Lambda, y = 1, tau = {tau}, q = 4"), lag_report));
    }
    Ok(DemoReport {
        title: format!("fourth-order penalty behaviour on theprob with eps = {eps}"),
        items,
        conditions,
    })
}
