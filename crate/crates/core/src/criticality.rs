//! The high-order criticality measure
//!
//! ```text
//! phi_j(x, delta) = T(x, 0) - min { T_j(x, d) : x + d in F, |d| <= delta }
//! ```
//!
//! where `T_j(x, .)` is the degree-`j` Taylor model of a function at `x`,
//! together with a grid-based reference implementation, the variant
//! restricted to a subspace, and the approximate-criticality predicates.

use alloc::vec;
use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;

use crate::convex::{ConvexSet, StepRegion};
use crate::error::{arg_err, Error, Result};
use crate::linalg::{axpy, dot, norm, sub};
use crate::seeds::sobol_points;
use crate::tensor::{SymmetricTensor, MAX_ORDER};
use crate::trs;

const FACTORIAL: [f64; 5] = [1.0, 1.0, 2.0, 6.0, 24.0];

/// Value and derivative tensors of a function at a point; `tensors[k - 1]`
/// is the k-th derivative. The model is
/// `T(d) = value + sum_k tensors[k - 1][d]^k / k!`.
#[derive(Debug, Clone, PartialEq)]
pub struct TaylorModel {
    pub dim: usize,
    pub value: f64,
    pub tensors: Vec<SymmetricTensor>,
}

impl TaylorModel {
    pub fn new(dim: usize, value: f64, tensors: Vec<SymmetricTensor>) -> Result<Self> {
        if tensors.len() > MAX_ORDER {
            return Err(Error::UnsupportedOrder(tensors.len()));
        }
        for (k, t) in tensors.iter().enumerate() {
            if t.order() != k + 1 || t.dim() != dim {
                return arg_err("model tensors must have orders 1, 2, ... and a common dimension");
            }
        }
        Ok(Self { dim, value, tensors })
    }

    pub fn degree(&self) -> usize {
        self.tensors.len()
    }

    /// The model of degree `j` built from the same data.
    pub fn truncated(&self, j: usize) -> TaylorModel {
        TaylorModel {
            dim: self.dim,
            value: self.value,
            tensors: self.tensors[..j.min(self.tensors.len())].to_vec(),
        }
    }

    /// `T(d) - T(0)`
    pub fn change(&self, d: &[f64]) -> f64 {
        self.tensors
            .iter()
            .enumerate()
            .map(|(k, t)| t.apply_same(d) / FACTORIAL[k + 1])
            .sum()
    }

    /// `T(d) - T(0)` and the gradient of `T` at `d`.
    pub fn change_and_gradient(&self, d: &[f64]) -> (f64, Vec<f64>) {
        let mut value = 0.0;
        let mut grad = vec![0.0; self.dim];
        for (k, t) in self.tensors.iter().enumerate() {
            let (v, g) = t.power_and_gradient(d);
            value += v / FACTORIAL[k + 1];
            let s = 1.0 / FACTORIAL[k];
            for (a, b) in grad.iter_mut().zip(&g) {
                *a += s * b;
            }
        }
        (value, grad)
    }

    pub fn eval(&self, d: &[f64]) -> f64 {
        self.value + self.change(d)
    }

    fn gradient_at_zero(&self) -> Vec<f64> {
        self.tensors
            .first()
            .map(|t| t.data().to_vec())
            .unwrap_or_else(|| vec![0.0; self.dim])
    }
}

/// Settings of the global model minimization.
#[derive(Debug, Clone, PartialEq)]
pub struct PhiOptions {
    /// Seed of the digital shift applied to the Sobol starting points.
    pub seed: u64,
    /// Number of Sobol starting points (on top of `2n` coordinate starts).
    pub starts: usize,
    /// Projected-gradient norm at which a local search stops.
    pub tol: f64,
    /// Iteration cap of each local search.
    pub max_iter: usize,
}

impl Default for PhiOptions {
    fn default() -> Self {
        PhiOptions {
            seed: 0x5eed_0fc0_ffee,
            starts: 64,
            tol: 1e-11,
            max_iter: 2000,
        }
    }
}

/// Optimal decrease and the displacement attaining it.
#[derive(Debug, Clone, PartialEq)]
pub struct PhiResult {
    pub phi: f64,
    pub step: Vec<f64>,
}

fn check_radius(delta: f64) -> Result<()> {
    if !(delta > 0.0 && delta <= 1.0) {
        return arg_err("trust-region radius must lie in (0, 1]");
    }
    Ok(())
}

fn check_dims(model: &TaylorModel, set: &ConvexSet) -> Result<()> {
    if model.dim != set.dim() {
        return arg_err("model and set dimensions differ");
    }
    Ok(())
}

/// Largest decrease of `model` over `F(x) ∩ {|d| <= delta}`, where
/// `shifted` is the set `F(x)`.
///
/// Degree 1 is solved in closed form, degree 2 over the whole space by an
/// exact trust-region solve, and everything else by projected spectral
/// gradient descent from deterministic multi-start seeds.
pub fn phi(model: &TaylorModel, shifted: &ConvexSet, delta: f64, opts: &PhiOptions) -> Result<PhiResult> {
    check_radius(delta)?;
    check_dims(model, shifted)?;
    let n = model.dim;
    let region = StepRegion::new(shifted, delta);
    let zero = PhiResult {
        phi: 0.0,
        step: vec![0.0; n],
    };
    let candidate = match model.degree() {
        0 => return Ok(zero),
        1 => region.linear_minimizer(&model.gradient_at_zero()),
        2 if matches!(shifted, ConvexSet::All { .. }) => {
            trs::solve(model.tensors[0].data(), model.tensors[1].data(), delta)
        }
        _ => multistart(model, &region, opts),
    };
    let change = model.change(&candidate);
    Ok(if change < 0.0 {
        PhiResult {
            phi: -change,
            step: candidate,
        }
    } else {
        zero
    })
}

/// Seeds for the local searches: the origin, the linear and quadratic
/// minimizers, `+-delta e_i` and Sobol points mapped radially into the ball.
fn seeds(model: &TaylorModel, region: &StepRegion, opts: &PhiOptions) -> Vec<Vec<f64>> {
    let n = model.dim;
    let delta = region.radius;
    let mut out = Vec::with_capacity(2 * n + opts.starts + 3);
    out.push(vec![0.0; n]);
    out.push(region.linear_minimizer(&model.gradient_at_zero()));
    if model.degree() >= 2 {
        out.push(trs::solve(model.tensors[0].data(), model.tensors[1].data(), delta));
    }
    for i in 0..n {
        for s in [delta, -delta] {
            let mut e = vec![0.0; n];
            e[i] = s;
            out.push(e);
        }
    }
    for u in sobol_points(n, opts.starts, opts.seed) {
        let v: Vec<f64> = u.iter().map(|x| 2.0 * x - 1.0).collect();
        let nv = norm(&v);
        let inf = v.iter().fold(0.0f64, |m, x| m.max(x.abs()));
        out.push(if nv > 0.0 {
            v.iter().map(|x| x * delta * inf / nv).collect()
        } else {
            v
        });
    }
    out.into_iter().map(|d| region.project(&d)).collect()
}

fn lexicographic_less(a: &[f64], b: &[f64]) -> bool {
    for (x, y) in a.iter().zip(b) {
        match x.total_cmp(y) {
            core::cmp::Ordering::Less => return true,
            core::cmp::Ordering::Greater => return false,
            core::cmp::Ordering::Equal => {}
        }
    }
    false
}

/// Best `(change, d)` over all seeds; ties go to the lexicographically
/// smallest displacement so the result is independent of seed order.
fn multistart(model: &TaylorModel, region: &StepRegion, opts: &PhiOptions) -> Vec<f64> {
    let mut best: Option<(f64, Vec<f64>)> = None;
    for start in seeds(model, region, opts) {
        let (d, v) = spg(model, region, &start, opts);
        let better = match &best {
            None => true,
            Some((bv, bd)) => v < *bv || (v == *bv && lexicographic_less(&d, bd)),
        };
        if better {
            best = Some((v, d));
        }
    }
    best.map(|(_, d)| d).unwrap_or_else(|| vec![0.0; model.dim])
}

/// Nonmonotone spectral projected gradient descent on the model change.
fn spg(model: &TaylorModel, region: &StepRegion, start: &[f64], opts: &PhiOptions) -> (Vec<f64>, f64) {
    const MEMORY: usize = 10;
    const LAMBDA_MIN: f64 = 1e-12;
    const LAMBDA_MAX: f64 = 1e12;
    let mut x = region.project(start);
    let (mut f, mut g) = model.change_and_gradient(&x);
    let mut history = [f; MEMORY];
    let mut slot = 0;
    let pg = sub(&region.project(&axpy(&x, -1.0, &g)), &x);
    let pg_inf = pg.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let mut lambda = if pg_inf > 0.0 {
        (1.0 / pg_inf).clamp(LAMBDA_MIN, LAMBDA_MAX)
    } else {
        1.0
    };
    for _ in 0..opts.max_iter {
        let pg = sub(&region.project(&axpy(&x, -1.0, &g)), &x);
        if norm(&pg) <= opts.tol {
            break;
        }
        let dir = sub(&region.project(&axpy(&x, -lambda, &g)), &x);
        let gtd = dot(&g, &dir);
        if gtd >= 0.0 {
            break;
        }
        let fmax = history.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let mut alpha = 1.0;
        let (xn, fnew) = loop {
            let xn = axpy(&x, alpha, &dir);
            let fnew = model.change(&xn);
            if fnew <= fmax + 1e-4 * alpha * gtd || alpha < 1e-12 {
                break (xn, fnew);
            }
            // Safeguarded quadratic interpolation.
            let q = -0.5 * gtd * alpha * alpha / (fnew - f - alpha * gtd);
            alpha = if q >= 0.1 * alpha && q <= 0.9 * alpha {
                q
            } else {
                0.5 * alpha
            };
        };
        if fnew > fmax {
            break;
        }
        let (_, gn) = model.change_and_gradient(&xn);
        let s = sub(&xn, &x);
        let y = sub(&gn, &g);
        let sty = dot(&s, &y);
        lambda = if sty > 0.0 {
            (dot(&s, &s) / sty).clamp(LAMBDA_MIN, LAMBDA_MAX)
        } else {
            LAMBDA_MAX
        };
        let moved = norm(&s);
        x = xn;
        f = fnew;
        g = gn;
        history[slot] = f;
        slot = (slot + 1) % MEMORY;
        if moved == 0.0 {
            break;
        }
    }
    // Report the value of the returned point, which may differ from the
    // best visited one under the nonmonotone rule.
    (x, f)
}

/// Grid-search reference for [`phi`] in dimension at most 4: a grid over
/// `[-delta, delta]^n` (odd resolution, so it contains the origin) restricted
/// to the feasible region, a projected-gradient polish of the 8 best grid
/// points, and grid refinement until successive values differ by less than
/// `1e-8`.
pub fn phi_bruteforce(model: &TaylorModel, shifted: &ConvexSet, delta: f64, resolution: usize) -> Result<f64> {
    const LIMIT: usize = 4;
    const KEEP: usize = 8;
    const MAX_POINTS: usize = 3_000_000;
    check_radius(delta)?;
    check_dims(model, shifted)?;
    let n = model.dim;
    if n > LIMIT {
        return Err(Error::UnsupportedDimension { dim: n, limit: LIMIT });
    }
    if model.degree() == 0 {
        return Ok(0.0);
    }
    let region = StepRegion::new(shifted, delta);
    let mut res = resolution.max(3) | 1;
    let mut previous: Option<f64> = None;
    loop {
        let mut best: Vec<(f64, Vec<f64>)> = Vec::with_capacity(KEEP + 1);
        let total = res.pow(n as u32);
        let mut idx = vec![0usize; n];
        for flat in 0..total {
            let mut r = flat;
            for slot in idx.iter_mut().rev() {
                *slot = r % res;
                r /= res;
            }
            let d: Vec<f64> = idx
                .iter()
                .map(|&i| delta * (2.0 * i as f64 / (res - 1) as f64 - 1.0))
                .collect();
            if !region.contains(&d, 1e-12) {
                continue;
            }
            let v = model.change(&d);
            if best.len() < KEEP || v < best[best.len() - 1].0 {
                let pos = best.partition_point(|(b, _)| *b <= v);
                best.insert(pos, (v, d));
                best.truncate(KEEP);
            }
        }
        let mut value = 0.0f64;
        for (v, d) in &best {
            value = value.min(*v).min(polish(model, &region, d));
        }
        let phi = -value;
        if let Some(p) = previous {
            if (p - phi).abs() < 1e-8 {
                return Ok(phi.max(p));
            }
        }
        let next = 2 * res - 1;
        if next.pow(n as u32) > MAX_POINTS {
            return Ok(previous.map_or(phi, |p| p.max(phi)));
        }
        previous = Some(phi);
        res = next;
    }
}

/// Monotone projected gradient with Armijo backtracking along the
/// projection arc; returns the final model change.
fn polish(model: &TaylorModel, region: &StepRegion, start: &[f64]) -> f64 {
    let mut x = region.project(start);
    let (mut f, mut g) = model.change_and_gradient(&x);
    let mut step = 1.0;
    for _ in 0..20_000 {
        let mut s = (2.0 * step).min(1e6);
        let accepted = loop {
            let xn = region.project(&axpy(&x, -s, &g));
            let fnew = model.change(&xn);
            let dec = dot(&g, &sub(&xn, &x));
            if fnew <= f + 1e-4 * dec {
                break Some((xn, fnew));
            }
            s *= 0.5;
            if s < 1e-14 {
                break None;
            }
        };
        let Some((xn, fnew)) = accepted else { break };
        step = s;
        let moved = crate::linalg::dist(&xn, &x);
        x = xn;
        f = fnew;
        g = model.change_and_gradient(&x).1;
        if moved <= 1e-14 {
            break;
        }
    }
    f
}

/// The measure restricted to displacements `d = basis z` (orthonormal
/// `basis` columns).
///
/// The model is composed with the basis and minimized in the reduced space.
/// For the whole space and for balls the reduced feasible set is again the
/// whole space or a ball; for boxes the local searches reject infeasible
/// trial points.
pub fn phi_hat(
    model: &TaylorModel,
    shifted: &ConvexSet,
    basis: &[Vec<f64>],
    delta: f64,
    opts: &PhiOptions,
) -> Result<PhiResult> {
    check_radius(delta)?;
    check_dims(model, shifted)?;
    let n = model.dim;
    let r = basis.len();
    if r == 0 || model.degree() == 0 {
        return Ok(PhiResult {
            phi: 0.0,
            step: vec![0.0; n],
        });
    }
    if basis.iter().any(|b| b.len() != n) {
        return arg_err("basis vectors must match the model dimension");
    }
    let reduced = reduce_model(model, basis)?;
    let lift = |z: &[f64]| -> Vec<f64> {
        let mut d = vec![0.0; n];
        for (zi, b) in z.iter().zip(basis) {
            for (dk, bk) in d.iter_mut().zip(b) {
                *dk += zi * bk;
            }
        }
        d
    };
    let result = match shifted {
        ConvexSet::All { .. } => phi(&reduced, &ConvexSet::all(r), delta, opts)?,
        ConvexSet::Ball { center, radius } => {
            let zc: Vec<f64> = basis.iter().map(|b| dot(b, center)).collect();
            let perp = sub(center, &lift(&zc));
            let r2 = radius * radius - dot(&perp, &perp);
            if r2 <= 0.0 {
                PhiResult {
                    phi: 0.0,
                    step: vec![0.0; r],
                }
            } else {
                phi(&reduced, &ConvexSet::ball(zc, r2.sqrt())?, delta, opts)?
            }
        }
        ConvexSet::Box { .. } => {
            let feasible = |z: &[f64]| shifted.member(&lift(z), 1e-12);
            rejection_search(&reduced, delta, &feasible, opts)
        }
    };
    Ok(PhiResult {
        phi: result.phi,
        step: lift(&result.step),
    })
}

fn reduce_model(model: &TaylorModel, basis: &[Vec<f64>]) -> Result<TaylorModel> {
    let r = basis.len();
    let tensors = model
        .tensors
        .iter()
        .map(|t| {
            SymmetricTensor::from_sorted_fn(t.order(), r, |idx| {
                let args: Vec<&[f64]> = idx.iter().map(|&i| basis[i].as_slice()).collect();
                t.apply(&args).unwrap_or(0.0)
            })
        })
        .collect::<Result<Vec<_>>>()?;
    TaylorModel::new(r, model.value, tensors)
}

/// Multi-start projected gradient over the reduced ball in which trial
/// points violating `feasible` are rejected by halving the step.
fn rejection_search(
    model: &TaylorModel,
    delta: f64,
    feasible: &dyn Fn(&[f64]) -> bool,
    opts: &PhiOptions,
) -> PhiResult {
    let r = model.dim;
    let all = ConvexSet::all(r);
    let ball = StepRegion::new(&all, delta);
    let mut best = (0.0, vec![0.0; r]);
    for start in seeds(model, &ball, opts) {
        let mut z = start;
        let mut shrink = 0;
        while !feasible(&z) && shrink < 60 {
            z.iter_mut().for_each(|v| *v *= 0.5);
            shrink += 1;
        }
        if !feasible(&z) {
            continue;
        }
        let (mut f, mut g) = model.change_and_gradient(&z);
        let mut step = 1.0;
        for _ in 0..opts.max_iter {
            let mut s = (2.0 * step).min(1e6);
            let accepted = loop {
                let zn = ball.project(&axpy(&z, -s, &g));
                if feasible(&zn) {
                    let fnew = model.change(&zn);
                    if fnew <= f + 1e-4 * dot(&g, &sub(&zn, &z)) {
                        break Some((zn, fnew));
                    }
                }
                s *= 0.5;
                if s < 1e-14 {
                    break None;
                }
            };
            let Some((zn, fnew)) = accepted else { break };
            step = s;
            let moved = crate::linalg::dist(&zn, &z);
            z = zn;
            f = fnew;
            g = model.change_and_gradient(&z).1;
            if moved <= 1e-14 {
                break;
            }
        }
        if f < best.0 || (f == best.0 && lexicographic_less(&z, &best.1)) {
            best = (f, z);
        }
    }
    PhiResult {
        phi: (-best.0).max(0.0),
        step: best.1,
    }
}

/// The measures of orders `1..=q` at one point and radius.
#[derive(Debug, Clone, PartialEq)]
pub struct CriticalityReport {
    pub x: Vec<f64>,
    pub delta: f64,
    /// `phi[j - 1]` is the measure of order `j`.
    pub phi: Vec<f64>,
    /// `steps[j - 1]` attains `phi[j - 1]`.
    pub steps: Vec<Vec<f64>>,
    /// Whether every value was confirmed by [`phi_bruteforce`].
    pub oracle_verified: bool,
}

/// Evaluates the measure for the truncations of `model` of degrees
/// `1..=q` at `x` over the set `set` (not shifted).
pub fn criticality_report(
    model: &TaylorModel,
    x: &[f64],
    set: &ConvexSet,
    delta: f64,
    q: usize,
    opts: &PhiOptions,
) -> Result<CriticalityReport> {
    if q == 0 || q > model.degree() {
        return arg_err("report order must lie between 1 and the model degree");
    }
    let shifted = set.shifted(x);
    let mut phis = Vec::with_capacity(q);
    let mut steps = Vec::with_capacity(q);
    for j in 1..=q {
        let r = phi(&model.truncated(j), &shifted, delta, opts)?;
        phis.push(r.phi);
        steps.push(r.step);
    }
    Ok(CriticalityReport {
        x: x.to_vec(),
        delta,
        phi: phis,
        steps,
        oracle_verified: false,
    })
}

/// Confirms every value of `report` against [`phi_bruteforce`] within
/// `1e-6 max(1, phi)` and sets the flag accordingly.
pub fn verify_report(report: &mut CriticalityReport, model: &TaylorModel, set: &ConvexSet) -> Result<bool> {
    let shifted = set.shifted(&report.x);
    let mut ok = true;
    for (j, &p) in report.phi.iter().enumerate() {
        let reference = phi_bruteforce(&model.truncated(j + 1), &shifted, report.delta, 17)?;
        ok &= (reference - p).abs() <= 1e-6 * p.max(1.0);
    }
    report.oracle_verified = ok;
    Ok(ok)
}

/// `phi_j <= eps delta^j` for every `j = 1..=q`.
pub fn is_critical(report: &CriticalityReport, eps: f64, q: usize) -> bool {
    report.phi.len() >= q
        && report.phi[..q]
            .iter()
            .enumerate()
            .all(|(j, &p)| p <= eps * report.delta.powi(j as i32 + 1))
}

/// `|F(x)| <= eps_p`, or `phi_j <= eps_d delta^j |F(x)|` for every
/// `j = 1..=q`.
pub fn is_ls_critical(report: &CriticalityReport, residual_norm: f64, eps_p: f64, eps_d: f64, q: usize) -> bool {
    residual_norm <= eps_p || is_critical(report, eps_d * residual_norm, q)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn model_1d(value: f64, derivs: &[f64]) -> TaylorModel {
        let tensors = derivs
            .iter()
            .enumerate()
            .map(|(k, &v)| SymmetricTensor::new(k + 1, 1, vec![v; 1]).unwrap())
            .collect();
        TaylorModel::new(1, value, tensors).unwrap()
    }

    #[test]
    fn half_square_examples() {
        let opts = PhiOptions::default();
        let all = ConvexSet::all(1);
        let lin = phi(&model_1d(0.5, &[1.0]), &all, 1.0, &opts).unwrap();
        assert!((lin.phi - 1.0).abs() < 1e-15 && (lin.step[0] + 1.0).abs() < 1e-15);
        let quad = phi(&model_1d(0.5, &[1.0, 1.0]), &all, 1.0, &opts).unwrap();
        assert!((quad.phi - 0.5).abs() < 1e-12 && (quad.step[0] + 1.0).abs() < 1e-12);
        assert!((phi_bruteforce(&model_1d(0.5, &[1.0]), &all, 1.0, 17).unwrap() - 1.0).abs() < 1e-10);
        assert!((phi_bruteforce(&model_1d(0.5, &[1.0, 1.0]), &all, 1.0, 17).unwrap() - 0.5).abs() < 1e-10);
    }

    #[test]
    fn constant_model_has_zero_measure() {
        let m = model_1d(3.0, &[0.0, 0.0, 0.0]);
        let all = ConvexSet::all(1);
        assert_eq!(phi(&m, &all, 0.5, &PhiOptions::default()).unwrap().phi, 0.0);
        assert_eq!(phi_bruteforce(&m, &all, 0.5, 9).unwrap(), 0.0);
    }

    #[test]
    fn radius_is_validated() {
        let m = model_1d(0.0, &[1.0]);
        let all = ConvexSet::all(1);
        assert!(phi(&m, &all, 0.0, &PhiOptions::default()).is_err());
        assert!(phi(&m, &all, 1.5, &PhiOptions::default()).is_err());
    }

    #[test]
    fn bruteforce_rejects_large_dimension() {
        let m = TaylorModel::new(5, 0.0, vec![SymmetricTensor::zeros(1, 5).unwrap()]).unwrap();
        assert!(matches!(
            phi_bruteforce(&m, &ConvexSet::all(5), 1.0, 5),
            Err(Error::UnsupportedDimension { dim: 5, limit: 4 })
        ));
    }

    #[test]
    fn quartic_on_a_line() {
        // -x^4 / 2 on [-1, 1]: decrease 1/2 at the end points.
        let m = model_1d(1.0, &[0.0, 0.0, 0.0, -12.0]);
        let r = phi(&m, &ConvexSet::all(1), 1.0, &PhiOptions::default()).unwrap();
        assert!((r.phi - 0.5).abs() < 1e-12);
    }

    #[test]
    fn predicates() {
        let report = |phi: Vec<f64>, delta: f64| CriticalityReport {
            x: vec![0.0],
            delta,
            steps: vec![vec![0.0]; phi.len()],
            phi,
            oracle_verified: false,
        };
        assert!(is_critical(&report(vec![0.0, 0.0], 1.0), 1e-3, 2));
        assert!(!is_critical(&report(vec![2e-3], 1.0), 1e-3, 1));
        assert!(is_critical(&report(vec![1e-3 * 0.5], 0.5), 1e-3, 1));
        assert!(is_ls_critical(&report(vec![5.0], 1.0), 0.0, 1e-3, 0.1, 1));
        assert!(is_ls_critical(&report(vec![0.0], 1.0), 1.0, 1e-3, 0.1, 1));
        assert!(!is_ls_critical(&report(vec![0.5], 1.0), 1.0, 1e-3, 0.1, 1));
    }

    #[test]
    fn restricted_measure_on_a_line() {
        // 2-d model whose only decrease lies along e1.
        let t4 = SymmetricTensor::from_sorted_fn(4, 2, |i| if i == [0, 0, 0, 0] { -12.0 } else { 0.0 }).unwrap();
        let m = TaylorModel::new(
            2,
            0.0,
            vec![
                SymmetricTensor::from_vector(&[0.0, 1.0]).unwrap(),
                SymmetricTensor::zeros(2, 2).unwrap(),
                SymmetricTensor::zeros(3, 2).unwrap(),
                t4,
            ],
        )
        .unwrap();
        let opts = PhiOptions::default();
        let all = ConvexSet::all(2);
        let r = phi_hat(&m, &all, &[vec![1.0, 0.0]], 1.0, &opts).unwrap();
        assert!((r.phi - 0.5).abs() < 1e-12);
        assert_eq!(phi_hat(&m, &all, &[], 1.0, &opts).unwrap().phi, 0.0);
        let full = phi_hat(&m, &all, &[vec![1.0, 0.0], vec![0.0, 1.0]], 1.0, &opts).unwrap();
        let plain = phi(&m, &all, 1.0, &opts).unwrap();
        assert!((full.phi - plain.phi).abs() < 1e-9);
        let boxed = ConvexSet::new_box(vec![-0.5, -1.0], vec![1.0, 1.0]).unwrap();
        let r = phi_hat(&m, &boxed, &[vec![1.0, 0.0]], 1.0, &opts).unwrap();
        assert!((r.phi - 0.5).abs() < 1e-9);
    }
}
