//! Polynomial problems `min f(x) s.t. c(x) = 0, x in F`, their exact
//! derivative data and the merit functions built from them:
//!
//! * the infeasibility measure `nu(x) = 1/2 |c(x)|^2`,
//! * the target residual `r(x, t) = (c(x), f(x) - t)` and
//!   `mu(x, t) = 1/2 |r(x, t)|^2`,
//! * the Lagrangian `f(x) + y . c(x)`.

use alloc::format;
use alloc::string::ToString;
use alloc::vec;
use alloc::vec::Vec;

use crate::convex::ConvexSet;
use crate::criticality::TaylorModel;
use crate::error::{arg_err, Error, Result};
use crate::linalg::null_space;
use crate::poly::Polynomial;
use crate::tensor::{SymmetricTensor, MAX_ORDER};

/// Names accepted by [`catalogue`].
pub const CATALOGUE: [&str; 5] = ["saddle3d", "theprob", "circle_linear", "infeasible1d", "box_quadratic"];

#[derive(Debug, Clone, PartialEq)]
pub struct PolynomialProblem {
    objective: Polynomial,
    constraints: Vec<Polynomial>,
    set: ConvexSet,
    f_low: Option<f64>,
    start: Option<Vec<f64>>,
}

/// Values and exact derivative tensors of `f` and every `c_i` at one point.
#[derive(Debug, Clone, PartialEq)]
pub struct DerivativeBundle {
    pub x: Vec<f64>,
    pub f: f64,
    pub c: Vec<f64>,
    /// `df[k - 1]` is the k-th derivative of `f`.
    pub df: Vec<SymmetricTensor>,
    /// `dc[i][k - 1]` is the k-th derivative of `c_i`.
    pub dc: Vec<Vec<SymmetricTensor>>,
}

/// Access to the problem functions used by the solvers. Each call of
/// [`values`](ProblemOracle::values) counts as one function evaluation and
/// each call of [`bundle`](ProblemOracle::bundle) as one derivative
/// evaluation.
pub trait ProblemOracle {
    fn dim(&self) -> usize;
    fn num_constraints(&self) -> usize;
    fn feasible_set(&self) -> &ConvexSet;
    fn f_low(&self) -> Option<f64>;
    /// `(f(x), c(x))`
    fn values(&self, x: &[f64]) -> (f64, Vec<f64>);
    /// Values and derivative tensors of orders `1..=order`.
    fn bundle(&self, x: &[f64], order: usize) -> Result<DerivativeBundle>;
}

impl PolynomialProblem {
    pub fn new(
        objective: Polynomial,
        constraints: Vec<Polynomial>,
        set: ConvexSet,
        f_low: Option<f64>,
    ) -> Result<Self> {
        let n = objective.dim();
        if constraints.iter().any(|c| c.dim() != n) {
            return arg_err("constraint dimension differs from the objective");
        }
        set.validate()?;
        if set.dim() != n {
            return arg_err("feasible set dimension differs from the objective");
        }
        if matches!(f_low, Some(v) if !v.is_finite()) {
            return arg_err("f_low must be finite");
        }
        Ok(Self {
            objective,
            constraints,
            set,
            f_low,
            start: None,
        })
    }

    /// Attaches a suggested starting point.
    pub fn with_start(mut self, x0: Vec<f64>) -> Result<Self> {
        if x0.len() != self.dim() || x0.iter().any(|v| !v.is_finite()) {
            return arg_err("starting point must be finite and match the dimension");
        }
        self.start = Some(x0);
        Ok(self)
    }

    pub fn objective(&self) -> &Polynomial {
        &self.objective
    }

    pub fn constraints(&self) -> &[Polynomial] {
        &self.constraints
    }

    pub fn start(&self) -> Option<&[f64]> {
        self.start.as_deref()
    }

    /// `1/2 |c|^2 + 1/2 (f - t)^2` as a polynomial.
    pub fn mu_polynomial(&self, t: f64) -> Result<Polynomial> {
        let shifted = self.objective.add_constant(-t);
        let mut acc = shifted.mul(&shifted)?;
        for c in &self.constraints {
            acc = acc.axpy(1.0, &c.mul(c)?)?;
        }
        Ok(acc.scale(0.5))
    }

    /// `1/2 |c|^2` as a polynomial.
    pub fn nu_polynomial(&self) -> Result<Polynomial> {
        let mut acc = Polynomial::zero(self.dim());
        for c in &self.constraints {
            acc = acc.axpy(1.0, &c.mul(c)?)?;
        }
        Ok(acc.scale(0.5))
    }
}

impl ProblemOracle for PolynomialProblem {
    fn dim(&self) -> usize {
        self.objective.dim()
    }

    fn num_constraints(&self) -> usize {
        self.constraints.len()
    }

    fn feasible_set(&self) -> &ConvexSet {
        &self.set
    }

    fn f_low(&self) -> Option<f64> {
        self.f_low
    }

    fn values(&self, x: &[f64]) -> (f64, Vec<f64>) {
        (
            self.objective.eval(x),
            self.constraints.iter().map(|c| c.eval(x)).collect(),
        )
    }

    fn bundle(&self, x: &[f64], order: usize) -> Result<DerivativeBundle> {
        if order > MAX_ORDER {
            return Err(Error::UnsupportedOrder(order));
        }
        if x.len() != self.dim() {
            return arg_err("point dimension does not match the problem");
        }
        let tensors = |p: &Polynomial| -> Result<Vec<SymmetricTensor>> {
            (1..=order).map(|k| p.derivative_tensor(x, k)).collect()
        };
        let (f, c) = self.values(x);
        Ok(DerivativeBundle {
            x: x.to_vec(),
            f,
            c,
            df: tensors(&self.objective)?,
            dc: self.constraints.iter().map(tensors).collect::<Result<_>>()?,
        })
    }
}

/// Derivatives of `1/2 sum_i r_i^2` from the residual values and their
/// derivative tensors (`derivs[i][k - 1]` is the k-th derivative of `r_i`).
pub fn least_squares_model(
    dim: usize,
    residuals: &[f64],
    derivs: &[&[SymmetricTensor]],
    up_to: usize,
) -> Result<TaylorModel> {
    if up_to > MAX_ORDER {
        return Err(Error::UnsupportedOrder(up_to));
    }
    if derivs.iter().any(|d| d.len() < up_to) {
        return arg_err("residual derivatives of insufficient order");
    }
    let value = 0.5 * residuals.iter().map(|r| r * r).sum::<f64>();
    let mut tensors = Vec::with_capacity(up_to);
    for k in 1..=up_to {
        let mut acc = SymmetricTensor::zeros(k, dim)?;
        for (&r, g) in residuals.iter().zip(derivs) {
            acc = acc.axpy(r, &g[k - 1])?;
            match k {
                1 => {}
                2 => acc = acc.add(&g[0].sym_outer(&g[0])?)?,
                3 => acc = acc.axpy(3.0, &g[1].sym_outer(&g[0])?)?,
                _ => {
                    acc = acc.axpy(4.0, &g[2].sym_outer(&g[0])?)?;
                    acc = acc.axpy(3.0, &g[1].sym_outer(&g[1])?)?;
                }
            }
        }
        tensors.push(acc);
    }
    TaylorModel::new(dim, value, tensors)
}

impl DerivativeBundle {
    pub fn order(&self) -> usize {
        self.df.len()
    }

    pub fn dim(&self) -> usize {
        self.x.len()
    }

    fn check_order(&self, up_to: usize) -> Result<()> {
        if up_to > MAX_ORDER {
            return Err(Error::UnsupportedOrder(up_to));
        }
        if up_to > self.order() {
            return arg_err(format!(
                "derivatives of order {up_to} requested from a bundle of order {}",
                self.order()
            ));
        }
        Ok(())
    }

    /// Taylor data of `nu = 1/2 |c|^2`.
    pub fn nu_model(&self, up_to: usize) -> Result<TaylorModel> {
        self.check_order(up_to)?;
        let derivs: Vec<&[SymmetricTensor]> = self.dc.iter().map(|d| d.as_slice()).collect();
        least_squares_model(self.dim(), &self.c, &derivs, up_to)
    }

    /// Residual `r(x, t) = (c(x), f(x) - t)`.
    pub fn residual(&self, t: f64) -> Vec<f64> {
        let mut r = self.c.clone();
        r.push(self.f - t);
        r
    }

    /// Taylor data of `mu(., t) = 1/2 |r(., t)|^2`.
    pub fn mu_model(&self, t: f64, up_to: usize) -> Result<TaylorModel> {
        self.check_order(up_to)?;
        let mut derivs: Vec<&[SymmetricTensor]> = self.dc.iter().map(|d| d.as_slice()).collect();
        derivs.push(&self.df);
        least_squares_model(self.dim(), &self.residual(t), &derivs, up_to)
    }

    /// Taylor data of the Lagrangian `f + y . c`.
    pub fn lagrangian_model(&self, y: &[f64], up_to: usize) -> Result<TaylorModel> {
        self.check_order(up_to)?;
        if y.len() != self.c.len() {
            return arg_err("multiplier length must equal the number of constraints");
        }
        let value = self.f + y.iter().zip(&self.c).map(|(a, b)| a * b).sum::<f64>();
        let tensors = (0..up_to)
            .map(|k| {
                let mut acc = self.df[k].clone();
                for (yi, dci) in y.iter().zip(&self.dc) {
                    acc = acc.axpy(*yi, &dci[k])?;
                }
                Ok(acc)
            })
            .collect::<Result<Vec<_>>>()?;
        TaylorModel::new(self.dim(), value, tensors)
    }

    /// Rows of the stacked matrix `[grad c_1; ...; grad c_m; grad f]`.
    pub fn stacked_gradients(&self) -> Vec<Vec<f64>> {
        let mut rows: Vec<Vec<f64>> = self.dc.iter().map(|d| d[0].data().to_vec()).collect();
        rows.push(self.df[0].data().to_vec());
        rows
    }
}

/// `nu(x)` and its derivative tensors of orders `1..=up_to`.
pub fn nu_derivatives(prob: &impl ProblemOracle, x: &[f64], up_to: usize) -> Result<TaylorModel> {
    prob.bundle(x, up_to)?.nu_model(up_to)
}

/// `mu(x, t)`, the residual `r(x, t)` and the derivative tensors of `mu`.
pub fn mu_derivatives(prob: &impl ProblemOracle, x: &[f64], t: f64, up_to: usize) -> Result<(TaylorModel, Vec<f64>)> {
    let b = prob.bundle(x, up_to)?;
    Ok((b.mu_model(t, up_to)?, b.residual(t)))
}

/// The Lagrangian `f(x) + y . c(x)` and its derivative tensors.
pub fn lagrangian_derivatives(prob: &impl ProblemOracle, x: &[f64], y: &[f64], up_to: usize) -> Result<TaylorModel> {
    prob.bundle(x, up_to)?.lagrangian_model(y, up_to)
}

/// Orthonormal basis of `M(x)`, the common null space of the constraint
/// gradients and the objective gradient. `tol = None` uses a cutoff of
/// `1e-10` times the largest singular value.
pub fn m_subspace_basis(prob: &impl ProblemOracle, x: &[f64], tol: Option<f64>) -> Result<Vec<Vec<f64>>> {
    let b = prob.bundle(x, 1)?;
    Ok(null_space(&b.stacked_gradients(), prob.dim(), tol))
}

fn poly(dim: usize, terms: &[(&[u32], f64)]) -> Polynomial {
    Polynomial::new(dim, terms.iter().map(|(e, c)| (e.to_vec(), *c)).collect())
        .expect("catalogue polynomials are well formed")
}

/// Built-in example problems.
///
/// * `saddle3d`: `x1 + x2^2 + x2^3 - x3` subject to two quadratic
///   constraints; the origin is a high-order saddle point.
/// * `theprob`: `-x2 - x1^2 + x1 x2 - x1^4 / 2` subject to
///   `eps + x2 + x1^2 - x1 x2 = 0`, with `eps = param` in `(0, 1]`
///   (default 1).
/// * `circle_linear`: `x1 + x2` on the unit circle.
/// * `infeasible1d`: `x` subject to `x^2 + 1 = 0`.
/// * `box_quadratic`: `(x - 2)^2` on `[0, 1]` without equality constraints.
pub fn catalogue(name: &str, param: Option<f64>) -> Result<PolynomialProblem> {
    match name {
        "saddle3d" => PolynomialProblem::new(
            poly(
                3,
                &[
                    (&[1, 0, 0], 1.0),
                    (&[0, 2, 0], 1.0),
                    (&[0, 3, 0], 1.0),
                    (&[0, 0, 1], -1.0),
                ],
            ),
            vec![
                poly(
                    3,
                    &[
                        (&[1, 0, 0], -1.0),
                        (&[0, 2, 0], -1.0),
                        (&[1, 1, 0], 1.0),
                        (&[0, 0, 1], 1.0),
                    ],
                ),
                poly(
                    3,
                    &[
                        (&[1, 0, 0], 1.0),
                        (&[0, 2, 0], 1.0),
                        (&[1, 1, 0], 1.0),
                        (&[0, 0, 1], 1.0),
                    ],
                ),
            ],
            ConvexSet::all(3),
            None,
        ),
        "theprob" => {
            let eps = param.unwrap_or(1.0);
            if !(eps > 0.0 && eps <= 1.0) {
                return arg_err("theprob needs a parameter in (0, 1]");
            }
            PolynomialProblem::new(
                poly(2, &[(&[0, 1], -1.0), (&[2, 0], -1.0), (&[1, 1], 1.0), (&[4, 0], -0.5)]),
                vec![poly(
                    2,
                    &[(&[0, 0], eps), (&[0, 1], 1.0), (&[2, 0], 1.0), (&[1, 1], -1.0)],
                )],
                ConvexSet::all(2),
                None,
            )
        }
        "circle_linear" => PolynomialProblem::new(
            poly(2, &[(&[1, 0], 1.0), (&[0, 1], 1.0)]),
            vec![poly(2, &[(&[2, 0], 1.0), (&[0, 2], 1.0), (&[0, 0], -1.0)])],
            ConvexSet::all(2),
            Some(-2.0),
        )?
        .with_start(vec![2.0, 0.0]),
        "infeasible1d" => PolynomialProblem::new(
            poly(1, &[(&[1], 1.0)]),
            vec![poly(1, &[(&[2], 1.0), (&[0], 1.0)])],
            ConvexSet::all(1),
            None,
        )?
        .with_start(vec![1.0]),
        "box_quadratic" => PolynomialProblem::new(
            poly(1, &[(&[2], 1.0), (&[1], -4.0), (&[0], 4.0)]),
            Vec::new(),
            ConvexSet::new_box(vec![0.0], vec![1.0])?,
            Some(0.0),
        )?
        .with_start(vec![0.0]),
        other => Err(Error::NotFound(other.to_string())),
    }
}
