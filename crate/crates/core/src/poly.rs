//! Sparse multivariate polynomials with exact derivative tensors.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::vec::Vec;

use crate::error::{arg_err, Error, Result};
use crate::tensor::{SymmetricTensor, MAX_ORDER};

/// Highest total degree accepted in a problem description.
pub const MAX_DEGREE: u32 = 8;

/// One monomial `coef * x_1^e_1 * ... * x_n^e_n`.
#[derive(Debug, Clone, PartialEq)]
pub struct Term {
    pub exponents: Vec<u32>,
    pub coef: f64,
}

impl Term {
    pub fn degree(&self) -> u32 {
        self.exponents.iter().sum()
    }
}

/// A polynomial in `dim` variables. Exponent vectors are unique.
#[derive(Debug, Clone, PartialEq)]
pub struct Polynomial {
    dim: usize,
    terms: Vec<Term>,
}

fn ipow(x: f64, e: u32) -> f64 {
    let mut acc = 1.0;
    for _ in 0..e {
        acc *= x;
    }
    acc
}

fn falling(e: u32, k: u32) -> f64 {
    (0..k).map(|i| f64::from(e - i)).product()
}

impl Polynomial {
    /// Builds a polynomial from `(exponents, coefficient)` pairs. Repeated
    /// exponent vectors are merged into the first occurrence.
    pub fn new(dim: usize, terms: Vec<(Vec<u32>, f64)>) -> Result<Self> {
        if dim == 0 {
            return arg_err("polynomial needs at least one variable");
        }
        let mut merged: Vec<Term> = Vec::with_capacity(terms.len());
        for (exponents, coef) in terms {
            if exponents.len() != dim {
                return arg_err(format!(
                    "exponent vector has length {}, expected {dim}",
                    exponents.len()
                ));
            }
            if !coef.is_finite() {
                return arg_err("polynomial coefficients must be finite");
            }
            let degree: u32 = exponents.iter().sum();
            if degree > MAX_DEGREE {
                return arg_err(format!(
                    "term of degree {degree} exceeds the maximum degree {MAX_DEGREE}"
                ));
            }
            match merged.iter_mut().find(|t| t.exponents == exponents) {
                Some(t) => t.coef += coef,
                None => merged.push(Term { exponents, coef }),
            }
        }
        if merged.iter().any(|t| !t.coef.is_finite()) {
            return arg_err("merged polynomial coefficients overflow");
        }
        Ok(Self { dim, terms: merged })
    }

    pub fn zero(dim: usize) -> Self {
        Self { dim, terms: Vec::new() }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn terms(&self) -> &[Term] {
        &self.terms
    }

    pub fn degree(&self) -> u32 {
        self.terms.iter().map(Term::degree).max().unwrap_or(0)
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        debug_assert_eq!(x.len(), self.dim);
        self.terms
            .iter()
            .map(|t| t.coef * t.exponents.iter().zip(x).map(|(&e, &xi)| ipow(xi, e)).product::<f64>())
            .sum()
    }

    /// Exact `k`-th derivative tensor at `x`, `1 <= k <= 4`.
    pub fn derivative_tensor(&self, x: &[f64], k: usize) -> Result<SymmetricTensor> {
        if k == 0 || k > MAX_ORDER {
            return Err(Error::UnsupportedOrder(k));
        }
        if x.len() != self.dim {
            return arg_err("point dimension does not match the polynomial");
        }
        let mut counts = Vec::with_capacity(self.dim);
        SymmetricTensor::from_sorted_fn(k, self.dim, |idx| {
            counts.clear();
            counts.resize(self.dim, 0u32);
            for &i in idx {
                counts[i] += 1;
            }
            self.terms
                .iter()
                .filter(|t| t.exponents.iter().zip(&counts).all(|(e, a)| e >= a))
                .map(|t| {
                    let mut v = t.coef;
                    for ((&e, &a), &xi) in t.exponents.iter().zip(&counts).zip(x) {
                        v *= falling(e, a) * ipow(xi, e - a);
                    }
                    v
                })
                .sum()
        })
    }

    fn from_map(dim: usize, map: BTreeMap<Vec<u32>, f64>) -> Self {
        Self {
            dim,
            terms: map
                .into_iter()
                .map(|(exponents, coef)| Term { exponents, coef })
                .collect(),
        }
    }

    fn check_dim(&self, other: &Polynomial) -> Result<()> {
        if self.dim != other.dim {
            return arg_err("polynomials have different numbers of variables");
        }
        Ok(())
    }

    /// `self + s * other`
    pub fn axpy(&self, s: f64, other: &Polynomial) -> Result<Polynomial> {
        self.check_dim(other)?;
        let mut map = BTreeMap::new();
        for t in &self.terms {
            *map.entry(t.exponents.clone()).or_insert(0.0) += t.coef;
        }
        for t in &other.terms {
            *map.entry(t.exponents.clone()).or_insert(0.0) += s * t.coef;
        }
        Ok(Self::from_map(self.dim, map))
    }

    pub fn add_constant(&self, c: f64) -> Polynomial {
        let mut map = BTreeMap::new();
        for t in &self.terms {
            *map.entry(t.exponents.clone()).or_insert(0.0) += t.coef;
        }
        *map.entry(alloc::vec![0; self.dim]).or_insert(0.0) += c;
        Self::from_map(self.dim, map)
    }

    pub fn scale(&self, s: f64) -> Polynomial {
        Self {
            dim: self.dim,
            terms: self
                .terms
                .iter()
                .map(|t| Term {
                    exponents: t.exponents.clone(),
                    coef: s * t.coef,
                })
                .collect(),
        }
    }

    pub fn mul(&self, other: &Polynomial) -> Result<Polynomial> {
        self.check_dim(other)?;
        if self.degree() + other.degree() > MAX_DEGREE {
            return arg_err("product exceeds the maximum degree");
        }
        let mut map = BTreeMap::new();
        for a in &self.terms {
            for b in &other.terms {
                let e: Vec<u32> = a.exponents.iter().zip(&b.exponents).map(|(x, y)| x + y).collect();
                *map.entry(e).or_insert(0.0) += a.coef * b.coef;
            }
        }
        Ok(Self::from_map(self.dim, map))
    }
}
