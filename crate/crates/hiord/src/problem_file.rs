//! JSON problem files.
//!
//! ```json
//! {
//!   "n": 2,
//!   "f": [{"exp": [1, 0], "coef": 1.0}, {"exp": [0, 1], "coef": 1.0}],
//!   "c": [[{"exp": [2, 0], "coef": 1.0}, {"exp": [0, 2], "coef": 1.0}, {"exp": [0, 0], "coef": -1.0}]],
//!   "set": {"type": "all"},
//!   "f_low": -2.0,
//!   "x0": [2.0, 0.0]
//! }
//! ```
//!
//! Box bounds use `null` for infinite entries. `x0` is optional.

use std::fs;
use std::path::Path;

use hiord_core::convex::ConvexSet;
use hiord_core::poly::Polynomial;
use hiord_core::problem::{catalogue, PolynomialProblem};
use serde::{Deserialize, Serialize};

use crate::error::{HarnessError, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TermSpec {
    pub exp: Vec<u32>,
    pub coef: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SetKind {
    All,
    Box,
    Ball,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SetSpec {
    #[serde(rename = "type")]
    pub kind: SetKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lo: Option<Vec<Option<f64>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub hi: Option<Vec<Option<f64>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub center: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub radius: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemSpec {
    pub n: usize,
    pub f: Vec<TermSpec>,
    #[serde(default)]
    pub c: Vec<Vec<TermSpec>>,
    pub set: SetSpec,
    #[serde(default)]
    pub f_low: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub x0: Option<Vec<f64>>,
}

fn polynomial(n: usize, terms: &[TermSpec]) -> Result<Polynomial> {
    let pairs = terms.iter().map(|t| (t.exp.clone(), t.coef)).collect();
    Polynomial::new(n, pairs).map_err(|e| HarnessError::input(e.to_string()))
}

fn terms(p: &Polynomial) -> Vec<TermSpec> {
    p.terms()
        .iter()
        .map(|t| TermSpec {
            exp: t.exponents.clone(),
            coef: t.coef,
        })
        .collect()
}

fn bounds(values: Option<&Vec<Option<f64>>>, n: usize, missing: f64, name: &str) -> Result<Vec<f64>> {
    match values {
        None => Ok(vec![missing; n]),
        Some(v) if v.len() != n => Err(HarnessError::input(format!("set.{name} must have {n} entries"))),
        Some(v) => Ok(v.iter().map(|b| b.unwrap_or(missing)).collect()),
    }
}

fn finite_or_null(v: &[f64]) -> Vec<Option<f64>> {
    v.iter().map(|b| b.is_finite().then_some(*b)).collect()
}

impl SetSpec {
    fn to_set(&self, n: usize) -> Result<ConvexSet> {
        let set = match self.kind {
            SetKind::All => Ok(ConvexSet::all(n)),
            SetKind::Box => {
                let lo = bounds(self.lo.as_ref(), n, f64::NEG_INFINITY, "lo")?;
                let hi = bounds(self.hi.as_ref(), n, f64::INFINITY, "hi")?;
                ConvexSet::new_box(lo, hi)
            }
            SetKind::Ball => {
                let center = self.center.clone().unwrap_or_else(|| vec![0.0; n]);
                let radius = self.radius.ok_or_else(|| HarnessError::input("ball needs a radius"))?;
                ConvexSet::ball(center, radius)
            }
        };
        let set = set.map_err(|e| HarnessError::input(e.to_string()))?;
        if set.dim() != n {
            return Err(HarnessError::input(format!("set dimension differs from n = {n}")));
        }
        Ok(set)
    }

    fn from_set(set: &ConvexSet) -> Self {
        let empty = SetSpec {
            kind: SetKind::All,
            lo: None,
            hi: None,
            center: None,
            radius: None,
        };
        match set {
            ConvexSet::All { .. } => empty,
            ConvexSet::Box { lo, hi } => SetSpec {
                kind: SetKind::Box,
                lo: Some(finite_or_null(lo)),
                hi: Some(finite_or_null(hi)),
                ..empty
            },
            ConvexSet::Ball { center, radius } => SetSpec {
                kind: SetKind::Ball,
                center: Some(center.clone()),
                radius: Some(*radius),
                ..empty
            },
        }
    }
}

impl ProblemSpec {
    pub fn to_problem(&self) -> Result<PolynomialProblem> {
        let n = self.n;
        if n == 0 {
            return Err(HarnessError::input("n must be positive"));
        }
        let objective = polynomial(n, &self.f)?;
        let constraints = self.c.iter().map(|c| polynomial(n, c)).collect::<Result<Vec<_>>>()?;
        let set = self.set.to_set(n)?;
        let mut prob = PolynomialProblem::new(objective, constraints, set, self.f_low)
            .map_err(|e| HarnessError::input(e.to_string()))?;
        if let Some(x0) = &self.x0 {
            prob = prob
                .with_start(x0.clone())
                .map_err(|e| HarnessError::input(e.to_string()))?;
        }
        Ok(prob)
    }

    pub fn from_problem(prob: &PolynomialProblem) -> Self {
        use hiord_core::problem::ProblemOracle;
        ProblemSpec {
            n: prob.dim(),
            f: terms(prob.objective()),
            c: prob.constraints().iter().map(terms).collect(),
            set: SetSpec::from_set(prob.feasible_set()),
            f_low: prob.f_low(),
            x0: prob.start().map(<[f64]>::to_vec),
        }
    }
}

pub fn parse_problem(text: &str) -> Result<PolynomialProblem> {
    let spec: ProblemSpec = serde_json::from_str(text)?;
    spec.to_problem()
}

pub fn problem_to_json(prob: &PolynomialProblem) -> String {
    serde_json::to_string_pretty(&ProblemSpec::from_problem(prob)).expect("problem specs always serialize")
}

/// Loads a problem from a JSON file, or from the built-in catalogue when
/// `source` has the form `catalogue:NAME` or `catalogue:NAME:PARAM`.
pub fn load_problem(source: &str) -> Result<PolynomialProblem> {
    if let Some(rest) = source.strip_prefix("catalogue:") {
        let (name, param) = match rest.split_once(':') {
            Some((name, p)) => {
                let v = p
                    .parse::<f64>()
                    .map_err(|_| HarnessError::input(format!("bad catalogue parameter {p:?}")))?;
                (name, Some(v))
            }
            None => (rest, None),
        };
        return catalogue(name, param).map_err(|e| HarnessError::input(e.to_string()));
    }
    let text = fs::read_to_string(Path::new(source)).map_err(|source_err| HarnessError::Io {
        path: source.into(),
        source: source_err,
    })?;
    parse_problem(&text)
}
