//! The simple convex sets `F` allowed in a problem (whole space, box,
//! Euclidean ball), their projections, cone tests at a point, and the
//! intersection of a shifted set with a trust-region ball.

use alloc::vec;
use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{arg_err, Result};
use crate::linalg::{dist, dot, norm, scale, sub};

/// Relative tolerance used to decide whether a bound is active at a point.
pub const ACTIVE_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq)]
pub enum ConvexSet {
    /// The whole space of the given dimension.
    All { dim: usize },
    /// `lo <= x <= hi`; bounds may be infinite.
    Box { lo: Vec<f64>, hi: Vec<f64> },
    /// `|x - center| <= radius`
    Ball { center: Vec<f64>, radius: f64 },
}

fn clip(v: f64, lo: f64, hi: f64) -> f64 {
    v.max(lo).min(hi)
}

fn near(a: f64, b: f64) -> bool {
    a.is_finite() && (a - b).abs() <= ACTIVE_TOL * (1.0 + b.abs())
}

impl ConvexSet {
    pub fn all(dim: usize) -> Self {
        ConvexSet::All { dim }
    }

    pub fn new_box(lo: Vec<f64>, hi: Vec<f64>) -> Result<Self> {
        let set = ConvexSet::Box { lo, hi };
        set.validate()?;
        Ok(set)
    }

    pub fn ball(center: Vec<f64>, radius: f64) -> Result<Self> {
        let set = ConvexSet::Ball { center, radius };
        set.validate()?;
        Ok(set)
    }

    /// Checks the structural invariants: consistent dimensions, `lo <= hi`
    /// without NaN or `lo = +inf` / `hi = -inf`, finite positive radius.
    pub fn validate(&self) -> Result<()> {
        match self {
            ConvexSet::All { dim } if *dim == 0 => arg_err("set dimension must be positive"),
            ConvexSet::All { .. } => Ok(()),
            ConvexSet::Box { lo, hi } => {
                if lo.is_empty() || lo.len() != hi.len() {
                    return arg_err("box bounds must be non-empty and of equal length");
                }
                for (&l, &h) in lo.iter().zip(hi) {
                    if l.is_nan() || h.is_nan() || !(l <= h) || l == f64::INFINITY || h == f64::NEG_INFINITY {
                        return arg_err("box bounds must satisfy lo <= hi");
                    }
                }
                Ok(())
            }
            ConvexSet::Ball { center, radius } => {
                if center.is_empty() || center.iter().any(|c| !c.is_finite()) {
                    return arg_err("ball center must be a finite non-empty vector");
                }
                if !(radius.is_finite() && *radius > 0.0) {
                    return arg_err("ball radius must be positive and finite");
                }
                Ok(())
            }
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            ConvexSet::All { dim } => *dim,
            ConvexSet::Box { lo, .. } => lo.len(),
            ConvexSet::Ball { center, .. } => center.len(),
        }
    }

    /// Euclidean projection onto the set.
    pub fn project(&self, x: &[f64]) -> Vec<f64> {
        match self {
            ConvexSet::All { .. } => x.to_vec(),
            ConvexSet::Box { lo, hi } => x
                .iter()
                .zip(lo.iter().zip(hi))
                .map(|(&v, (&l, &h))| clip(v, l, h))
                .collect(),
            ConvexSet::Ball { center, radius } => {
                let d = dist(x, center);
                if d <= *radius {
                    x.to_vec()
                } else {
                    let s = radius / d;
                    center.iter().zip(x).map(|(c, v)| c + s * (v - c)).collect()
                }
            }
        }
    }

    /// Whether the distance from `x` to the set is at most `tol`.
    pub fn member(&self, x: &[f64], tol: f64) -> bool {
        match self {
            ConvexSet::All { .. } => true,
            ConvexSet::Box { .. } => dist(x, &self.project(x)) <= tol,
            ConvexSet::Ball { center, radius } => dist(x, center) - radius <= tol,
        }
    }

    /// The set `F(x) = { d : x + d in F }`.
    pub fn shifted(&self, x: &[f64]) -> ConvexSet {
        match self {
            ConvexSet::All { dim } => ConvexSet::All { dim: *dim },
            ConvexSet::Box { lo, hi } => ConvexSet::Box {
                lo: lo.iter().zip(x).map(|(l, v)| l - v).collect(),
                hi: hi.iter().zip(x).map(|(h, v)| h - v).collect(),
            },
            ConvexSet::Ball { center, radius } => ConvexSet::Ball {
                center: sub(center, x),
                radius: *radius,
            },
        }
    }

    fn check_point(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.dim() {
            return arg_err("point dimension does not match the set");
        }
        let tol = ACTIVE_TOL * (1.0 + norm(x));
        if !self.member(x, tol) {
            return arg_err("point does not belong to the set");
        }
        Ok(())
    }

    /// Splits `y` into its projections onto the tangent and normal cones of
    /// the set at `x`. The two parts are orthogonal and sum to `y`.
    pub fn moreau_decompose(&self, x: &[f64], y: &[f64]) -> Result<(Vec<f64>, Vec<f64>)> {
        self.check_point(x)?;
        if y.len() != x.len() {
            return arg_err("vector dimension does not match the set");
        }
        match self {
            ConvexSet::All { .. } => Ok((y.to_vec(), vec![0.0; y.len()])),
            ConvexSet::Box { lo, hi } => {
                let mut t = y.to_vec();
                for i in 0..y.len() {
                    let at_lo = near(lo[i], x[i]);
                    let at_hi = near(hi[i], x[i]);
                    t[i] = match (at_lo, at_hi) {
                        (true, true) => 0.0,
                        (true, false) => y[i].max(0.0),
                        (false, true) => y[i].min(0.0),
                        (false, false) => y[i],
                    };
                }
                let n = sub(y, &t);
                Ok((t, n))
            }
            ConvexSet::Ball { center, radius } => match self.outward_normal(center, *radius, x) {
                None => Ok((y.to_vec(), vec![0.0; y.len()])),
                Some(u) => {
                    let a = dot(y, &u).max(0.0);
                    let n = scale(&u, a);
                    Ok((sub(y, &n), n))
                }
            },
        }
    }

    fn outward_normal(&self, center: &[f64], radius: f64, x: &[f64]) -> Option<Vec<f64>> {
        let d = dist(x, center);
        near(d, radius).then(|| sub(x, center).iter().map(|v| v / d).collect())
    }

    /// Whether `v` lies in the normal cone of the set at `x`, allowing an
    /// absolute slack `tol` per generator.
    pub fn normal_cone_member(&self, x: &[f64], v: &[f64], tol: f64) -> Result<bool> {
        self.check_point(x)?;
        if v.len() != x.len() {
            return arg_err("vector dimension does not match the set");
        }
        Ok(match self {
            ConvexSet::All { .. } => v.iter().all(|c| c.abs() <= tol),
            ConvexSet::Box { lo, hi } => (0..v.len()).all(|i| match (near(lo[i], x[i]), near(hi[i], x[i])) {
                (true, true) => true,
                (true, false) => v[i] <= tol,
                (false, true) => v[i] >= -tol,
                (false, false) => v[i].abs() <= tol,
            }),
            ConvexSet::Ball { center, radius } => match self.outward_normal(center, *radius, x) {
                None => norm(v) <= tol,
                Some(u) => {
                    let a = dot(v, &u);
                    a >= -tol && norm(&sub(v, &scale(&u, a))) <= tol
                }
            },
        })
    }
}

/// The set `F(x) ∩ { d : |d| <= radius }` of admissible displacements, for a
/// shifted set that contains the origin.
#[derive(Debug, Clone, Copy)]
pub struct StepRegion<'a> {
    pub set: &'a ConvexSet,
    pub radius: f64,
}

impl<'a> StepRegion<'a> {
    pub fn new(set: &'a ConvexSet, radius: f64) -> Self {
        StepRegion { set, radius }
    }

    pub fn dim(&self) -> usize {
        self.set.dim()
    }

    pub fn contains(&self, d: &[f64], tol: f64) -> bool {
        norm(d) <= self.radius * (1.0 + tol) && self.set.member(d, tol)
    }

    /// Euclidean projection onto the region.
    pub fn project(&self, z: &[f64]) -> Vec<f64> {
        let delta = self.radius;
        match self.set {
            ConvexSet::All { .. } => onto_ball(z, delta),
            ConvexSet::Box { lo, hi } => {
                let at = |s: f64| -> Vec<f64> {
                    z.iter()
                        .zip(lo.iter().zip(hi))
                        .map(|(&v, (&l, &h))| clip(s * v, l, h))
                        .collect()
                };
                let full = at(1.0);
                if norm(&full) <= delta {
                    return full;
                }
                // The projection is clip(z / (1 + lambda)); bisect on the
                // scaling factor s = 1 / (1 + lambda).
                let (mut a, mut b) = (0.0, 1.0);
                for _ in 0..200 {
                    let m = 0.5 * (a + b);
                    if m <= a || m >= b {
                        break;
                    }
                    if norm(&at(m)) <= delta {
                        a = m;
                    } else {
                        b = m;
                    }
                }
                onto_ball(&at(a), delta)
            }
            ConvexSet::Ball { center, radius } => {
                let r = *radius;
                let in_region = |d: &[f64]| norm(d) <= delta * (1.0 + 1e-12) && dist(d, center) <= r * (1.0 + 1e-12);
                if in_region(z) {
                    return z.to_vec();
                }
                let p1 = onto_ball(z, delta);
                if in_region(&p1) {
                    return p1;
                }
                let p2 = self.set.project(z);
                if in_region(&p2) {
                    return p2;
                }
                match sphere_circle(center, r, delta) {
                    Some((h, rho, u)) => {
                        let w = sub(z, &scale(&u, dot(z, &u)));
                        let dir = unit_or_orthogonal(&w, &u);
                        u.iter().zip(&dir).map(|(a, b)| h * a + rho * b).collect()
                    }
                    None => {
                        if norm(&p1) <= norm(&p2) {
                            p1
                        } else {
                            p2
                        }
                    }
                }
            }
        }
    }

    /// A minimizer of `g . d` over the region, computed in closed form.
    pub fn linear_minimizer(&self, g: &[f64]) -> Vec<f64> {
        let n = g.len();
        let delta = self.radius;
        let gn = norm(g);
        if gn == 0.0 {
            return vec![0.0; n];
        }
        match self.set {
            ConvexSet::All { .. } => scale(g, -delta / gn),
            ConvexSet::Box { lo, hi } => {
                let at = |s: f64| -> Vec<f64> {
                    g.iter()
                        .zip(lo.iter().zip(hi))
                        .map(|(&v, (&l, &h))| clip(-s * v, l, h))
                        .collect()
                };
                let vertex: Vec<f64> = g
                    .iter()
                    .zip(lo.iter().zip(hi))
                    .map(|(&v, (&l, &h))| {
                        if v > 0.0 {
                            l
                        } else if v < 0.0 {
                            h
                        } else {
                            0.0
                        }
                    })
                    .collect();
                if vertex.iter().all(|v| v.is_finite()) && norm(&vertex) <= delta {
                    return vertex;
                }
                let mut b = delta / gn;
                while norm(&at(b)) < delta {
                    b *= 2.0;
                }
                let mut a = 0.0;
                for _ in 0..200 {
                    let m = 0.5 * (a + b);
                    if m <= a || m >= b {
                        break;
                    }
                    if norm(&at(m)) <= delta {
                        a = m;
                    } else {
                        b = m;
                    }
                }
                onto_ball(&at(a), delta)
            }
            ConvexSet::Ball { center, radius } => {
                let r = *radius;
                let mut candidates: Vec<Vec<f64>> = Vec::with_capacity(3);
                let d1 = scale(g, -delta / gn);
                if dist(&d1, center) <= r * (1.0 + 1e-12) {
                    candidates.push(d1);
                }
                let d2: Vec<f64> = center.iter().zip(g).map(|(c, v)| c - r * v / gn).collect();
                if norm(&d2) <= delta * (1.0 + 1e-12) {
                    candidates.push(d2);
                }
                if let Some((h, rho, u)) = sphere_circle(center, r, delta) {
                    let w = sub(g, &scale(&u, dot(g, &u)));
                    let dir = unit_or_orthogonal(&w, &u);
                    candidates.push(u.iter().zip(&dir).map(|(a, b)| h * a - rho * b).collect());
                }
                candidates
                    .into_iter()
                    .map(|d| self.project(&d))
                    .min_by(|a, b| dot(g, a).total_cmp(&dot(g, b)))
                    .unwrap_or_else(|| vec![0.0; n])
            }
        }
    }
}

fn onto_ball(z: &[f64], radius: f64) -> Vec<f64> {
    let nz = norm(z);
    if nz <= radius {
        z.to_vec()
    } else {
        scale(z, radius / nz)
    }
}

/// Intersection circle of the spheres `|d| = delta` and `|d - c| = r`:
/// returns `(h, rho, u)` with the circle `h u + rho w`, `w` a unit vector
/// orthogonal to `u = c / |c|`.
fn sphere_circle(center: &[f64], r: f64, delta: f64) -> Option<(f64, f64, Vec<f64>)> {
    let a = norm(center);
    if a == 0.0 {
        return None;
    }
    let u = scale(center, 1.0 / a);
    let h = (delta * delta - r * r + a * a) / (2.0 * a);
    let rho2 = delta * delta - h * h;
    (rho2 > 0.0).then(|| (h, rho2.sqrt(), u))
}

/// `w / |w|`, or a fixed unit vector orthogonal to `u` when `w` vanishes.
fn unit_or_orthogonal(w: &[f64], u: &[f64]) -> Vec<f64> {
    let nw = norm(w);
    if nw > 1e-14 * (1.0 + norm(u)) {
        return scale(w, 1.0 / nw);
    }
    for i in 0..u.len() {
        let mut e = vec![0.0; u.len()];
        e[i] = 1.0;
        let p = sub(&e, &scale(u, u[i]));
        let np = norm(&p);
        if np > 1e-8 {
            return scale(&p, 1.0 / np);
        }
    }
    vec![0.0; u.len()]
}
