#![allow(dead_code)]

use hiord_core::convex::ConvexSet;
use hiord_core::criticality::TaylorModel;
use hiord_core::poly::Polynomial;
use hiord_core::problem::PolynomialProblem;
use hiord_core::tensor::SymmetricTensor;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

pub fn rng(seed: u64) -> StdRng {
    StdRng::seed_from_u64(seed)
}

pub fn random_vector(rng: &mut StdRng, n: usize, scale: f64) -> Vec<f64> {
    (0..n).map(|_| rng.gen_range(-scale..scale)).collect()
}

/// A polynomial in `dim` variables with up to `terms` monomials of total
/// degree at most `degree`.
pub fn random_polynomial(rng: &mut StdRng, dim: usize, degree: u32, terms: usize) -> Polynomial {
    let mut list = Vec::new();
    for _ in 0..terms {
        let total = rng.gen_range(0..=degree);
        let mut e = vec![0u32; dim];
        for _ in 0..total {
            e[rng.gen_range(0..dim)] += 1;
        }
        list.push((e, rng.gen_range(-2.0..2.0)));
    }
    Polynomial::new(dim, list).unwrap()
}

pub fn random_problem(rng: &mut StdRng, dim: usize, constraints: usize, degree: u32) -> PolynomialProblem {
    let f = random_polynomial(rng, dim, degree, 6);
    let c = (0..constraints)
        .map(|_| random_polynomial(rng, dim, degree, 5))
        .collect();
    PolynomialProblem::new(f, c, ConvexSet::all(dim), None).unwrap()
}

pub fn random_set(rng: &mut StdRng, dim: usize) -> ConvexSet {
    match rng.gen_range(0..3) {
        0 => ConvexSet::all(dim),
        1 => {
            let lo: Vec<f64> = (0..dim).map(|_| rng.gen_range(-1.5..-0.05)).collect();
            let hi: Vec<f64> = (0..dim).map(|_| rng.gen_range(0.05..1.5)).collect();
            ConvexSet::new_box(lo, hi).unwrap()
        }
        _ => {
            let center = random_vector(rng, dim, 0.5);
            let radius = hiord_core::linalg::norm(&center) + rng.gen_range(0.05..1.0);
            ConvexSet::ball(center, radius).unwrap()
        }
    }
}

/// A random Taylor model of the given degree.
pub fn random_model(rng: &mut StdRng, dim: usize, degree: usize) -> TaylorModel {
    let tensors = (1..=degree)
        .map(|k| {
            let len = dim.pow(k as u32);
            SymmetricTensor::new(k, dim, random_vector(rng, len, 1.0)).unwrap()
        })
        .collect();
    TaylorModel::new(dim, rng.gen_range(-1.0..1.0), tensors).unwrap()
}
