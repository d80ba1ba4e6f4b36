//! Dense symmetric tensors of order 1 to 4.
//!
//! A tensor of order `k` over `R^n` is stored as all `n^k` entries in
//! row-major order, so every permutation of an index tuple is present and
//! holds the same value. Constructors symmetrize their input, which keeps
//! that invariant for every value of the type.

use alloc::vec;
use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{arg_err, Error, Result};
use crate::linalg::{dot, norm, symmetric_eigen};
use crate::seeds::sobol_points;

/// Highest tensor order handled anywhere in the crate.
pub const MAX_ORDER: usize = 4;

#[derive(Debug, Clone, PartialEq)]
pub struct SymmetricTensor {
    order: usize,
    dim: usize,
    data: Vec<f64>,
}

fn check_order(order: usize) -> Result<()> {
    if order == 0 || order > MAX_ORDER {
        Err(Error::UnsupportedOrder(order))
    } else {
        Ok(())
    }
}

fn decode(mut flat: usize, dim: usize, out: &mut [usize]) {
    for slot in out.iter_mut().rev() {
        *slot = flat % dim;
        flat /= dim;
    }
}

fn encode(idx: &[usize], dim: usize) -> usize {
    idx.iter().fold(0, |acc, &i| acc * dim + i)
}

/// Flat index of the sorted permutation of the tuple at `flat`.
fn canonical(flat: usize, order: usize, dim: usize) -> usize {
    let mut idx = [0usize; MAX_ORDER];
    decode(flat, dim, &mut idx[..order]);
    idx[..order].sort_unstable();
    encode(&idx[..order], dim)
}

impl SymmetricTensor {
    /// Symmetrized tensor built from `dim^order` row-major entries.
    pub fn new(order: usize, dim: usize, data: Vec<f64>) -> Result<Self> {
        check_order(order)?;
        if dim == 0 {
            return arg_err("tensor dimension must be positive");
        }
        if data.len() != dim.pow(order as u32) {
            return arg_err("tensor data length must be dim^order");
        }
        let len = data.len();
        let mut sums = vec![0.0; len];
        let mut counts = vec![0u32; len];
        for (flat, &x) in data.iter().enumerate() {
            let c = canonical(flat, order, dim);
            sums[c] += x;
            counts[c] += 1;
        }
        let data = (0..len)
            .map(|flat| {
                let c = canonical(flat, order, dim);
                sums[c] / f64::from(counts[c])
            })
            .collect();
        Ok(Self { order, dim, data })
    }

    /// Tensor whose entry at every index tuple is `f` evaluated at the sorted
    /// tuple.
    pub fn from_sorted_fn(order: usize, dim: usize, mut f: impl FnMut(&[usize]) -> f64) -> Result<Self> {
        check_order(order)?;
        if dim == 0 {
            return arg_err("tensor dimension must be positive");
        }
        let len = dim.pow(order as u32);
        let mut data = vec![0.0; len];
        let mut idx = [0usize; MAX_ORDER];
        for (flat, slot) in data.iter_mut().enumerate() {
            decode(flat, dim, &mut idx[..order]);
            if idx[..order].windows(2).all(|w| w[0] <= w[1]) {
                *slot = f(&idx[..order]);
            }
        }
        for flat in 0..len {
            let c = canonical(flat, order, dim);
            if c != flat {
                data[flat] = data[c];
            }
        }
        Ok(Self { order, dim, data })
    }

    pub fn zeros(order: usize, dim: usize) -> Result<Self> {
        check_order(order)?;
        if dim == 0 {
            return arg_err("tensor dimension must be positive");
        }
        Ok(Self {
            order,
            dim,
            data: vec![0.0; dim.pow(order as u32)],
        })
    }

    /// Order-1 tensor holding the vector `v`.
    pub fn from_vector(v: &[f64]) -> Result<Self> {
        Self::new(1, v.len(), v.to_vec())
    }

    /// Order-2 tensor from a square row-major matrix (symmetrized).
    pub fn from_matrix(dim: usize, m: &[f64]) -> Result<Self> {
        Self::new(2, dim, m.to_vec())
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// All `dim^order` entries in row-major order.
    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn entry(&self, idx: &[usize]) -> f64 {
        assert_eq!(idx.len(), self.order, "index tuple has the wrong length");
        self.data[encode(idx, self.dim)]
    }

    /// Multilinear evaluation `T[v1, ..., vk]`.
    pub fn apply(&self, args: &[&[f64]]) -> Result<f64> {
        if args.len() != self.order {
            return arg_err("number of arguments must equal the tensor order");
        }
        if args.iter().any(|a| a.len() != self.dim) {
            return arg_err("argument dimension does not match the tensor");
        }
        let mut w = self.data.clone();
        for arg in args.iter().rev() {
            w = contract_last(&w, arg);
        }
        Ok(w[0])
    }

    /// `T[v]^k` together with the vector `T[v]^(k-1)`, whose inner product
    /// with any `u` is `T[v, ..., v, u]`.
    pub fn power_and_gradient(&self, v: &[f64]) -> (f64, Vec<f64>) {
        debug_assert_eq!(v.len(), self.dim);
        let mut w = self.data.clone();
        for _ in 1..self.order {
            w = contract_last(&w, v);
        }
        (dot(&w, v), w)
    }

    /// `T[v]^k`
    pub fn apply_same(&self, v: &[f64]) -> f64 {
        self.power_and_gradient(v).0
    }

    /// Tensor of order `k - 1` obtained by fixing the last argument to `v`;
    /// `None` for order-1 tensors.
    pub fn contract(&self, v: &[f64]) -> Option<SymmetricTensor> {
        (self.order > 1).then(|| SymmetricTensor {
            order: self.order - 1,
            dim: self.dim,
            data: contract_last(&self.data, v),
        })
    }

    pub fn scale(&self, s: f64) -> SymmetricTensor {
        SymmetricTensor {
            order: self.order,
            dim: self.dim,
            data: self.data.iter().map(|x| s * x).collect(),
        }
    }

    pub fn add(&self, other: &SymmetricTensor) -> Result<SymmetricTensor> {
        self.axpy(1.0, other)
    }

    /// `self + s * other`
    pub fn axpy(&self, s: f64, other: &SymmetricTensor) -> Result<SymmetricTensor> {
        if self.order != other.order || self.dim != other.dim {
            return arg_err("tensor shapes differ");
        }
        Ok(SymmetricTensor {
            order: self.order,
            dim: self.dim,
            data: self.data.iter().zip(&other.data).map(|(a, b)| a + s * b).collect(),
        })
    }

    /// Symmetrized outer product; its value on `[v]^(a+b)` is
    /// `A[v]^a * B[v]^b`.
    pub fn sym_outer(&self, other: &SymmetricTensor) -> Result<SymmetricTensor> {
        if self.dim != other.dim {
            return arg_err("tensor dimensions differ");
        }
        let order = self.order + other.order;
        check_order(order)?;
        let mut data = Vec::with_capacity(self.data.len() * other.data.len());
        for &a in &self.data {
            for &b in &other.data {
                data.push(a * b);
            }
        }
        SymmetricTensor::new(order, self.dim, data)
    }

    pub fn frobenius_norm(&self) -> f64 {
        norm(&self.data)
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, x| m.max(x.abs()))
    }

    /// Induced norm `max_{|v| = 1} |T[v]^k|`.
    ///
    /// Exact for orders 1 and 2. For orders 3 and 4 the maximum is searched
    /// with the shifted symmetric higher-order power method from `2n + 32`
    /// deterministic starting points, maximizing both `T` and `-T`.
    pub fn induced_norm(&self) -> f64 {
        match self.order {
            1 => norm(&self.data),
            2 => {
                let e = symmetric_eigen(&self.data, self.dim);
                e.values.iter().fold(0.0, |m, x| m.max(x.abs()))
            }
            _ => {
                let n = self.dim;
                let mut starts: Vec<Vec<f64>> = Vec::with_capacity(2 * n + 32);
                for i in 0..n {
                    for s in [1.0, -1.0] {
                        let mut e = vec![0.0; n];
                        e[i] = s;
                        starts.push(e);
                    }
                }
                for p in sobol_points(n, 32, 0x7e45_0a11) {
                    let v: Vec<f64> = p.iter().map(|u| 2.0 * u - 1.0).collect();
                    if norm(&v) > 0.0 {
                        starts.push(v);
                    }
                }
                let neg = self.scale(-1.0);
                let mut best: f64 = 0.0;
                for tensor in [self, &neg] {
                    for v0 in &starts {
                        best = best.max(tensor.power_method(v0));
                    }
                }
                best
            }
        }
    }

    /// Shifted power iteration for a local maximizer of `T[v]^k` on the
    /// unit sphere; returns the value reached.
    fn power_method(&self, v0: &[f64]) -> f64 {
        let k = self.order as f64;
        let shift = (k - 1.0) * self.frobenius_norm();
        if shift == 0.0 {
            return 0.0;
        }
        let mut v: Vec<f64> = {
            let s = norm(v0);
            v0.iter().map(|x| x / s).collect()
        };
        let (mut value, mut grad) = self.power_and_gradient(&v);
        for _ in 0..20_000 {
            let w: Vec<f64> = grad.iter().zip(&v).map(|(g, x)| g + shift * x).collect();
            let s = norm(&w);
            if s == 0.0 {
                break;
            }
            v = w.iter().map(|x| x / s).collect();
            let (next, g) = self.power_and_gradient(&v);
            grad = g;
            let done = (next - value).abs() <= 1e-16 * shift;
            value = value.max(next);
            if done {
                break;
            }
        }
        value
    }

    /// Whether `v` lies in the q-kernel of `T` up to the relative tolerance
    /// `tol`: `|T[v]^k| <= tol * max(1, |T| |v|^k)`.
    pub fn q_kernel_member(&self, v: &[f64], tol: f64) -> bool {
        let value = self.apply_same(v);
        let scale = self.induced_norm() * norm(v).powi(self.order as i32);
        value.abs() <= tol * scale.max(1.0)
    }
}

/// Contracts the last axis of a flat row-major tensor with `v`.
fn contract_last(w: &[f64], v: &[f64]) -> Vec<f64> {
    let n = v.len();
    w.chunks_exact(n).map(|row| dot(row, v)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn tensor_strategy() -> impl Strategy<Value = SymmetricTensor> {
        (1usize..=4, 1usize..=3).prop_flat_map(|(k, n)| {
            proptest::collection::vec(-2.0f64..2.0, n.pow(k as u32))
                .prop_map(move |d| SymmetricTensor::new(k, n, d).unwrap())
        })
    }

    fn pair_strategy() -> impl Strategy<Value = (SymmetricTensor, SymmetricTensor)> {
        (1usize..=3, 1usize..=3, 1usize..=3).prop_flat_map(|(n, a, b)| {
            let b = b.min(4 - a).max(1);
            (
                proptest::collection::vec(-2.0f64..2.0, n.pow(a as u32)),
                proptest::collection::vec(-2.0f64..2.0, n.pow(b as u32)),
            )
                .prop_map(move |(x, y)| {
                    (
                        SymmetricTensor::new(a, n, x).unwrap(),
                        SymmetricTensor::new(b, n, y).unwrap(),
                    )
                })
        })
    }

    #[test]
    fn order_zero_and_five_rejected() {
        assert!(matches!(SymmetricTensor::zeros(5, 2), Err(Error::UnsupportedOrder(5))));
        assert!(matches!(SymmetricTensor::zeros(0, 2), Err(Error::UnsupportedOrder(0))));
    }

    #[test]
    fn new_symmetrizes() {
        let t = SymmetricTensor::new(2, 2, vec![1.0, 2.0, 0.0, 3.0]).unwrap();
        assert_eq!(t.entry(&[0, 1]), 1.0);
        assert_eq!(t.entry(&[1, 0]), 1.0);
    }

    #[test]
    fn apply_checks_arity_and_dimension() {
        let t = SymmetricTensor::zeros(2, 2).unwrap();
        let v = [1.0, 0.0];
        assert!(t.apply(&[&v]).is_err());
        assert!(t.apply(&[&v, &[1.0]]).is_err());
    }

    #[test]
    fn sym_outer_of_e2_is_e2_squared() {
        let e2 = SymmetricTensor::from_vector(&[0.0, 1.0]).unwrap();
        let m = e2.sym_outer(&e2).unwrap();
        assert_eq!(m.data(), &[0.0, 0.0, 0.0, 1.0]);
        let t = e2.sym_outer(&m).unwrap().sym_outer(&e2).unwrap();
        assert!(matches!(t.sym_outer(&e2), Err(Error::UnsupportedOrder(5))));
    }

    #[test]
    fn cubic_norm_of_single_entry() {
        let t = SymmetricTensor::from_sorted_fn(3, 2, |i| if i == [1, 1, 1] { 6.0 } else { 0.0 }).unwrap();
        assert!((t.induced_norm() - 6.0).abs() < 1e-12);
    }

    #[test]
    fn kernel_membership() {
        let t = SymmetricTensor::from_sorted_fn(2, 2, |i| if i == [1, 1] { 1.0 } else { 0.0 }).unwrap();
        assert!(t.q_kernel_member(&[1.0, 0.0], 1e-12));
        assert!(!t.q_kernel_member(&[0.0, 1.0], 1e-12));
    }

    proptest! {
        #[test]
        fn apply_is_symmetric(t in tensor_strategy(), seed in 0u64..1000) {
            let n = t.dim();
            let k = t.order();
            let vs: Vec<Vec<f64>> = (0..k)
                .map(|j| (0..n).map(|i| ((seed as f64 + 1.0) * (i as f64 + 0.3) * (j as f64 + 1.7)).sin()).collect())
                .collect();
            let args: Vec<&[f64]> = vs.iter().map(|v| v.as_slice()).collect();
            let mut rev = args.clone();
            rev.reverse();
            let a = t.apply(&args).unwrap();
            let b = t.apply(&rev).unwrap();
            prop_assert!((a - b).abs() <= 1e-12 * (1.0 + a.abs()));
        }

        #[test]
        fn sym_outer_matches_product((a, b) in pair_strategy(), v in proptest::collection::vec(-1.5f64..1.5, 3)) {
            let v = &v[..a.dim()];
            let prod = a.sym_outer(&b).unwrap();
            let lhs = prod.apply_same(v);
            let rhs = a.apply_same(v) * b.apply_same(v);
            prop_assert!((lhs - rhs).abs() <= 1e-12 * (1.0 + rhs.abs()));
        }

        #[test]
        fn induced_norm_is_homogeneous(t in tensor_strategy(), s in -3.0f64..3.0) {
            let a = t.scale(s).induced_norm();
            let b = s.abs() * t.induced_norm();
            prop_assert!((a - b).abs() <= 1e-12 * (1.0 + b));
        }

        #[test]
        fn induced_norm_bounds_every_direction(t in tensor_strategy(), v in proptest::collection::vec(-1.0f64..1.0, 3)) {
            let v = &v[..t.dim()];
            let nv = norm(v);
            prop_assume!(nv > 1e-3);
            let u: Vec<f64> = v.iter().map(|x| x / nv).collect();
            prop_assert!(t.apply_same(&u).abs() <= t.induced_norm() * (1.0 + 1e-9) + 1e-12);
        }
    }
}
