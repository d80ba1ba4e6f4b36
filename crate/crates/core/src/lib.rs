//! High-order trust-region methods for smooth equality-constrained problems
//! whose variables are also restricted to a simple convex set.
//!
//! The crate works with polynomial problems
//!
//! ```text
//! minimize f(x)  subject to  c(x) = 0,  x in F
//! ```
//!
//! where `F` is the whole space, a box or a Euclidean ball. It provides
//!
//! * dense symmetric tensors up to order four ([`tensor`]),
//! * exact polynomial derivative tensors and the derived least-squares merit
//!   functions ([`poly`], [`problem`]),
//! * projections and cone tests for the simple sets ([`convex`]),
//! * the high-order criticality measure and its brute-force reference
//!   ([`criticality`]),
//! * a trust-region minimizer for smooth objectives and least-squares
//!   problems ([`inner`]),
//! * the two-phase target-following driver with certificate checks
//!   ([`outer`]),
//! * evaluation of high-order necessary optimality conditions along arcs
//!   ([`conditions`]).
//!
//! The crate is `no_std` and only needs an allocator.
#![no_std]
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod conditions;
pub mod convex;
pub mod criticality;
mod error;
pub mod inner;
pub mod linalg;
pub mod outer;
pub mod poly;
pub mod problem;
mod seeds;
pub mod tensor;
mod trs;

pub use error::{Error, Result};
