//! Numerical laboratory for the one-dimensional Bouchaud trap model.
//!
//! The walk waits an exponential time of mean `tau_x` at site `x` and then
//! steps to a uniform neighbour, with i.i.d. Pareto depths `tau_x >= 1`.
//! The crate provides landscapes ([`env`]), heavy-tailed sums ([`sums`]),
//! exact finite-window kernels ([`kernel`]), Monte Carlo walks ([`walk`]),
//! homogenization measurements ([`homog`]) and the experiment runner
//! ([`cli`]).

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod env;
pub mod error;
pub mod homog;
pub mod kernel;
pub mod numeric;
pub mod plot;
pub mod rng;
pub mod sums;
pub mod table;
pub mod walk;

pub use error::{LabError, Result};
