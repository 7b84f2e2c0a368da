//! Vector-valued Gaussian noise stability for functions `ℝ³ → S²`.
//!
//! The crate evaluates Funk–Hecke eigenvalues of the correlated sphere law,
//! samples correlated Gaussian and sphere pairs reproducibly, estimates noise
//! stability by Monte Carlo and by spectral quadrature, and certifies the
//! numeric inequalities behind the vector-valued Borell inequality in three
//! dimensions (the constants `9.4ρ`, `0.98` and the threshold `ρ < 0.104`).
//! A small product-state Quantum MAX-CUT toolkit sits alongside.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod certify;
pub mod error;
pub mod measures;
pub mod numeric;
pub mod qmaxcut;
pub mod quadrature;
pub mod specfun;
pub mod spectrum;
pub mod sphharm;
pub mod stability;

pub use error::{Error, Result};
