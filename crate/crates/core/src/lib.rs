//! Desk-scale numerical laboratory for the multidimensional Selberg central
//! limit theorem: normalized log ζ samples at several scales, their prime-sum
//! surrogates, the totally disordered Gaussian limit, and the matching
//! random-matrix statistics.

// `!(x > 0.0)` is used on purpose so that NaN inputs are rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod dirichlet;
pub mod disorder;
pub mod error;
pub mod moments;
pub mod phases;
pub mod primes;
pub mod rmt;
pub mod rng;
pub mod runner;
pub mod stats;
pub mod zeta;

pub use error::{LabError, Result};
