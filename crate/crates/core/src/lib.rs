//! Product-limit, Nelson–Aalen and PL-quantile estimation for right-censored
//! data drawn from strongly mixing sequences, the Gaussian processes that
//! approximate the estimation error, and a Monte Carlo harness for checking
//! convergence rates.

// `!(x > 0.0)` style guards are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod datagen;
pub mod error;
pub mod estimators;
pub mod experiments;
pub mod limit;
pub mod normal;
pub mod quadrature;
pub mod rng;

pub use error::{Error, Result};
