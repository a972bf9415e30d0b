//! Numerical laboratory for log-utility portfolios of asymmetrically
//! informed traders.

// Negated comparisons like `!(x > 0.0)` are NaN-rejecting guards.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod closed_form;
pub mod config;
pub mod engine;
pub mod error;
pub mod grid;
pub mod model;
pub mod numeric;
pub mod plot;
pub mod runner;
pub mod stochastic;
pub mod strategy;
pub mod temporal;
pub mod validation;
pub mod wick;

pub use error::{Error, Result};
