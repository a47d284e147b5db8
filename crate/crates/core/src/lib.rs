//! Monte-Carlo and exact-numerics toolkit for the supremum of random walks
//! with negative drift and long-tailed increments.

pub mod cli_reporting;
pub mod distributions;
pub mod error;
pub mod estimators;
pub mod quadrature;
pub mod rng;
pub mod special;
pub mod tail_analysis;
pub mod walk_engine;

pub use distributions::{DriftMode, Family, IncrementModel, MomentSummary};
pub use error::{Error, Result};
pub use rng::RngState;
