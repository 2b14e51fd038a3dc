//! Sequential sparse regression and sparse linear contextual bandit lab.
//!
//! The crate provides a coordinate-descent Lasso with KKT certification,
//! the thresholded-and-refitted OPT-Lasso estimator, sequential estimation
//! and three-stage bandit simulators with seeded Monte Carlo replication,
//! theory fixtures (packing sets, radial priors, restricted-eigenvalue and
//! margin diagnostics), and an experiment harness that writes CSV tables,
//! SVG curves and run manifests.
// `!(x > 0.0)` is used on purpose so NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod bandit;
pub mod error;
pub mod fixtures;
pub mod gram;
pub mod lasso;
pub mod linalg;
pub mod opt_lasso;
pub mod parallel;
pub mod param;
pub mod report;
pub mod rng;
pub mod seq;
pub mod stats;

pub use error::{Error, Result};
