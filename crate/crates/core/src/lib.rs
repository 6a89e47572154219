//! Least-angle path algorithms and companions: LARS, the lasso
//! modification, incremental forward stagewise, a least-angle path for
//! logistic regression, a coordinate-wise solver for the lasso-penalized
//! logistic likelihood, Cp and cross-validation model selection, and an
//! L2 boosting baseline.
//!
//! Path solvers operate on standardized data (centered unit-norm
//! columns, centered continuous response) and report coefficients on
//! that scale; [`dataset::Standardization`] maps predictions back.

pub mod boost;
pub mod dataset;
pub mod error;
pub mod experiments;
pub mod lalr;
pub mod lars;
pub mod linalg;
pub mod selection;
pub mod shooting;

pub use error::{Error, Result};
