//! Interpretable ANOVA approximation for scattered data with standard-normal
//! (Z-scored) inputs.
//!
//! The cube `[0,1]^d` carries the half-period cosine basis. Composing it with
//! the coordinate-wise standard normal CDF yields an orthonormal basis of
//! `L2(R^d, ω)` where `ω` is the standard normal density. On top of that basis
//! the crate fits truncated ANOVA decompositions by regularized least squares
//! and reads off global sensitivity indices and attribute rankings.
//!
//! Module map:
//!
//! * [`transform`]: error function, its inverse, the normal density and the
//!   cube/real-space transformations.
//! * [`basis`]: half-period cosine and transformed basis functions.
//! * [`terms`]: ANOVA term sets and frequency index sets.
//! * [`operator`]: matrix-free grouped basis matrix.
//! * [`solver`]: matrix-free LSQR for the ridge problem.
//! * [`model`]: fitted approximants and sensitivity analysis.
//! * [`dataset`]: forest-fires CSV ingestion and preprocessing.
//! * [`experiment`]: cross-validation harness and benchmark reproduction.
//! * [`cli`]: the workflows behind the `anova-normal` binary.

pub mod basis;
pub mod cli;
pub mod dataset;
pub mod error;
pub mod experiment;
pub mod model;
pub mod operator;
pub mod solver;
pub mod terms;
pub mod transform;

pub use error::{Error, Result};
