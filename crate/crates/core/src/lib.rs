//! Neyman-Pearson classification on finite alphabets when the null
//! distribution is known and the alternative is only seen through a
//! training sequence.
//!
//! The crate is organised bottom-up:
//!
//! * [`distributions`]: probability vectors, empirical types, divergences,
//!   geometric tilts and i.i.d. sampling.
//! * [`exponents`]: tilt solvers, the classifier threshold, optimal and
//!   mismatched error exponents, Stein exponents.
//! * [`bounds`]: lower and upper bounds on the critical training ratio.
//! * [`classifiers`]: LRT, Hoeffding's GLRT, the β-interpolated classifier,
//!   Gutman's test and exact error probabilities by type enumeration.
//! * [`sequential`]: Wald's SPRT and the sequential plug-in classifier.
//! * [`simulation`]: the Monte Carlo harness, CSV output and named presets.
//!
//! All divergences are in nats.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bounds;
pub mod classifiers;
pub mod distributions;
mod error;
pub mod exponents;
pub mod linalg;
pub mod sequential;
pub mod simulation;
pub mod special;

pub use distributions::{Distribution, EmpiricalType, RandomStream, Sample};
pub use error::{Error, Result};
pub use exponents::{TiltSolution, TradeoffPoint};
