//! Spectral measures of rank-one spiked random matrix models.
//!
//! The crate samples spiked Gaussian, Laguerre and Gross-Witten models in
//! their coefficient representations, converts measures to and from Jacobi
//! and Verblunsky coefficients, and evaluates large-deviation rate functions
//! on both the measure side and the coefficient side.

// `!(x > 0.0)` style guards reject NaN together with out-of-range values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod ensembles;
pub mod error;
pub mod laws;
pub mod matricial;
pub mod measures;
pub mod oprl;
pub mod opuc;
pub mod potential;
pub mod quad;
pub mod rates;

pub use error::{Error, Result};
