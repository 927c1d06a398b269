//! Stochastic maximum-likelihood direction-of-arrival estimation for
//! possibly-correlated Gaussian sources in unknown nonuniform Gaussian noise.
//!
//! The estimator is an ECME iteration: closed-form conditional-moment updates
//! for the source and noise covariances plus a steepest-descent conditional
//! maximization over the arrival angles. Supporting pieces: a snapshot
//! simulator, concentrated-likelihood objectives, a Slepian-Bangs CRLB
//! oracle, and a deterministic Monte Carlo harness.

pub mod array;
pub mod config;
pub mod crlb;
pub mod ecme;
pub mod error;
pub mod io;
pub mod likelihood;
pub mod linalg;
pub mod model;
pub mod montecarlo;

pub use error::{DoaError, Result};
