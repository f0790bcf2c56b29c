//! Robust phase estimation of a single-qubit Y-rotation angle, with a noisy
//! qubit simulator, analytic additive-error models and a seeded Monte Carlo
//! harness for failure-rate studies.

pub mod error;
pub mod estimator;
pub mod harness;
pub mod noise;
pub mod oracle;
pub mod plot;
pub mod rng;
pub mod sim;
pub mod stats;

pub use error::{Result, RpeError};
