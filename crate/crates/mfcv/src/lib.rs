//! Multifidelity Gaussian-process active learning via leave-one-out
//! cross-validation.
//!
//! The toolkit fuses observations from models of tunable fidelity s in
//! [0, 1] into a single GP over the joint input-fidelity space, scores the
//! surrogate with closed-form LOO-CV statistics, fits a second ("inner") GP
//! to the log expected CV error, and selects new input-fidelity pairs with a
//! cost-aware two-step-lookahead acquisition, sequentially or in batches.
//! An experiment harness runs the full loop against synthetic benchmarks
//! together with single-fidelity and quasi-random baselines.

#![forbid(unsafe_code)]

pub mod acquisition;
pub mod benchmarks;
pub mod cost;
pub mod domain;
pub mod error;
pub mod gp;
pub mod harness;
pub mod kernels;
pub mod loocv;
mod optimize;
pub mod sampling;
pub mod sobol;

pub use error::{MfcvError, Result};
