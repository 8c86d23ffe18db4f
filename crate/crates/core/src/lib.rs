//! Streaming estimation of time-varying input delays in discrete-time MIMO
//! linear systems from input/output data.

pub mod app;
pub mod error;
pub mod estimator;
pub mod io;
pub mod linalg;
pub mod sim;
pub mod stream;

pub use error::{Error, Result};
pub use estimator::{
    batch_markov_lq, estimate_delays, Criterion, DelayMatrix, EstimatorConfig, EstimatorState, MarkovEstimate, Sample,
};
