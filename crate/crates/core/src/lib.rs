//! Wind-power ramp forecasting: series ingestion, hub-height transform,
//! wavelet features, SVR-family and tree-ensemble regressors, metrics and
//! entropy analysis of predicted ramp signals.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod atmos;
pub mod data_io;
pub mod ensembles;
pub mod error;
pub mod evalx;
pub mod pipeline;
pub mod sigproc;
pub mod svr;

pub use error::{Error, Result};
