//! File formats, parallel runs and the command-line front end for
//! `dichotomy-core`.
//!
//! - [`wav`]: 16-bit PCM input, resampled to the pipeline rate.
//! - [`manifest`], [`sidecar`]: corpus CSVs.
//! - [`store`]: JSON-lines feature stores written by `extract`.
//! - [`tables`]: confusion, contrast, prediction-log and group-rate CSVs.
//! - [`config`]: `key = value` settings and the config hash.
//! - [`pipeline`]: extraction and leave-one-out over a rayon pool.

pub mod config;
pub mod error;
pub mod fsio;
pub mod manifest;
pub mod pipeline;
pub mod sidecar;
pub mod store;
pub mod tables;
pub mod wav;

pub use error::{Error, Result};
