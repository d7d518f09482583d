//! File formats, threaded evaluation and the command line for
//! [`sesa_core`].
//!
//! | module | content |
//! |---|---|
//! | [`dataset`] | JSON-lines datasets, skill-vocabulary TSV |
//! | [`embeddings`] | textual word-embedding files |
//! | [`model_file`] | versioned, lossless model files |
//! | [`config`] | TOML run configuration, digests |
//! | [`report`] | evaluation reports, training histories |
//! | [`synth_io`] | synthetic-corpus directories |
//! | [`parallel`] | multi-threaded, order-stable scoring |
//! | [`pipeline`] | train / evaluate / baseline from records or files |
//! | [`cli`] | the `sesa` binary |

pub mod cli;
pub mod config;
pub mod dataset;
pub mod embeddings;
mod error;
pub mod model_file;
pub mod parallel;
pub mod pipeline;
pub mod report;
pub mod synth_io;

pub use self::error::{Error, Result};
pub use sesa_core as core;
