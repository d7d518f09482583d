//! Supervised explicit semantic analysis.
//!
//! Text is encoded by an LSTM, mean-pooled into a latent vector, and
//! linearly projected into an explicit space where every dimension is a
//! named skill. A profile is the indicator vector of the skills it lists,
//! and relevance is the dot product (or cosine) between the two.
//!
//! This crate is `no_std` and only needs `alloc`. File formats, the CLI and
//! threaded evaluation live in the `sesa` crate.
#![cfg_attr(not(test), no_std)]

extern crate alloc;

pub mod baseline;
pub mod byproducts;
mod error;
pub mod eval;
pub mod linalg;
pub mod model;
pub mod rng;
pub mod synth;
pub mod text;
pub mod train;

pub use self::{
    error::{Result, SesaError},
    linalg::{DenseMatrix, DenseVector},
    model::{Dims, Example, ModelParams, ProfileSkillVec, ScoreMode},
    rng::SeededRng,
    text::{SkillVocab, TokenSeq, WordVocab},
    train::{TrainConfig, TrainHistory},
};
