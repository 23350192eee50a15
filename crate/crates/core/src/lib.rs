//! Multimodal entity linking for short social-media posts.

pub mod baselines;
pub mod bm25;
pub mod candgen;
pub mod corpus;
pub mod error;
pub mod eval;
pub mod experiment;
pub mod features;
pub mod forge;
pub mod fusion;
pub mod jmel;
pub mod nn;
pub mod pipeline;
pub mod rng;
pub mod trainer;

pub use error::{Error, Result};
