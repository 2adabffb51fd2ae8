//! Robust learning of an equal-weight mixture of two d-dimensional Gaussians
//! from adversarially contaminated samples.
//!
//! The crate provides the full pipeline — normalization, robust Hermite
//! moment estimation, low-rank tensor parameter recovery and tournament
//! selection — together with a contamination simulator and evaluation
//! helpers. See the `pipeline` module for the end-to-end entry point.

pub mod contamination;
pub mod error;
pub mod gaussmix;
pub mod normalize;
pub mod pipeline;
pub mod recover;
pub mod robust;
pub mod seeding;
pub mod select;
pub mod tensor;

mod linalg;

pub use error::{Error, Result};
