//! Coupled non-negative matrix factorization for CNN interpretability.
//!
//! Input pixels, neurons of the probed layers, and evaluation examples are
//! embedded in one shared non-negative latent space. The [`factor`] module
//! fits the model, [`analysis`] turns a fitted model into concept reports,
//! and [`interchange`] owns the on-disk formats.

pub mod analysis;
pub mod cli;
pub mod error;
pub mod factor;
pub mod interchange;

pub use error::{Error, Result};
