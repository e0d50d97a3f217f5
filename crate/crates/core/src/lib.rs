//! Spectral detection and recovery of a shared planted direction across two
//! correlated views of a random matrix.

pub mod cli;
pub mod deteq;
pub mod error;
pub mod harness;
pub mod inference;
pub mod linalg;
pub mod models;
pub mod outlier;
pub mod rng;
pub mod spectral;
pub mod theory;

pub use error::{Error, Result};
pub use models::{sample_instance, ModelKind, ModelParams, TwoViewInstance};
pub use theory::LimitModel;
