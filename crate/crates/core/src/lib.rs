//! Nonlinear shrinkage of sample covariance matrices built from
//! autocorrelated samples.
//!
//! Observations follow the sandwich model `Y = sqrt(C) X sqrt(A)`, where `C`
//! is the cross-covariance to estimate and `A` the autocorrelation between
//! samples. The crate provides data generation, kernel spectral estimates,
//! free-probability transforms of `A`, shrinkage estimators, cross-validated
//! oracles, model fitting and experiment orchestration.

pub mod datagen;
pub mod error;
pub mod experiment;
pub mod fitting;
pub mod freeprob;
pub mod kde;
pub mod linalg;
pub mod metrics;
pub mod model;
pub mod oracle;
pub mod shrinkage;
pub mod transforms;

pub use error::{Error, Result};
pub use linalg::{Matrix, SymEig};
pub use model::{AutoModel, CrossModel, NoiseDist};
pub use oracle::{CvConfig, OracleResult};
pub use shrinkage::{ShrinkInput, ShrinkMethod, ShrinkageResult};
pub use transforms::TransformContext;
