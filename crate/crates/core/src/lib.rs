//! Regional stability toolkit.
//!
//! - [`numerics`]: dense matrices, standardization, Pearson correlation and a
//!   cyclic Jacobi eigensolver
//! - [`pca`]: contribution rates, component selection and pluggable
//!   reduction strategies
//! - [`bpnn`]: a three-layer sigmoid network trained by backpropagation
//! - [`rs_index`]: the Region Stability transform and its classes
//! - [`forecast`]: OLS trend fitting and extrapolation of RS by year
//! - [`ingest`], [`config`], [`pipeline`]: CSV records, settings and the
//!   batch commands used by the `regstab` binary

pub mod bpnn;
pub mod config;
pub mod error;
pub mod forecast;
pub mod ingest;
pub mod numerics;
pub mod pca;
pub mod pipeline;
pub mod rs_index;

pub use error::{Error, ExitClass, Result};
