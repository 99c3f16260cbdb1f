//! Continuous positive-semidefinite kernels on the positive half-line built
//! from symmetric PSD matrices, their L1 and (∞,1) operator norms, and the
//! block-diagonal kernel that is BIBO stable without being absolutely
//! integrable.

pub mod counterexample;
pub mod error;
pub mod kernel;
pub mod kernel_file;
pub mod linalg;
pub mod norms;
pub mod operator;
pub mod piecewise;
pub mod quadrature;
pub mod rational;
pub mod verification;

pub use error::{Error, Result};
pub use rational::Rational;
