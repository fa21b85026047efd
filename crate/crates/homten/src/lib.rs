//! Spectral homogenisation of periodic scalar diffusion problems with
//! low-rank tensor acceleration.

pub mod error;
pub mod harness;
pub mod homog;
pub mod la;
pub mod solvers;
pub mod tensors;

pub use error::{Error, Result};
