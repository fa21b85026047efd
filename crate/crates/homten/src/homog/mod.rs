//! The periodic cell problem: grids, material discretisations, and the
//! preconditioned Fourier-space operator.

pub mod grid;
pub mod material;
pub mod operator;

pub use grid::GridSpec;
pub use material::{MaterialField, MaterialKind, MaterialSpec};
pub use operator::{OperatorContext, Scheme};
