//! Pseudospectral toolkit for dyadic frequency analysis and barotropic
//! compressible flow on periodic grids.

pub mod besov;
pub mod envelope;
pub mod error;
pub mod experiments;
pub mod field;
pub mod grid;
pub mod interp;
pub mod lagrangian;
pub mod lp;
pub mod paraproduct;
pub mod random;
pub mod solvers;

pub use error::{Error, Result};
pub use field::Field;
pub use grid::{Grid, GridSpec};
