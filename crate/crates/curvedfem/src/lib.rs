//! P1 finite elements with exactly curved boundary elements for the Poisson
//! problem on the unit disk.

pub mod analysis;
pub mod error;
pub mod fem;
pub mod geometry;
pub mod linalg;
pub mod mesh;
pub mod quadrature;

pub use error::{Error, Result};
