//! Compound matrices, matrix measures, and sampled k-contraction checks for
//! nonlinear vector fields, plus reduction of systems with an invariant
//! subspace pair to a cascade and the simulation tools used to check the
//! resulting asymptotic claims.

pub mod certify;
pub mod cli;
pub mod compound;
pub mod decompose;
pub mod error;
pub mod matrix;
pub mod measures;
pub mod model;
pub mod models;
pub mod sampling;
pub mod simulate;

pub use error::{Error, Result};
