//! Gaussian Laplace eigenfunctions on the plane, the sphere and the torus:
//! exact samplers, nodal-structure extraction, Monte Carlo concentration
//! experiments and numerical certification of the supporting inequalities.

pub mod analytics;
pub mod diagnostics;
pub mod ensembles;
mod error;
pub mod harness;
pub mod measures;
pub mod nodal;
pub mod specfn;

pub use error::{Error, Result};
