//! Lindblad master-equation propagation of quantum light through nonlinear fiber.
//!
//! The crate builds truncated Fock-space operators, assembles reduced models for
//! Bragg-scattering frequency translation and degenerate spontaneous four-wave
//! mixing (plus a general discretised multimode model), integrates the density
//! matrix along the fiber, and cross-checks the results with a classical
//! mean-field solver.

pub mod error;
pub mod lindblad;
pub mod models;
pub mod observables;
pub mod scenario;
pub mod semiclassical;
pub mod state;
pub mod tensor;

pub use error::{Error, Result};
