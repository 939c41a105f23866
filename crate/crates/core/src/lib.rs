//! Numerical laboratory for the 2D Kelvin-Voigt flow model on the unit
//! square: MAC discretization, saddle-point solvers, steady states,
//! spectral constants, perturbation evolution, and decay verification.

pub mod dense;
pub mod error;
pub mod field;
pub mod forcing;
pub mod grid;
pub mod manufactured;
pub mod ops;
pub mod poisson;
pub mod saddle;
pub mod spectral;
pub mod steady;
pub mod verification;
pub mod projection;

pub use error::{Error, Result};
pub use field::{FlowParameters, Norms, PressureField, VelocityField};
pub use grid::GridSpec;
pub use projection::Projector;
