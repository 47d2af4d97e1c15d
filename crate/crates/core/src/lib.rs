//! Numerics for centered Gaussian Wigner states and their photon
//! statistics: validation and classification of the noise matrix, the
//! diagonal coherent-state weight and its angular average P(I), photon
//! number distributions through mutually cross-checking closed-form and
//! quadrature routes, Mandel-type and local nonclassicality criteria, and
//! a Fock-superposition witness for the regime the Gaussian family cannot
//! reach.
//!
//! Everything is plain f64 with scaled special functions; integrands
//! carry their exponential factors analytically so no intermediate can
//! overflow on the supported parameter ranges.

pub mod fock;
pub mod gaussian;
pub mod photon;
pub mod quadrature;
pub mod specfun;

mod dd;
mod error;

pub use error::{Error, MarginalForm, Result};
pub use num_complex::Complex64;

/// Half-width of the strip around the marginal lines beta = 1 and
/// alpha*beta = 1 inside which a state is treated as exactly marginal.
pub const BOUNDARY_EPS: f64 = 1e-10;
