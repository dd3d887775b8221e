//! Numerical toolkit for rough power nonlinearities |u|^{p-1}u: spectral multipliers and
//! dyadic projections, Sobolev/Besov norms, dyadic splines, regularized heat and
//! Schrödinger solvers, and refinement studies built on top of them.

pub mod error;
pub mod evolution;
pub mod experiments;
pub mod nonlinearity;
pub mod profiles;
pub mod report;
pub mod selftest;
pub mod spaces;
pub mod spectral;
pub mod splines;

pub use error::{Error, Result};

/// crate version embedded in reports
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
