//! Trigonometric time integrators with a Fourier spectral Galerkin space
//! discretization for 1-D periodic quasilinear wave equations
//! `∂ₜ²u = ∂ₓ²u - u + κ a(u) ∂ₓ²u + κ g(u, ∂ₓu)`, plus diagnostics for
//! filter admissibility, modified energies and convergence orders.

// Validation is written as `!(x > 0.0)` so that NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod energy;
pub mod error;
pub mod filters;
pub mod harness;
pub mod integrator;
pub mod problem;
pub mod reference;
pub mod spectral;

pub use error::{Error, Result};
pub use filters::FilterSpec;
pub use integrator::{IntegratorConfig, StatePair};
pub use problem::ProblemSpec;
pub use spectral::SpectralField;
