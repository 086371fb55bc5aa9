//! Discrete kernels for a variational formulation of the relativistic
//! Klein-Gordon equation.
//!
//! * [`grid`]: uniform space and space-time grids, stencils, quadrature.
//! * [`geometry`]: tangent basis, metric, Christoffel symbols and the two
//!   curvature energy densities.
//! * [`energy`]: Newtonian and relativistic action functionals, constraint
//!   residuals and the Klein-Gordon / Schrödinger-Klein-Gordon residuals.
//! * [`kg_solver`]: Dirichlet Laplacian eigenpairs, the dispersion relation
//!   and separable stationary states.
//! * [`relkin`]: Lorentz boosts and the `J = L + S` angular decomposition.
//! * [`entropy`]: sublevel measure, entropy and inverse temperature.

pub mod error;
pub mod energy;
pub mod entropy;
pub mod exec;
pub mod geometry;
pub mod grid;
pub mod kg_solver;
mod linalg;
pub mod relkin;

pub use error::{Error, Result};
pub use num_complex::Complex64;
