//! Two-dimensional Thomas-Fermi atoms and semiclassical eigenvalue sums.
//!
//! The numerical core is generic over [`Real`] (`f32` or `f64`); the aliases
//! at the bottom of this file name the common concrete types.

pub mod coulomb;
pub mod elliptic;
pub mod energy;
pub mod error;
pub mod grid;
pub mod hydrogen;
mod linalg;
pub mod potential;
pub mod quadrature;
pub mod scalar;
pub mod semiclassics;
pub mod spectral;
pub mod tf;
pub mod verify;

pub use error::{Error, Result};
pub use scalar::Real;

/// Double-precision aliases.
pub type RadialGridF64 = grid::RadialGrid<f64>;
pub type RadialDensityF64 = coulomb::RadialDensity<f64>;
pub type CoulombOperatorF64 = coulomb::CoulombOperator<f64>;
pub type TfSolverF64 = tf::TfSolver<f64>;
pub type TfSolutionF64 = tf::TfSolution<f64>;
pub type SingularPotentialF64 = semiclassics::SingularPotential<f64>;

/// Single-precision aliases.
pub type RadialGridF32 = grid::RadialGrid<f32>;
pub type RadialDensityF32 = coulomb::RadialDensity<f32>;
pub type CoulombOperatorF32 = coulomb::CoulombOperator<f32>;
pub type TfSolverF32 = tf::TfSolver<f32>;
pub type TfSolutionF32 = tf::TfSolution<f32>;
pub type SingularPotentialF32 = semiclassics::SingularPotential<f32>;
