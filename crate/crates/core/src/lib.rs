//! Geometric frequency of dynamical-system trajectories.
//!
//! The geometric frequency of a velocity `u` is the multivector
//! `u u' / |u|²`: a scalar radial rate `rho` plus a bivector rotation rate
//! `omega`. For diagonalizable linear systems `u' = A u`, the real modal
//! coordinates `ζ = W u` have block-wise complex frequencies equal to the
//! eigenvalues of `A`, while the untransformed velocities generally do not.
//!
//! - [`geomalg`]: inner/wedge/geometric products and per-sample frequency.
//! - [`modal`]: eigenstructure, the real modal form `(W, G)`, the ℂ ≅ M₂(ℝ)
//!   isomorphism and block frequencies.
//! - [`dynsys`]: state-space models, RK4 trajectories, Jacobians, equilibria.
//! - [`circuits`]: RC, RLC, third-order and tunnel-diode circuits.
//! - [`analysis`]: along-trajectory series, modal projection, asymptotic
//!   forecasts, tail comparison and limit-cycle detection.

pub mod analysis;
pub mod circuits;
pub mod dynsys;
pub mod error;
pub mod geomalg;
pub mod modal;

pub use error::{Error, Result};
