//! Numerical kernels for the inertial Winfree oscillator model
//!
//! ```text
//! m θ̈_i + θ̇_i = ν_i − κ R(Θ) sin θ_i,    R(Θ) = (1/N) Σ_j (1 + cos θ_j)
//! ```
//!
//! The crate is `no_std` (it needs `alloc`) and does no IO. It provides:
//!
//! - [`model`]: the vector field, order parameters, potential and divergences;
//! - [`integrate`]: adaptive time integration of the first- and second-order
//!   systems, death detection and Duhamel self-consistency residuals;
//! - [`certificates`]: the explicit inequalities behind the pathwise
//!   oscillator-death argument, evaluated as auditable reports;
//! - [`embedding`]: the 4N-oscillator Kuramoto system containing the Winfree
//!   dynamics as an invariant manifold;
//! - [`tikhonov`]: measured vs. guaranteed gaps between `m > 0` and `m = 0`;
//! - [`equilibrium`]: first-order equilibrium theory (reflected angles,
//!   equilibria, entrance times, constant construction for small inertia).
//!
//! Oscillator indices are zero-based throughout the API.

#![no_std]

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod certificates;
pub mod embedding;
pub mod equilibrium;
mod error;
pub mod integrate;
mod math;
pub mod model;
pub mod tikhonov;

pub use error::{Error, Result};
pub use model::{ClusterSpec, EnsembleState, ModelParameters, SmallnessConstants};
