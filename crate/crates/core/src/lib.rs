//! Optimal one-level density test functions for the classical compact groups.
//!
//! The optimal test function for support `[−2σ, 2σ]` is determined by the
//! solution `g` of `(I + K)g = 1` on `[−σ, σ]`, where `K` convolves with the
//! group kernel `m(ξ) = α + β·𝟙[−1,1](ξ)`; the infimum of the one-level
//! density functional is then `1/⟨1, g⟩`.
//!
//! * [`fredholm`] solves the equation numerically for any σ.
//! * [`closedform`] builds exact piecewise-trigonometric solutions for σ < 2.
//! * [`reduction`] derives the ODEs and interval data governing `g` for any σ.
//! * [`analysis`] turns solutions into infima, bounds, sweeps and `φ`, `φ̂`.

pub mod analysis;
pub mod cli;
pub mod closedform;
pub mod error;
pub mod fredholm;
pub mod reduction;
pub mod symmetry;
pub mod verify;

pub use error::{Error, Result};
pub use symmetry::{KernelSpec, SymmetryGroup};
