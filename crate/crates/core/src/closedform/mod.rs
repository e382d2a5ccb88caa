//! Exact piecewise-trigonometric optimal functions for `σ < 2` (all σ for O).

mod construct;
mod trig;

pub use construct::{
    band15_coefficients, band15_g, band2_coefficients, band2_frequencies, band2_g, closed_form_g,
    medium_g, orthogonal_g, tiny_g, unit_band_cosine, unit_g, CoefficientSolve,
};
pub use trig::{apply_operator_exact, PiecewiseTrig, Segment, TrigTerm};
pub(crate) use trig::{cos_integral, sinc};
