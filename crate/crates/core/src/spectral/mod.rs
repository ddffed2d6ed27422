//! Fourier calculus on the periodic box.

mod field;
mod grid;
mod littlewood_paley;
mod ops;

pub use field::{ComplexField, Field};
pub use grid::{Grid, MAX_POINTS};
pub use littlewood_paley::{band, bump, decompose, lp_project, lp_symbol, max_band, LpKind};
pub use ops::{
    dealias, derivative, gradient, hessian, interpolate, interpolate_many, inverse_laplacian,
    is_dealiased, laplacian, riesz, second_derivative, sobolev_multiplier, sobolev_norm,
    SobolevKind, Spectrum,
};
