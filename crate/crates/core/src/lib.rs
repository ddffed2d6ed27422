//! Spectral simulation of skew mean curvature flow in the harmonic/Coulomb
//! gauge, with a direct immersion integrator as an independent check.

pub mod analysis;
pub mod data;
pub mod error;
pub mod evolution;
pub mod gauge;

pub mod geometry;
pub mod oracle;
pub mod spectral;

pub use error::{Result, SmcfError};
pub use num_complex::Complex64;
pub use spectral::{ComplexField, Field, Grid};
