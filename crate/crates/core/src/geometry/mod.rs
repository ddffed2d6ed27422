//! Tensor calculus on the periodic box with a Riemannian metric.

mod constraints;
mod covariant;
mod curvature;
mod fields;
mod harmonic;
mod metric;
mod tensor;

pub use constraints::{
    connection_residuals, constraint_report, curvature_of_connection, div_curl_lambda, gauss_form,
    ConstraintReport, Residual,
};
pub use covariant::{covariant_derivative, energy, intrinsic_norm, intrinsic_norm_terms};
pub use curvature::{curvature, Curvature};
pub use fields::{ConnectionField, SecondFundamentalField};
pub use harmonic::{harmonic_coordinate_fix, preimages, HarmonicFix, HarmonicFixSummary};
pub use metric::MetricField;
pub use tensor::Tensor;
