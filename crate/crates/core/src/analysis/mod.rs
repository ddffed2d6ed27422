//! Exponent arithmetic, mixed norms and the dyadic bookkeeping used for
//! rough data.

mod envelope;
mod exponents;
mod norms;
mod pairs;

pub use envelope::{
    band_norms, frequency_envelope, interp_norm, regularization_report, regularize,
    FrequencyEnvelope, RegularizationReport,
};
pub use exponents::{exponents, ExponentTable, S_MARGIN};
pub use norms::{
    h_minus_one, strichartz_accumulate, strichartz_components, wsp_norm, StrichartzAccumulator,
};
pub use pairs::{
    acceptable, admissible, pair_check, proof_pairs, Exponent, InhomogeneousCase, PairVerdict,
};
