//! Gauge-free integration of the flow on the immersion itself, used as an
//! independent check of the gauged formulation.

mod compare;
mod extract;
mod immersion;
mod solitons;

pub use compare::{graph_from_psi, oracle_compare, CompareConfig, CompareReport};
pub use extract::{coulomb_residual, extract_gauge, gauge_fix_frame, ExtractedGauge, FrameFix};
pub use immersion::{induced_geometry, smcf_step, ImmersionState, InducedGeometry};
pub use solitons::{center_and_radius, circle, normal_graph, sphere};
