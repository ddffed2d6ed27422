//! Time stepping of the gauged Schrödinger equation for `ψ`.

mod config;
mod diagnostics;
mod rhs;
mod step;
mod trajectory;

pub use config::{default_dt, EvolutionConfig, GaugeMode, Scheme};
pub use diagnostics::{
    difference_stability, metric_consistency, scattering_profile, DifferenceReport,
    ScatteringReport,
};
pub use rhs::{free_flow, schrodinger_rhs};
pub use step::{gauge_for, step};
pub use trajectory::{
    evolve, g_tensor, spatial_norms, Carry, Evolution, PrevSample, SpatialNorms, TrajectoryReport,
    TrajectorySample, RHO_FLOOR,
};
