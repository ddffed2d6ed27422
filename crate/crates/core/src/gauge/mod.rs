//! Fixed-time elliptic system determining `(λ, g, V, A, B)` from `ψ`.

mod linearize;
mod poisson;
mod solver;
mod state;

pub use linearize::{aux_norm, lambda_norm, linearize_fd, Linearization, LinearizationSummary};
pub use solver::{
    recover_lambda, smallness_norm, solve_elliptic_system, solve_elliptic_system_from,
    solve_metric, solve_vab,
};
pub use state::{EllipticConfig, EllipticDiagnostics, EquationResiduals, GaugeState, NonDecay};
