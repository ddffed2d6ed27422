use serde::{Deserialize, Serialize};

use crate::error::{Result, SmcfError};
use crate::gauge::EllipticConfig;
use crate::spectral::Grid;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scheme {
    /// Exact half-steps of the flat flow around an explicit midpoint update.
    SplitStep,
    /// Integrating-factor Heun step.
    ImexRk2,
}

impl std::str::FromStr for Scheme {
    type Err = SmcfError;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "split_step" => Ok(Self::SplitStep),
            "imex_rk2" => Ok(Self::ImexRk2),
            other => Err(SmcfError::InvalidConfig(format!(
                "unknown scheme {other:?}"
            ))),
        }
    }
}

/// Which gauge fields drive the evolution.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GaugeMode {
    /// Solve the elliptic system for every evaluation.
    Solved,
    /// Flat metric with `λ`, `A`, `V`, `B` all zero: the free flow.
    Trivial,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EvolutionConfig {
    pub dt: f64,
    pub t_end: f64,
    pub scheme: Scheme,
    /// Elliptic re-solve cadence in steps; coefficients are frozen between.
    pub resolve_every: usize,
    pub monitor_ks: Vec<usize>,
    pub c_e_budget: f64,
    pub c_lin_budget: f64,
    /// Record a sample every this many steps (the last step is always kept).
    pub sample_every: usize,
    pub gauge: GaugeMode,
    /// Drop the advection field after each solve.
    pub force_v_zero: bool,
    /// Keep `ψ` at every sample in the report.
    pub store_fields: bool,
    pub elliptic: EllipticConfig,
}

impl EvolutionConfig {
    /// `dt = 0.25 (L/n)²` with the given end time.
    pub fn for_grid(grid: &Grid, t_end: f64) -> Self {
        Self {
            dt: default_dt(grid),
            t_end,
            scheme: Scheme::SplitStep,
            resolve_every: 1,
            monitor_ks: vec![0, 1, 2],
            c_e_budget: 100.0,
            c_lin_budget: 10.0,
            sample_every: 1,
            gauge: GaugeMode::Solved,
            force_v_zero: false,
            store_fields: false,
            elliptic: EllipticConfig::default(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(SmcfError::InvalidConfig(m));
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return bad(format!("dt must be > 0, got {}", self.dt));
        }
        if !(self.t_end >= self.dt) {
            return bad(format!(
                "t_end = {} is shorter than dt = {}",
                self.t_end, self.dt
            ));
        }
        if self.resolve_every == 0 || self.sample_every == 0 {
            return bad("resolve_every and sample_every must be >= 1".into());
        }
        if !(self.c_e_budget > 0.0 && self.c_lin_budget > 0.0) {
            return bad("budgets must be > 0".into());
        }
        self.elliptic.validate()
    }

    /// `dt / Δx²`, recorded with every run.
    pub fn cfl(&self, grid: &Grid) -> f64 {
        self.dt / grid.dx().powi(2)
    }

    /// Number of steps; a final partial step lands exactly on `t_end`.
    pub fn steps(&self) -> usize {
        (self.t_end / self.dt - 1e-9).ceil() as usize
    }
}

pub fn default_dt(grid: &Grid) -> f64 {
    0.25 * (grid.length() / grid.n() as f64).powi(2)
}
