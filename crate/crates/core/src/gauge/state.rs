use serde::Serialize;

use crate::error::{Result, SmcfError};
use crate::geometry::{
    constraint_report, ConnectionField, ConstraintReport, MetricField, SecondFundamentalField,
};
use crate::spectral::{Field, Grid};

/// Controls for the outer contraction.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EllipticConfig {
    /// Stop once one sweep changes every field by less than this (`L^∞`).
    pub tol: f64,
    pub max_iter: usize,
    /// Fraction of each correction applied, in `(0, 1]`.
    pub under_relaxation: f64,
    /// Upper bound on `‖ψ‖_{H^s}` accepted by the full solve.
    pub smallness: f64,
    /// Sobolev index for the smallness test; `None` uses `s_d`.
    pub regularity: Option<f64>,
    /// Consecutive non-decreasing updates tolerated before giving up.
    pub stall_window: usize,
}

impl Default for EllipticConfig {
    fn default() -> Self {
        Self {
            tol: 1e-10,
            max_iter: 200,
            under_relaxation: 1.0,
            smallness: 0.05,
            regularity: None,
            stall_window: 10,
        }
    }
}

impl EllipticConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(SmcfError::InvalidConfig(m));
        if !(self.tol > 0.0) {
            return bad(format!("elliptic tol must be > 0, got {}", self.tol));
        }
        if self.max_iter == 0 {
            return bad("elliptic max_iter must be >= 1".into());
        }
        if !(self.under_relaxation > 0.0 && self.under_relaxation <= 1.0) {
            return bad(format!(
                "under_relaxation must lie in (0, 1], got {}",
                self.under_relaxation
            ));
        }
        if !(self.smallness > 0.0) {
            return bad(format!(
                "smallness threshold must be > 0, got {}",
                self.smallness
            ));
        }
        if self.stall_window == 0 {
            return bad("stall_window must be >= 1".into());
        }
        Ok(())
    }
}

/// Means of the elliptic right-hand sides discarded by the periodic `Δ⁻¹`
/// during the final sweep. On the whole space these would vanish.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize)]
pub struct NonDecay {
    pub metric: f64,
    pub v: f64,
    pub a: f64,
    pub b: f64,
}

impl NonDecay {
    pub fn max(&self) -> f64 {
        self.metric.max(self.v).max(self.a).max(self.b)
    }
}

/// `L^∞` norms of each elliptic equation's left-minus-right side.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize)]
pub struct EquationResiduals {
    pub metric: f64,
    pub v: f64,
    pub b: f64,
    /// Second-order form of the `A` equation, evaluated as a cross-check.
    pub a_second_order: f64,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct EllipticDiagnostics {
    pub iterations: usize,
    pub update_norm: f64,
    pub update_history: Vec<f64>,
    pub non_decay: NonDecay,
    pub equations: EquationResiduals,
    pub constraints: ConstraintReport,
}

/// Solution of the fixed-time elliptic system for one `ψ`.
#[derive(Clone, Debug)]
pub struct GaugeState {
    pub g: MetricField,
    pub lambda: SecondFundamentalField,
    pub conn: ConnectionField,
    pub diagnostics: EllipticDiagnostics,
}

impl GaugeState {
    /// Flat metric with every other field zero.
    pub fn trivial(grid: &Grid) -> Self {
        Self {
            g: MetricField::flat(grid),
            lambda: SecondFundamentalField::zeros(grid),
            conn: ConnectionField::zeros(grid),
            diagnostics: EllipticDiagnostics::default(),
        }
    }

    pub fn grid(&self) -> &Grid {
        self.g.grid()
    }

    pub fn constraints(&self, psi: &Field) -> Result<ConstraintReport> {
        constraint_report(psi, &self.g, &self.lambda, &self.conn)
    }

    /// Largest pointwise change between two states.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        let h = self
            .g
            .h_comps()
            .iter()
            .zip(other.g.h_comps())
            .fold(0.0_f64, |m, (a, b)| m.max(a.max_abs_diff(b)));
        h.max(self.lambda.max_abs_diff(&other.lambda))
            .max(self.conn.max_abs_diff(&other.conn))
    }
}
