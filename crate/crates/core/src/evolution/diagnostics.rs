use serde::Serialize;

use super::config::EvolutionConfig;
use super::rhs::free_flow;
use super::trajectory::{evolve, TrajectoryReport};
use crate::analysis::h_minus_one;
use crate::error::{Result, SmcfError};
use crate::spectral::{sobolev_norm, Field};

/// `(t, ‖g_integrated - g_resolved‖_{L^∞})` with `ġ = 2G` integrated by the
/// trapezoid rule at every step of the run.
pub fn metric_consistency(report: &TrajectoryReport) -> Vec<(f64, f64)> {
    report.samples.iter().map(|s| (s.t, s.metric_dev)).collect()
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DifferenceReport {
    pub times: Vec<f64>,
    /// `‖ψ¹(t) - ψ²(t)‖_{H^{-1}} / ‖δψ₀‖_{H^{-1}}`.
    pub ratio: Vec<f64>,
    pub sup: f64,
    pub budget: f64,
    pub within_budget: bool,
}

/// Runs from `ψ₀` and `ψ₀ + δψ₀` and compares them in the flat `H^{-1}` norm.
pub fn difference_stability(
    psi0: &Field,
    dpsi0: &Field,
    cfg: &EvolutionConfig,
) -> Result<DifferenceReport> {
    let mut cfg = cfg.clone();
    cfg.store_fields = true;
    let a = evolve(psi0, &cfg)?;
    let perturbed = psi0 + dpsi0;
    let b = evolve(&perturbed, &cfg)?;
    let base = h_minus_one(dpsi0);
    let ratio: Vec<f64> = a
        .fields
        .iter()
        .zip(&b.fields)
        .map(|(x, y)| {
            if base > 0.0 {
                h_minus_one(&(y - x)) / base
            } else {
                0.0
            }
        })
        .collect();
    let sup = ratio.iter().cloned().fold(0.0, f64::max);
    Ok(DifferenceReport {
        times: a.times(),
        ratio,
        sup,
        budget: cfg.c_lin_budget,
        within_budget: sup <= cfg.c_lin_budget,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ScatteringReport {
    pub s: f64,
    pub times: Vec<f64>,
    /// `‖u(t_{i+1}) - u(t_i)‖_{H^s}` with `u(t) = e^{-itΔ}ψ(t)`.
    pub consecutive: Vec<f64>,
    /// All pairs `(i, j, ‖u(t_i) - u(t_j)‖_{H^s})` with `i < j`.
    pub pairs: Vec<(usize, usize, f64)>,
    pub monotone: bool,
}

/// Cauchy differences of the pulled-back profile at the given samples.
pub fn scattering_profile(samples: &[(f64, Field)], s: f64) -> Result<ScatteringReport> {
    if samples.len() < 2 {
        return Err(SmcfError::EmptySeries);
    }
    if samples.windows(2).any(|w| w[1].0 <= w[0].0) {
        return Err(SmcfError::InvalidConfig(
            "sample times must increase".into(),
        ));
    }
    let u: Vec<Field> = samples.iter().map(|(t, f)| free_flow(f, -t)).collect();
    let mut pairs = Vec::new();
    for i in 0..u.len() {
        for j in i + 1..u.len() {
            pairs.push((i, j, sobolev_norm(&(&u[j] - &u[i]), s)));
        }
    }
    let consecutive: Vec<f64> = u
        .windows(2)
        .map(|w| sobolev_norm(&(&w[1] - &w[0]), s))
        .collect();
    let monotone = consecutive.windows(2).all(|w| w[1] < w[0]);
    Ok(ScatteringReport {
        s,
        times: samples.iter().map(|(t, _)| *t).collect(),
        consecutive,
        pairs,
        monotone,
    })
}
