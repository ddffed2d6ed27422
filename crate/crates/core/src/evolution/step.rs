use num_complex::Complex64;

use super::config::{EvolutionConfig, GaugeMode, Scheme};
use super::rhs::{free_flow, nonlinear_part};
use crate::error::{Result, SmcfError};
use crate::gauge::{solve_elliptic_system, solve_elliptic_system_from, GaugeState};
use crate::spectral::Field;

fn c(x: f64) -> Complex64 {
    Complex64::new(x, 0.0)
}

/// Elliptic solve for `ψ` under the configured gauge mode, optionally warm
/// started.
pub fn gauge_for(
    psi: &Field,
    cfg: &EvolutionConfig,
    warm: Option<&GaugeState>,
) -> Result<GaugeState> {
    let mut st = match cfg.gauge {
        GaugeMode::Trivial => GaugeState::trivial(psi.grid()),
        GaugeMode::Solved => match warm {
            Some(w) => solve_elliptic_system_from(psi, &cfg.elliptic, Some(w))?,
            None => solve_elliptic_system(psi, &cfg.elliptic)?,
        },
    };
    if cfg.force_v_zero {
        for v in &mut st.conn.v {
            *v = Field::zeros(psi.grid());
        }
    }
    Ok(st)
}

fn guard(f: &Field, stage: &str, t: f64) -> Result<()> {
    if f.is_finite() {
        Ok(())
    } else {
        Err(SmcfError::NonFinite {
            stage: stage.into(),
            t,
        })
    }
}

/// One step of length `dt` from time `t`; `state` must belong to `psi`.
/// The internal stages are re-solved warm from `state`, and the returned
/// state is solved from scratch for `ψ′`, so it depends on `ψ′` alone.
pub fn step(
    psi: &Field,
    state: &GaugeState,
    cfg: &EvolutionConfig,
    dt: f64,
    t: f64,
) -> Result<(Field, GaugeState)> {
    let next = advance_psi(psi, state, cfg, dt, t, false)?;
    let new_state = gauge_for(&next, cfg, None)?;
    Ok((next, new_state))
}

/// `ψ` after one step. With `frozen` set, every stage reuses `state`.
pub(crate) fn advance_psi(
    psi: &Field,
    state: &GaugeState,
    cfg: &EvolutionConfig,
    dt: f64,
    t: f64,
    frozen: bool,
) -> Result<Field> {
    let stage_state = |p: &Field| -> Result<GaugeState> {
        if !frozen && cfg.gauge == GaugeMode::Solved {
            gauge_for(p, cfg, Some(state))
        } else {
            Ok(state.clone())
        }
    };
    let next = match cfg.scheme {
        Scheme::SplitStep => {
            let half = free_flow(psi, 0.5 * dt);
            let n0 = nonlinear_part(&half, &stage_state(&half)?)?;
            let mut mid = half.clone();
            mid.axpy(c(0.5 * dt), &n0);
            guard(&mid, "split-step midpoint", t)?;
            let n1 = nonlinear_part(&mid, &stage_state(&mid)?)?;
            let mut out = half;
            out.axpy(c(dt), &n1);
            free_flow(&out, 0.5 * dt)
        }
        Scheme::ImexRk2 => {
            let n0 = nonlinear_part(psi, state)?;
            let mut pred = psi.clone();
            pred.axpy(c(dt), &n0);
            let pred = free_flow(&pred, dt);
            guard(&pred, "imex predictor", t)?;
            let n1 = nonlinear_part(&pred, &stage_state(&pred)?)?;
            let mut out = psi.clone();
            out.axpy(c(0.5 * dt), &n0);
            let mut out = free_flow(&out, dt);
            out.axpy(c(0.5 * dt), &n1);
            out
        }
    };
    guard(&next, "step", t + dt)?;
    Ok(next)
}
