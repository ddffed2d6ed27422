use num_complex::Complex64;
use serde::Serialize;

use super::solver::{connection_sweep, lambda_sweep, metric_sweep, solve_elliptic_system};
use super::state::{EllipticConfig, GaugeState};
use crate::error::Result;
use crate::geometry::{ConnectionField, MetricField, SecondFundamentalField};
use crate::spectral::{sobolev_norm, Field, Spectrum};

/// `‖(h, V, A, B)‖ = ‖|D|h‖_{H^{s+1}} + ‖|D|V‖_{H^s} + ‖A‖_{H^{s+1}} + ‖|D|B‖_{H^{s-1}}`,
/// each tensor piece taken as the `l²` sum over its components.
pub fn aux_norm(h: &[Field], v: &[Field], a: &[Field], b: &Field, s: f64) -> f64 {
    let weighted = |fs: &[Field], shift: f64, grad: bool| -> f64 {
        fs.iter()
            .map(|f| {
                let g = f.grid();
                Spectrum::of(f).weighted_energy(|k| {
                    let x2 = g.xi2(k);
                    let w = (1.0 + x2).powf(s + shift);
                    if grad {
                        x2 * w
                    } else {
                        w
                    }
                })
            })
            .sum::<f64>()
            .sqrt()
    };
    weighted(h, 1.0, true)
        + weighted(v, 0.0, true)
        + weighted(a, 1.0, false)
        + weighted(std::slice::from_ref(b), -1.0, true)
}

/// `‖λ‖_{H^s}` as the `l²` sum over components.
pub fn lambda_norm(lam: &SecondFundamentalField, s: f64) -> f64 {
    lam.comps()
        .iter()
        .map(|f| sobolev_norm(f, s).powi(2))
        .sum::<f64>()
        .sqrt()
}

/// Finite-difference derivative of the solution map in a direction.
#[derive(Clone, Debug)]
pub struct Linearization {
    pub tau: f64,
    /// Sweeps used for every perturbed solve.
    pub sweeps: usize,
    pub lambda: Vec<Field>,
    pub h: Vec<Field>,
    pub v: Vec<Field>,
    pub a: Vec<Field>,
    pub b: Field,
    pub summary: LinearizationSummary,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct LinearizationSummary {
    pub sigma: f64,
    /// `‖(λ_lin, S_lin)‖_{H^σ × ℋ^σ} / ‖δψ‖_{H^σ}`.
    pub bound_ratio: f64,
    /// Relative gap between the step-`τ` difference and its Richardson
    /// extrapolation from steps `τ` and `2τ`.
    pub richardson_rel: f64,
}

type Solution = (MetricField, SecondFundamentalField, ConnectionField);

/// Exactly `n` outer sweeps from the trivial state: a smooth map of `ψ`,
/// unlike a tolerance-terminated solve.
fn fixed_sweeps(psi: &Field, n: usize, omega: f64) -> Result<Solution> {
    let grid = psi.grid();
    let mut g = MetricField::flat(grid);
    let mut lam = SecondFundamentalField::zeros(grid);
    let mut conn = ConnectionField::zeros(grid);
    for _ in 0..n {
        lam = lambda_sweep(&lam, psi, &g, &conn.a, omega)?.0;
        g = metric_sweep(&g, &lam, psi, omega)?.0;
        conn = connection_sweep(&conn, &lam, psi, &g, omega)?.0;
    }
    Ok((g, lam, conn))
}

fn flatten(s: &Solution) -> Vec<Field> {
    let (g, lam, conn) = s;
    let mut out: Vec<Field> = lam.comps().to_vec();
    out.extend(g.h_comps().iter().cloned());
    out.extend(conn.v.iter().cloned());
    out.extend(conn.a.iter().cloned());
    out.push(conn.b.clone());
    out
}

fn central(plus: &[Field], minus: &[Field], tau: f64) -> Vec<Field> {
    plus.iter()
        .zip(minus)
        .map(|(p, m)| (p - m).scale(0.5 / tau))
        .collect()
}

fn shifted(psi: &Field, dpsi: &Field, t: f64) -> Field {
    let mut out = psi.clone();
    out.axpy(Complex64::new(t, 0.0), dpsi);
    out
}

/// `(S(ψ + τδψ) - S(ψ - τδψ)) / 2τ` with `τ = 1e-4 ‖ψ‖/‖δψ‖` by default
/// (`τ = 1e-4` when `ψ = 0`), and the derived bound ratio at index `σ`.
pub fn linearize_fd(
    psi: &Field,
    dpsi: &Field,
    cfg: &EllipticConfig,
    sigma: f64,
    tau: Option<f64>,
) -> Result<Linearization> {
    let base: GaugeState = solve_elliptic_system(psi, cfg)?;
    let sweeps = base.diagnostics.iterations + 5;
    let omega = cfg.under_relaxation;
    let (np, nd) = (psi.norm_l2(), dpsi.norm_l2());
    let tau = tau.unwrap_or(if np > 0.0 && nd > 0.0 {
        1e-4 * np / nd
    } else {
        1e-4
    });

    let solve = |t: f64| fixed_sweeps(&shifted(psi, dpsi, t), sweeps, omega).map(|s| flatten(&s));
    let d1 = central(&solve(tau)?, &solve(-tau)?, tau);
    let d2 = central(&solve(2.0 * tau)?, &solve(-2.0 * tau)?, 2.0 * tau);
    let (mut num, mut den) = (0.0, 0.0);
    for (a, b) in d1.iter().zip(&d2) {
        // R = (4 D(τ) - D(2τ)) / 3, so D(τ) - R = (D(2τ) - D(τ)) / 3
        num += ((b - a).scale(1.0 / 3.0)).norm_l2().powi(2);
        den += (&a.scale(4.0 / 3.0) - &b.scale(1.0 / 3.0))
            .norm_l2()
            .powi(2);
    }
    let richardson_rel = if den > 0.0 { (num / den).sqrt() } else { 0.0 };

    let d = psi.grid().dim();
    let mut it = d1.into_iter();
    let lambda: Vec<Field> = it.by_ref().take(d * d).collect();
    let h: Vec<Field> = it.by_ref().take(d * d).collect();
    let v: Vec<Field> = it.by_ref().take(d).collect();
    let a: Vec<Field> = it.by_ref().take(d).collect();
    let b = it.next().expect("b component");

    let lam_norm = lambda
        .iter()
        .map(|f| sobolev_norm(f, sigma).powi(2))
        .sum::<f64>()
        .sqrt();
    let denom = sobolev_norm(dpsi, sigma);
    let bound_ratio = if denom > 0.0 {
        (lam_norm + aux_norm(&h, &v, &a, &b, sigma)) / denom
    } else {
        0.0
    };
    Ok(Linearization {
        tau,
        sweeps,
        lambda,
        h,
        v,
        a,
        b,
        summary: LinearizationSummary {
            sigma,
            bound_ratio,
            richardson_rel,
        },
    })
}
