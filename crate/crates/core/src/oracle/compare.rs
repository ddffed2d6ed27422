use nalgebra::{Matrix3, Vector3};
use num_complex::Complex64;
use serde::Serialize;

use super::extract::{coulomb_residual, extract_gauge, gauge_fix_frame};
use super::immersion::{smcf_step, ImmersionState};
use super::solitons::normal_graph;
use crate::error::{Result, SmcfError};
use crate::evolution::{default_dt, Evolution, EvolutionConfig};
use crate::gauge::EllipticConfig;
use crate::geometry::{harmonic_coordinate_fix, preimages};
use crate::spectral::{gradient, interpolate_many, inverse_laplacian, Field, Spectrum};

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CompareConfig {
    pub t: f64,
    /// Gauge-side step; `None` uses the evolution default.
    pub dt_gauge: Option<f64>,
    /// Immersion-side RK4 step as a fraction of the gauge step.
    pub immersion_ratio: f64,
    pub elliptic: EllipticConfig,
    /// Tolerance for the harmonic-coordinate and Coulomb-frame fixes.
    pub align_tol: f64,
}

impl Default for CompareConfig {
    fn default() -> Self {
        Self {
            t: 0.1,
            dt_gauge: None,
            immersion_ratio: 0.25,
            elliptic: EllipticConfig::default(),
            align_tol: 1e-13,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CompareReport {
    pub t: f64,
    pub dt_gauge: f64,
    pub dt_immersion: f64,
    /// `‖ψ_aligned(0) - ψ₀‖_{L²}` on non-zero modes: how well the graph
    /// reproduces the requested data.
    pub construction_mismatch: f64,
    /// `‖ψ_gauge(t) - ψ_immersion(t)‖_{L²}` after alignment.
    pub discrepancy: f64,
    pub shift: Vec<f64>,
    pub phase: f64,
    pub coulomb_residual: f64,
    pub harmonic_residual: f64,
}

/// Normal graph `(x, Re w, Im w)` with `Δw = ψ₀` on the non-zero modes.
pub fn graph_from_psi(psi0: &Field) -> Result<ImmersionState> {
    let grid = psi0.grid();
    if grid.dim() != 2 {
        return Err(SmcfError::Unsupported(
            "the comparison runs in d = 2".into(),
        ));
    }
    let (w, _) = inverse_laplacian(psi0);
    let u: Vec<f64> = w.values().iter().map(|z| z.re).collect();
    let v: Vec<f64> = w.values().iter().map(|z| z.im).collect();
    normal_graph(grid, &u, &v)
}

struct Aligned {
    psi: Field,
    coulomb: f64,
    harmonic: f64,
}

/// `ψ` of the immersion in a Coulomb frame and harmonic coordinates.
fn align(state: &ImmersionState, tol: f64) -> Result<Aligned> {
    let (fixed, _) = gauge_fix_frame(state, tol, 500)?;
    let ex = extract_gauge(&fixed)?;
    let coulomb = coulomb_residual(&ex)?;
    let hf = harmonic_coordinate_fix(&ex.metric()?, tol, 500)?;
    let grid = ex.psi.grid().clone();
    let psi = if hf.phi.iter().all(|p| p.norm_linf() == 0.0) {
        ex.psi
    } else {
        let phi: Vec<Spectrum> = hf.phi.iter().map(Spectrum::of).collect();
        let sp = [Spectrum::of(&ex.psi)];
        let vals = preimages(&phi)
            .iter()
            .map(|x| interpolate_many(&sp, x)[0])
            .collect();
        Field::from_vec(&grid, vals)?
    };
    Ok(Aligned {
        psi,
        coulomb,
        harmonic: hf.residual,
    })
}

/// `‖ψ_a - e^{iα} ψ_b(· + c)‖_{L²}` minimized over `(c, α)` by Gauss–Newton.
fn match_modulo_symmetry(a: &Field, b: &Field) -> (f64, Vec<f64>, f64) {
    let grid = a.grid().clone();
    let sb = Spectrum::of(b);
    let transformed = |c: &[f64], al: f64| -> (Field, Vec<Field>) {
        let shifted = sb.apply(|k| {
            let ph: f64 = (0..2).map(|j| grid.xi_even(k, j) * c[j]).sum();
            Complex64::from_polar(1.0, ph + al)
        });
        let grads = gradient(&shifted);
        (shifted, grads)
    };
    let (mut c, mut al) = (vec![0.0; 2], 0.0);
    for _ in 0..20 {
        let (f, grads) = transformed(&c, al);
        let r = &f - a;
        let cols = [
            grads[0].clone(),
            grads[1].clone(),
            f.scale_c(Complex64::new(0.0, 1.0)),
        ];
        let mut m = Matrix3::zeros();
        let mut rhs = Vector3::zeros();
        for i in 0..3 {
            for j in 0..3 {
                m[(i, j)] = cols[i].inner(&cols[j]).re;
            }
            rhs[i] = -cols[i].inner(&r).re;
        }
        let Some(step) = m.try_inverse().map(|inv| inv * rhs) else {
            break;
        };
        c[0] += step[0];
        c[1] += step[1];
        al += step[2];
        if step.amax() < 1e-14 {
            break;
        }
    }
    let (f, _) = transformed(&c, al);
    ((&f - a).norm_l2(), c, al)
}

/// Runs the gauged evolution and the immersion integrator from the same
/// initial surface and compares `ψ` at time `t`.
pub fn oracle_compare(psi0: &Field, cfg: &CompareConfig) -> Result<CompareReport> {
    let grid = psi0.grid().clone();
    let imm0 = graph_from_psi(psi0)?;
    let start = align(&imm0, cfg.align_tol)?;
    let target = psi0.sub_mean();
    let construction_mismatch = (&start.psi.sub_mean() - &target).norm_l2();

    let dt_g = cfg.dt_gauge.unwrap_or_else(|| default_dt(&grid));
    let mut ecfg = EvolutionConfig::for_grid(&grid, cfg.t);
    ecfg.dt = dt_g;
    ecfg.monitor_ks = vec![0];
    ecfg.sample_every = usize::MAX;
    ecfg.elliptic = cfg.elliptic.clone();
    let mut ev = Evolution::new(&start.psi, &ecfg)?;
    while ev.advance()? {}
    let psi_gauge = ev.psi().clone();

    let steps = (cfg.t / (dt_g * cfg.immersion_ratio)).ceil() as usize;
    let dt_i = cfg.t / steps as f64;
    let mut imm = imm0.clone();
    for _ in 0..steps {
        imm = smcf_step(&imm, dt_i)?;
    }
    let end = align(&imm, cfg.align_tol)?;
    let (discrepancy, shift, phase) = match_modulo_symmetry(&psi_gauge, &end.psi);
    Ok(CompareReport {
        t: cfg.t,
        dt_gauge: dt_g,
        dt_immersion: dt_i,
        construction_mismatch,
        discrepancy,
        shift,
        phase,
        coulomb_residual: end.coulomb.max(start.coulomb),
        harmonic_residual: end.harmonic.max(start.harmonic),
    })
}
