use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::Serialize;

use super::metric::MetricField;
use crate::error::{Result, SmcfError};
use crate::spectral::{
    derivative, gradient, hessian, interpolate_many, inverse_laplacian, Field, Spectrum,
};

/// Change of coordinates `y = x + φ(x)` making a metric harmonic.
#[derive(Clone, Debug)]
pub struct HarmonicFix {
    /// Displacement `φ^γ`, mean free.
    pub phi: Vec<Field>,
    /// The metric expressed in the `y` coordinates, sampled on the grid.
    pub metric: MetricField,
    pub iterations: usize,
    /// `L^∞` norm of `Δ_g (x^γ + φ^γ)` in the original coordinates.
    pub phi_residual: f64,
    /// `L^∞` norm of `g̃^{ab} Γ̃^c_{ab}` for the transformed metric.
    pub residual: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct HarmonicFixSummary {
    pub iterations: usize,
    pub phi_residual: f64,
    pub residual: f64,
    /// `‖∂²φ‖_{L²} / ‖∂h‖_{L²}`, zero when `h` is constant.
    pub hessian_ratio: f64,
}

impl HarmonicFix {
    pub fn summary(&self, original: &MetricField) -> HarmonicFixSummary {
        let d2phi: f64 = self
            .phi
            .iter()
            .flat_map(hessian)
            .map(|f| f.norm_l2().powi(2))
            .sum::<f64>()
            .sqrt();
        let dh: f64 = original
            .h_comps()
            .iter()
            .flat_map(gradient)
            .map(|f| f.norm_l2().powi(2))
            .sum::<f64>()
            .sqrt();
        HarmonicFixSummary {
            iterations: self.iterations,
            phi_residual: self.phi_residual,
            residual: self.residual,
            hessian_ratio: if dh > 0.0 { d2phi / dh } else { 0.0 },
        }
    }
}

/// Solves `∂_a(√g g^{ab} ∂_b(x^γ + φ^γ)) = 0` by Picard iteration on the
/// flat Laplacian, then resamples the metric in the new coordinates.
pub fn harmonic_coordinate_fix(g: &MetricField, tol: f64, max_iter: usize) -> Result<HarmonicFix> {
    let grid = g.grid().clone();
    let d = g.dim();
    // W^{ab} = √g g^{ab} - δ^{ab}
    let w: Vec<Field> = (0..d * d)
        .map(|k| {
            let (a, b) = (k / d, k % d);
            let mut f = g.ginv(a, b).zip_map(g.sqrt_det(), |x, s| x * s);
            if a == b {
                f = f.map(|v| v - 1.0);
            }
            f
        })
        .collect();
    let mut phi = vec![Field::zeros(&grid); d];
    let mut iterations = 0;
    if w.iter().any(|f| f.norm_linf() > 0.0) {
        let mut converged = false;
        for it in 1..=max_iter {
            iterations = it;
            let mut upd = 0.0_f64;
            for (c, p) in phi.iter_mut().enumerate() {
                let grad = gradient(p);
                let mut div = Field::zeros(&grid);
                for a in 0..d {
                    let mut flux = w[a * d + c].clone();
                    for (b, gb) in grad.iter().enumerate() {
                        flux.add_product(&w[a * d + b], gb);
                    }
                    div += &derivative(&flux, a)?;
                }
                let next = inverse_laplacian(&div.scale(-1.0)).0;
                upd = upd.max(next.max_abs_diff(p));
                *p = next;
            }
            if !phi.iter().all(Field::is_finite) {
                return Err(SmcfError::NonFinite {
                    stage: "harmonic coordinates".into(),
                    t: f64::NAN,
                });
            }
            if upd < tol {
                converged = true;
                break;
            }
        }
        if !converged {
            return Err(SmcfError::NotContracting {
                stage: "harmonic coordinates".into(),
                iterations,
                residual: f64::NAN,
            });
        }
    }
    // Δ_g x^γ = -g^{ab}Γ^γ_{ab}
    let gamma = g.harmonic_residual();
    let phi_residual = phi
        .iter()
        .zip(&gamma)
        .map(|(p, gc)| (&g.laplace_beltrami(p) - gc).norm_linf())
        .fold(0.0_f64, f64::max);
    let metric = resample(g, &phi)?;
    let residual = metric
        .harmonic_residual()
        .iter()
        .map(Field::norm_linf)
        .fold(0.0_f64, f64::max);
    Ok(HarmonicFix {
        phi,
        metric,
        iterations,
        phi_residual,
        residual,
    })
}

/// For each grid point `y`, the `x` with `x + φ(x) = y`, by fixed-point
/// iteration on the trigonometric interpolant of `φ`.
pub fn preimages(phi: &[Spectrum]) -> Vec<Vec<f64>> {
    let grid = phi[0].grid();
    let d = grid.dim();
    (0..grid.len())
        .map(|k| {
            let y: Vec<f64> = (0..d).map(|a| grid.coord(k, a)).collect();
            let mut x = y.clone();
            for _ in 0..50 {
                let p = interpolate_many(phi, &x);
                let next: Vec<f64> = y.iter().zip(&p).map(|(ya, pa)| ya - pa.re).collect();
                let step = next
                    .iter()
                    .zip(&x)
                    .map(|(a, b)| (a - b).abs())
                    .fold(0.0, f64::max);
                x = next;
                if step < 1e-15 {
                    break;
                }
            }
            x
        })
        .collect()
}

/// `g̃(y) = J^{-T} g(x) J^{-1}` at the grid points `y`, with `x` found from
/// `x = y - φ(x)`.
fn resample(g: &MetricField, phi: &[Field]) -> Result<MetricField> {
    let grid = g.grid().clone();
    let d = g.dim();
    if phi.iter().all(|p| p.norm_linf() == 0.0) {
        return Ok(g.clone());
    }
    let phi_sp: Vec<Spectrum> = phi.iter().map(Spectrum::of).collect();
    let mut fields: Vec<Spectrum> = g.h_comps().iter().map(Spectrum::of).collect();
    for p in phi {
        for f in gradient(p) {
            fields.push(Spectrum::of(&f));
        }
    }
    let mut out = vec![vec![Complex64::new(0.0, 0.0); grid.len()]; d * d];
    for (k, x) in preimages(&phi_sp).into_iter().enumerate() {
        let v = interpolate_many(&fields, &x);
        let gm = DMatrix::from_fn(d, d, |a, b| {
            v[a * d + b].re + if a == b { 1.0 } else { 0.0 }
        });
        // J^γ_c = δ^γ_c + ∂_c φ^γ
        let j = DMatrix::from_fn(d, d, |c, e| {
            v[d * d + c * d + e].re + if c == e { 1.0 } else { 0.0 }
        });
        let jinv = j.try_inverse().ok_or_else(|| {
            SmcfError::DegenerateImmersion("coordinate change is not invertible".into())
        })?;
        let gt = jinv.transpose() * gm * &jinv;
        for a in 0..d {
            for b in 0..d {
                out[a * d + b][k] = Complex64::new(gt[(a, b)], 0.0);
            }
        }
    }
    let comps = out
        .into_iter()
        .map(|v| Field::from_vec(&grid, v))
        .collect::<Result<Vec<_>>>()?;
    MetricField::from_metric(&grid, comps)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::Grid;
    use std::f64::consts::PI;

    #[test]
    fn flat_metric_is_untouched() {
        let g = Grid::new(2, 16, 2.0 * PI).unwrap();
        let fix = harmonic_coordinate_fix(&MetricField::flat(&g), 1e-12, 50).unwrap();
        assert!(fix.phi.iter().all(|p| p.norm_linf() == 0.0));
        assert_eq!(fix.residual, 0.0);
    }
}
