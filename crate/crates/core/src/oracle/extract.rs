use num_complex::Complex64;
use serde::Serialize;

use super::immersion::{deriv, dot, to_field, ImmersionState, Scalar};
use crate::error::{Result, SmcfError};
use crate::geometry::{ConnectionField, MetricField, SecondFundamentalField};
use crate::spectral::{inverse_laplacian, Field};

/// `(g, λ, ψ, A)` read off an immersion with its normal frame.
#[derive(Clone, Debug)]
pub struct ExtractedGauge {
    pub g: Vec<Field>,
    /// `λ_{αβ} = ∂²_{αβ}F·ν₁ + i ∂²_{αβ}F·ν₂`, row-major.
    pub lambda: Vec<Field>,
    /// `ψ = g^{αβ} λ_{αβ}`.
    pub psi: Field,
    /// `A_α = ∂_α ν₁ · ν₂`.
    pub a: Vec<Field>,
    /// `|H|` pointwise.
    pub h_norm: Vec<f64>,
}

impl ExtractedGauge {
    pub fn metric(&self) -> Result<MetricField> {
        MetricField::from_metric(self.psi.grid(), self.g.clone())
    }

    pub fn second_fundamental(&self) -> Result<SecondFundamentalField> {
        SecondFundamentalField::from_raw(self.psi.grid(), self.lambda.clone())
    }

    /// `A` as a connection with `V` and `B` left at zero.
    pub fn connection(&self) -> ConnectionField {
        let mut c = ConnectionField::zeros(self.psi.grid());
        c.a = self.a.clone();
        c
    }

    /// `max |λ_{αβ} - λ_{βα}|`.
    pub fn symmetry_residual(&self) -> f64 {
        let d = self.psi.grid().dim();
        let mut worst = 0.0_f64;
        for a in 0..d {
            for b in a + 1..d {
                worst = worst.max(self.lambda[a * d + b].max_abs_diff(&self.lambda[b * d + a]));
            }
        }
        worst
    }
}

pub fn extract_gauge(state: &ImmersionState) -> Result<ExtractedGauge> {
    let grid = state.grid();
    let d = grid.dim();
    let geo = state.geometry()?;
    let np = grid.len();
    let lambda: Vec<Field> = geo
        .second
        .iter()
        .map(|s| {
            let v = (0..np)
                .map(|k| Complex64::new(dot(s, &state.nu1, k), dot(s, &state.nu2, k)))
                .collect();
            Field::from_vec(grid, v)
        })
        .collect::<Result<_>>()?;
    let mut psi = Field::zeros(grid);
    for (ab, l) in lambda.iter().enumerate() {
        psi.add_product(&to_field(grid, &geo.ginv[ab]), l);
    }
    let a = (0..d)
        .map(|al| {
            let dn: Vec<Scalar> = state.nu1.iter().map(|c| deriv(grid, c, al)).collect();
            let v: Vec<f64> = (0..np).map(|k| dot(&dn, &state.nu2, k)).collect();
            to_field(grid, &v)
        })
        .collect();
    let h_norm = (0..np).map(|k| dot(&geo.h, &geo.h, k).sqrt()).collect();
    Ok(ExtractedGauge {
        g: geo.g.iter().map(|v| to_field(grid, v)).collect(),
        lambda,
        psi,
        a,
        h_norm,
    })
}

/// `√g g^{ab}` row-major and `√g`.
fn densitized(g: &[Field], d: usize) -> (Vec<Field>, Field) {
    let grid = g[0].grid();
    let np = grid.len();
    let mut out = vec![vec![Complex64::new(0.0, 0.0); np]; d * d];
    let mut sq = vec![Complex64::new(0.0, 0.0); np];
    for k in 0..np {
        let gk: Vec<f64> = g.iter().map(|f| f.values()[k].re).collect();
        let (det, inv) = if d == 1 {
            (gk[0], vec![1.0 / gk[0]])
        } else {
            let det = gk[0] * gk[3] - gk[1] * gk[2];
            (
                det,
                vec![gk[3] / det, -gk[1] / det, -gk[2] / det, gk[0] / det],
            )
        };
        let s = det.sqrt();
        sq[k] = Complex64::new(s, 0.0);
        for ab in 0..d * d {
            out[ab][k] = Complex64::new(s * inv[ab], 0.0);
        }
    }
    (
        out.into_iter()
            .map(|v| Field::from_vec(grid, v).expect("sized"))
            .collect(),
        Field::from_vec(grid, sq).expect("sized"),
    )
}

/// `L^∞` norm of `∇^α A_α = |g|^{-1/2} ∂_a(√g g^{ab} A_b)`.
pub fn coulomb_residual(ex: &ExtractedGauge) -> Result<f64> {
    let grid = ex.psi.grid();
    let d = grid.dim();
    let (w, sq) = densitized(&ex.g, d);
    let mut div = Field::zeros(grid);
    for a in 0..d {
        let mut flux = Field::zeros(grid);
        for b in 0..d {
            flux.add_product(&w[a * d + b], &ex.a[b]);
        }
        div += &crate::spectral::derivative(&flux, a)?;
    }
    Ok(div.zip_map(&sq, |x, s| x / s).norm_linf())
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FrameFix {
    pub residual_before: f64,
    pub residual_after: f64,
    pub iterations: usize,
    /// `max |θ|` of the applied rotation.
    pub theta_linf: f64,
}

/// Rotates the frame by `θ` with `Δ_g θ = -∇^α A_α`, `θ` mean free, so that
/// the new connection is in Coulomb gauge.
pub fn gauge_fix_frame(
    state: &ImmersionState,
    tol: f64,
    max_iter: usize,
) -> Result<(ImmersionState, FrameFix)> {
    let grid = state.grid();
    let d = grid.dim();
    let ex = extract_gauge(state)?;
    let before = coulomb_residual(&ex)?;
    let (w, _) = densitized(&ex.g, d);
    let mut iterations = 0;
    let theta: Field = if d == 1 {
        // √g g^{11}(θ' + A) must be constant
        let c = ex.a[0].mean() / w[0].map(|x| 1.0 / x).mean();
        let rhs = ex.a[0].zip_map(&w[0], |a, x| c / x - a);
        crate::spectral::Spectrum::of(&rhs).apply(|k| {
            let xi = grid.xi(k, 0);
            if xi == 0.0 {
                Complex64::new(0.0, 0.0)
            } else {
                Complex64::new(0.0, -1.0 / xi)
            }
        })
    } else {
        // Δθ = -∂_a(√g g^{ab} A_b) - ∂_a(W^{ab} ∂_b θ), W = √g g^{ab} - δ^{ab}
        let mut src = Field::zeros(grid);
        for a in 0..d {
            let mut flux = Field::zeros(grid);
            for b in 0..d {
                flux.add_product(&w[a * d + b], &ex.a[b]);
            }
            src -= &crate::spectral::derivative(&flux, a)?;
        }
        let wdev: Vec<Field> = (0..d * d)
            .map(|ab| {
                if ab / d == ab % d {
                    w[ab].map(|x| x - 1.0)
                } else {
                    w[ab].clone()
                }
            })
            .collect();
        let mut th = Field::zeros(grid);
        let mut converged = false;
        for it in 1..=max_iter {
            iterations = it;
            let mut rhs = src.clone();
            for a in 0..d {
                let mut flux = Field::zeros(grid);
                for b in 0..d {
                    flux.add_product(&wdev[a * d + b], &crate::spectral::derivative(&th, b)?);
                }
                rhs -= &crate::spectral::derivative(&flux, a)?;
            }
            let next = inverse_laplacian(&rhs).0;
            let upd = next.max_abs_diff(&th);
            th = next;
            if !th.is_finite() {
                return Err(SmcfError::NonFinite {
                    stage: "frame gauge fix".into(),
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
                stage: "frame gauge fix".into(),
                iterations,
                residual: f64::NAN,
            });
        }
        th
    };
    let th: Vec<f64> = theta.values().iter().map(|z| z.re).collect();
    let mut out = state.clone();
    out.rotate_frame(&th);
    let after = coulomb_residual(&extract_gauge(&out)?)?;
    Ok((
        out,
        FrameFix {
            residual_before: before,
            residual_after: after,
            iterations,
            theta_linf: theta.norm_linf(),
        },
    ))
}
