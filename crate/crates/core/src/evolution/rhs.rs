use num_complex::Complex64;

use crate::error::Result;
use crate::gauge::GaugeState;
use crate::geometry::{covariant_derivative, Tensor};
use crate::spectral::{dealias, laplacian, Field, Spectrum};

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

/// `∂_t ψ = i ∇^A_α ∇^{A,α} ψ + V^γ ∇^A_γ ψ - i B ψ - λ^γ_σ Im(ψ conj λ^σ_γ)`.
pub fn schrodinger_rhs(psi: &Field, state: &GaugeState) -> Result<Field> {
    let mut out = nonlinear_part(psi, state)?;
    out.axpy(I, &laplacian(psi));
    Ok(out)
}

/// `schrodinger_rhs - iΔψ`, dealiased.
pub(crate) fn nonlinear_part(psi: &Field, state: &GaugeState) -> Result<Field> {
    psi.check_grid(&state.conn.b)?;
    let g = &state.g;
    let d = g.dim();
    let a = &state.conn.a;
    let d1 = covariant_derivative(&Tensor::scalar(psi.clone()), g, Some(a))?;
    let d2 = covariant_derivative(&d1, g, Some(a))?;

    let mut out = Field::zeros(psi.grid());
    // i (g^{αβ} ∇_α∇_β ψ - Δψ), with the flat part subtracted exactly
    let mut box_psi = Field::zeros(psi.grid());
    for al in 0..d {
        for be in 0..d {
            box_psi.add_product(g.ginv(al, be), &d2.comps()[be * d + al]);
        }
    }
    box_psi -= &laplacian(psi);
    out.axpy(I, &box_psi);

    for (c, vc) in state.conn.v.iter().enumerate() {
        out.add_product(vc, &d1.comps()[c]);
    }
    out.add_scaled_product(-I, &state.conn.b, psi);

    let mixed = state.lambda.mixed(g);
    for c in 0..d {
        for s in 0..d {
            let im = psi.zip_map(&mixed[s * d + c], |p, l| {
                Complex64::new((p * l.conj()).im, 0.0)
            });
            out.add_scaled_product(Complex64::new(-1.0, 0.0), &mixed[c * d + s], &im);
        }
    }
    Ok(dealias(&out))
}

/// `e^{i t Δ} ψ`, exact on every Fourier mode.
pub fn free_flow(psi: &Field, t: f64) -> Field {
    let g = psi.grid().clone();
    Spectrum::of(psi).apply(|k| Complex64::from_polar(1.0, -t * g.xi2(k)))
}
