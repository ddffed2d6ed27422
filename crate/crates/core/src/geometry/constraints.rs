use num_complex::Complex64;
use serde::Serialize;

use super::covariant::covariant_derivative;
use super::curvature::curvature;
use super::fields::{ConnectionField, SecondFundamentalField};
use super::metric::MetricField;
use crate::error::{Result, SmcfError};
use crate::spectral::{gradient, Field};

const NEG: Complex64 = Complex64 { re: -1.0, im: 0.0 };

/// Norms of one residual family (all components pooled).
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize)]
pub struct Residual {
    /// `(Σ_components ∫ |r|^2 dx)^{1/2}`
    pub l2: f64,
    /// `max |r|`
    pub linf: f64,
    /// Largest component mean; the part of `r` that the periodic `Δ⁻¹`
    /// cannot remove.
    pub mean: f64,
}

impl Residual {
    pub fn of(fields: &[Field]) -> Self {
        let mut r = Residual::default();
        let mut sq = 0.0;
        for f in fields {
            sq += f.norm_l2().powi(2);
            r.linf = r.linf.max(f.norm_linf());
            r.mean = r.mean.max(f.mean().norm());
        }
        r.l2 = sq.sqrt();
        r
    }
}

/// Every compatibility condition of the gauge system evaluated on a state.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize)]
pub struct ConstraintReport {
    pub gauss: Residual,
    pub codazzi: Residual,
    pub divergence: Residual,
    pub curl_a: Residual,
    pub coulomb: Residual,
    pub harmonic: Residual,
    pub symmetry: Residual,
    pub trace: Residual,
}

impl ConstraintReport {
    pub fn entries(&self) -> [(&'static str, Residual); 8] {
        [
            ("gauss", self.gauss),
            ("codazzi", self.codazzi),
            ("divergence", self.divergence),
            ("curl_a", self.curl_a),
            ("coulomb", self.coulomb),
            ("harmonic", self.harmonic),
            ("symmetry", self.symmetry),
            ("trace", self.trace),
        ]
    }

    pub fn max_l2(&self) -> f64 {
        self.entries().iter().fold(0.0, |m, (_, r)| m.max(r.l2))
    }

    pub fn max_linf(&self) -> f64 {
        self.entries().iter().fold(0.0, |m, (_, r)| m.max(r.linf))
    }
}

/// `∇^{A,α} λ_{αβ} - ∇^A_β ψ` indexed `[β]`, and
/// `∇^A_α λ_{βγ} - ∇^A_β λ_{αγ}` indexed `[α][β][γ]`.
pub fn div_curl_lambda(
    lambda: &SecondFundamentalField,
    psi: &Field,
    g: &MetricField,
    a: &[Field],
) -> Result<(Vec<Field>, Vec<Field>)> {
    let d = g.dim();
    let dl = covariant_derivative(&lambda.as_tensor(), g, Some(a))?;
    // dl[(α, β, c)] = ∇_c λ_{αβ}
    let at = |x: usize, y: usize, c: usize| &dl.comps()[(x * d + y) * d + c];
    let grad_psi = gradient(psi);
    let mut div = Vec::with_capacity(d);
    for b in 0..d {
        let mut acc = Field::zeros(g.grid());
        for al in 0..d {
            for c in 0..d {
                acc.add_product(g.ginv(c, al), at(al, b, c));
            }
        }
        acc -= &grad_psi[b];
        acc.add_scaled_product(NEG * Complex64::i(), &a[b], psi);
        div.push(acc);
    }
    let mut codazzi = Vec::with_capacity(d * d * d);
    for al in 0..d {
        for b in 0..d {
            for c in 0..d {
                codazzi.push(at(b, c, al) - at(al, c, b));
            }
        }
    }
    Ok((div, codazzi))
}

/// `F_{αβ} = Im(λ^γ_α conj(λ_{βγ}))`, indexed `[α][β]`.
pub fn curvature_of_connection(lambda: &SecondFundamentalField, mixed: &[Field]) -> Vec<Field> {
    let d = lambda.dim();
    let mut out = Vec::with_capacity(d * d);
    for al in 0..d {
        for b in 0..d {
            let mut acc = Field::zeros(lambda.grid());
            for c in 0..d {
                acc.add_product(&mixed[c * d + al], &lambda.get(b, c).conj());
            }
            out.push(acc.im());
        }
    }
    out
}

/// `∂_α A_β - ∂_β A_α - F_{αβ}` indexed `[α][β]` and the covariant
/// divergence `∇^α A_α`.
pub fn connection_residuals(a: &[Field], curv: &[Field], g: &MetricField) -> (Vec<Field>, Field) {
    let d = g.dim();
    let grads: Vec<Vec<Field>> = a.iter().map(gradient).collect();
    let mut curl = Vec::with_capacity(d * d);
    for al in 0..d {
        for b in 0..d {
            let mut r = &grads[b][al] - &grads[al][b];
            r -= &curv[al * d + b];
            curl.push(r.re());
        }
    }
    let mut div = Field::zeros(g.grid());
    for al in 0..d {
        for b in 0..d {
            let mut inner = grads[b][al].clone();
            for c in 0..d {
                inner.add_scaled_product(NEG, g.christoffel(c, al, b), &a[c]);
            }
            div.add_product(g.ginv(al, b), &inner);
        }
    }
    (curl, div.re())
}

/// `Re(λ_{βγ} conj(λ_{ασ}) - λ_{αγ} conj(λ_{βσ}))`, the second fundamental
/// form expression for `R_{σγαβ}`.
pub fn gauss_form(
    lambda: &SecondFundamentalField,
    s: usize,
    c: usize,
    a: usize,
    b: usize,
) -> Field {
    let mut f = lambda.get(b, c) * &lambda.get(a, s).conj();
    f -= &(lambda.get(a, c) * &lambda.get(b, s).conj());
    f.re()
}

/// Residuals for the given fields; the operation behind
/// [`crate::gauge::GaugeState::constraints`].
pub fn constraint_report(
    psi: &Field,
    g: &MetricField,
    lambda: &SecondFundamentalField,
    conn: &ConnectionField,
) -> Result<ConstraintReport> {
    if psi.grid() != g.grid() || lambda.grid() != g.grid() {
        return Err(SmcfError::ShapeMismatch(
            "state fields on different grids".into(),
        ));
    }
    let d = g.dim();
    let curv = curvature(g);
    let mut gauss = Vec::new();
    for (p, &(s, c)) in curv.pairs().iter().enumerate() {
        for (q, &(a, b)) in curv.pairs().iter().enumerate() {
            gauss.push(curv.riemann_pair(p, q) - &gauss_form(lambda, s, c, a, b));
        }
    }

    let (div, codazzi_full) = div_curl_lambda(lambda, psi, g, &conn.a)?;
    let mut codazzi = Vec::new();
    for al in 0..d {
        for b in al + 1..d {
            for c in 0..d {
                codazzi.push(codazzi_full[(al * d + b) * d + c].clone());
            }
        }
    }

    let mixed = lambda.mixed(g);
    let fcurv = curvature_of_connection(lambda, &mixed);
    let (curl_full, coulomb) = connection_residuals(&conn.a, &fcurv, g);
    let mut curl = Vec::new();
    let mut symmetry = Vec::new();
    for al in 0..d {
        for b in al + 1..d {
            curl.push(curl_full[al * d + b].clone());
            symmetry.push(lambda.get(al, b) - lambda.get(b, al));
        }
    }
    let trace = &lambda.trace(g) - psi;

    Ok(ConstraintReport {
        gauss: Residual::of(&gauss),
        codazzi: Residual::of(&codazzi),
        divergence: Residual::of(&div),
        curl_a: Residual::of(&curl),
        coulomb: Residual::of(&[coulomb]),
        harmonic: Residual::of(&g.harmonic_residual()),
        symmetry: Residual::of(&symmetry),
        trace: Residual::of(&[trace]),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::Grid;
    use std::f64::consts::PI;

    #[test]
    fn trivial_state_has_zero_residuals() {
        let grid = Grid::new(2, 16, 2.0 * PI).unwrap();
        let g = MetricField::flat(&grid);
        let r = constraint_report(
            &Field::zeros(&grid),
            &g,
            &SecondFundamentalField::zeros(&grid),
            &ConnectionField::zeros(&grid),
        )
        .unwrap();
        assert_eq!(r.max_l2(), 0.0);
        assert_eq!(r.max_linf(), 0.0);
    }

    #[test]
    fn symmetry_residual_equals_injected_asymmetry() {
        let grid = Grid::new(2, 16, 2.0 * PI).unwrap();
        let g = MetricField::flat(&grid);
        let bump = Field::from_real_fn(&grid, |x| 1e-3 * x[0].sin() * x[1].cos());
        let comps = vec![
            Field::zeros(&grid),
            bump.clone(),
            Field::zeros(&grid),
            Field::zeros(&grid),
        ];
        let lam = SecondFundamentalField::from_raw(&grid, comps).unwrap();
        let r = constraint_report(
            &Field::zeros(&grid),
            &g,
            &lam,
            &ConnectionField::zeros(&grid),
        )
        .unwrap();
        assert!((r.symmetry.l2 - bump.norm_l2()).abs() < 1e-15);
        assert!((r.symmetry.linf - bump.norm_linf()).abs() < 1e-15);
    }

    #[test]
    fn flat_hessian_lambda_satisfies_div_curl() {
        // λ = ∂²u, ψ = Δu on the flat torus solves the system exactly
        let grid = Grid::new(2, 32, 2.0 * PI).unwrap();
        let g = MetricField::flat(&grid);
        let u = Field::from_fn(&grid, |x| {
            Complex64::new((x[0] + 2.0 * x[1]).sin(), 0.5 * (x[0] - x[1]).cos()) * 1e-2
        });
        let hess = crate::spectral::hessian(&u);
        let lam = SecondFundamentalField::new(&grid, hess).unwrap();
        let psi = crate::spectral::laplacian(&u);
        let a = vec![Field::zeros(&grid); 2];
        let (div, cod) = div_curl_lambda(&lam, &psi, &g, &a).unwrap();
        assert!(Residual::of(&div).linf < 1e-14);
        assert!(Residual::of(&cod).linf < 1e-14);
        let tr = &lam.trace(&g) - &psi;
        assert!(tr.norm_linf() < 1e-15);
    }
}
