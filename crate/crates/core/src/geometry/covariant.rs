use num_complex::Complex64;

use super::metric::MetricField;
use super::tensor::Tensor;
use crate::error::{Result, SmcfError};
use crate::spectral::{gradient, Field};

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };
const NEG: Complex64 = Complex64 { re: -1.0, im: 0.0 };

/// `∇_γ T` (plus `i A_γ T` when a connection is supplied), with the new
/// covariant index appended last.
pub fn covariant_derivative(t: &Tensor, g: &MetricField, a: Option<&[Field]>) -> Result<Tensor> {
    let d = t.dim();
    if g.grid() != t.grid() {
        return Err(SmcfError::ShapeMismatch(
            "tensor and metric grids differ".into(),
        ));
    }
    if let Some(a) = a {
        if a.len() != d {
            return Err(SmcfError::IndexStructure(format!(
                "connection has {} components in dimension {d}",
                a.len()
            )));
        }
    }
    let r = t.rank();
    let (up, _) = (t.upper(), t.lower());
    let grads: Vec<Vec<Field>> = t.comps().iter().map(gradient).collect();
    let mut out = Vec::with_capacity(t.comps().len() * d);
    let pow: Vec<usize> = (0..r).map(|i| d.pow((r - 1 - i) as u32)).collect();
    for (flat, grad) in grads.into_iter().enumerate() {
        let idx = t.multi_index(flat);
        for (c, mut acc) in grad.into_iter().enumerate() {
            for (slot, &stride) in pow.iter().enumerate() {
                let base = flat - idx[slot] * stride;
                for m in 0..d {
                    let other = &t.comps()[base + m * stride];
                    if slot < up {
                        acc.add_product(g.christoffel(idx[slot], c, m), other);
                    } else {
                        acc.add_scaled_product(NEG, g.christoffel(m, c, idx[slot]), other);
                    }
                }
            }
            if let Some(a) = a {
                acc.add_scaled_product(I, &a[c], &t.comps()[flat]);
            }
            out.push(acc);
        }
    }
    Tensor::from_components(t.grid(), t.upper(), t.lower() + 1, out)
}

/// `‖T‖_{𝖧^k}`: square root of `Σ_{l≤k} ∫ |∇^{A,l} T|_g^2 dμ`.
pub fn intrinsic_norm(t: &Tensor, g: &MetricField, a: Option<&[Field]>, k: usize) -> Result<f64> {
    Ok(intrinsic_norm_terms(t, g, a, k)?.iter().sum::<f64>().sqrt())
}

/// The individual squared terms `∫ |∇^{A,l} T|_g^2 dμ`, `l = 0..=k`.
pub fn intrinsic_norm_terms(
    t: &Tensor,
    g: &MetricField,
    a: Option<&[Field]>,
    k: usize,
) -> Result<Vec<f64>> {
    let mut terms = Vec::with_capacity(k + 1);
    let mut cur = t.clone();
    for l in 0..=k {
        terms.push(g.integrate(&cur.norm2_density(g)).re);
        if l < k {
            cur = covariant_derivative(&cur, g, a)?;
        }
    }
    Ok(terms)
}

/// `E^k(ψ) = ‖ψ‖²_{𝖧^k}` with gauge-covariant derivatives.
pub fn energy(psi: &Field, g: &MetricField, a: Option<&[Field]>, k: usize) -> Result<f64> {
    let t = Tensor::scalar(psi.clone());
    Ok(intrinsic_norm_terms(&t, g, a, k)?.iter().sum())
}
