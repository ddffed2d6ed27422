use serde::Serialize;

use super::norms::h_minus_one;
use crate::error::{Result, SmcfError};
use crate::spectral::{decompose, lp_project, max_band, sobolev_norm, Field, LpKind};

/// Slowly varying majorant `c_j` of the band norms `‖S_j ψ‖_{H^s}`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FrequencyEnvelope {
    pub delta: f64,
    pub s: f64,
    pub c: Vec<f64>,
    pub band_norms: Vec<f64>,
}

impl FrequencyEnvelope {
    /// `c_j ≤ 2^{δ|j-k|} c_k` for all `j, k`, up to relative slack `tol`.
    pub fn is_slowly_varying(&self, tol: f64) -> bool {
        slowly_varying(&self.c, self.delta, tol)
    }

    /// `‖S_j ψ‖_{H^s} ≤ c_j` for every band.
    pub fn dominates(&self) -> bool {
        self.band_norms.iter().zip(&self.c).all(|(b, c)| b <= c)
    }
}

pub(crate) fn slowly_varying(c: &[f64], delta: f64, tol: f64) -> bool {
    c.iter().enumerate().all(|(j, &cj)| {
        c.iter()
            .enumerate()
            .all(|(k, &ck)| cj <= 2f64.powf(delta * (j as f64 - k as f64).abs()) * ck * (1.0 + tol))
    })
}

/// `‖S_j f‖_{H^s}` for `j = 0..=max_band(f)`.
pub fn band_norms(f: &Field, s: f64) -> Vec<f64> {
    decompose(f).iter().map(|b| sobolev_norm(b, s)).collect()
}

/// Minimal envelope `c_j = max_k 2^{-δ|j-k|} ‖S_k ψ‖_{H^s}`.
pub fn frequency_envelope(psi: &Field, s: f64, delta: f64) -> Result<FrequencyEnvelope> {
    if !(delta > 0.0) {
        return Err(SmcfError::InvalidConfig(format!(
            "envelope slack must be > 0, got {delta}"
        )));
    }
    let b = band_norms(psi, s);
    let c = (0..b.len())
        .map(|j| {
            b.iter()
                .enumerate()
                .map(|(k, &bk)| 2f64.powf(-delta * (j as f64 - k as f64).abs()) * bk)
                .fold(0.0, f64::max)
        })
        .collect();
    Ok(FrequencyEnvelope {
        delta,
        s,
        c,
        band_norms: b,
    })
}

/// `ψ^{(k)} = S_{≤k} ψ`. Once `k` reaches the top band of the grid the
/// projection is the identity and `ψ` is returned unchanged.
pub fn regularize(psi: &Field, k: i32) -> Result<Field> {
    if k >= max_band(psi) {
        return Ok(psi.clone());
    }
    lp_project(psi, k, LpKind::SLe)
}

/// Constants observed in the regularization family bounds.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RegularizationReport {
    pub sigma: f64,
    /// `‖ψ^{(k)}‖_{H^{s+σ}} / (2^{σk} c_k)` per `k`.
    pub high: Vec<f64>,
    /// `‖ψ^{(k+1)} - ψ^{(k)}‖_{H^{-1}} / (2^{-(s+1)k} c_k)` per `k`.
    pub difference: Vec<f64>,
    pub c_high: f64,
    pub c_difference: f64,
}

/// Scans `k = 0..=max_band` and records the family constants. Bands with
/// vanishing envelope are skipped.
pub fn regularization_report(
    psi: &Field,
    env: &FrequencyEnvelope,
    sigma: f64,
) -> Result<RegularizationReport> {
    let kmax = max_band(psi);
    let s = env.s;
    let mut high = Vec::new();
    let mut difference = Vec::new();
    let mut prev = regularize(psi, 0)?;
    for k in 0..=kmax {
        let ck = env.c[k as usize];
        let next = regularize(psi, k + 1)?;
        if ck > 0.0 {
            high.push(sobolev_norm(&prev, s + sigma) / (2f64.powf(sigma * k as f64) * ck));
            let diff = &next - &prev;
            difference.push(h_minus_one(&diff) / (2f64.powf(-(s + 1.0) * k as f64) * ck));
        }
        prev = next;
    }
    let c_high = high.iter().cloned().fold(0.0, f64::max);
    let c_difference = difference.iter().cloned().fold(0.0, f64::max);
    Ok(RegularizationReport {
        sigma,
        high,
        difference,
        c_high,
        c_difference,
    })
}

/// `Σ_j 2^{2j(s+1)} ‖u_j‖²_{H^{-1}} + 2^{2j(s-N)} ‖u_j‖²_{H^N}`.
pub fn interp_norm(parts: &[Field], s: f64, n: f64) -> Result<f64> {
    if !(n > s && s >= 0.0) {
        return Err(SmcfError::InvalidConfig(format!(
            "interpolation norm needs N > s >= 0, got s={s}, N={n}"
        )));
    }
    Ok(parts
        .iter()
        .enumerate()
        .map(|(j, u)| {
            let j = j as f64;
            2f64.powf(2.0 * j * (s + 1.0)) * h_minus_one(u).powi(2)
                + 2f64.powf(2.0 * j * (s - n)) * sobolev_norm(u, n).powi(2)
        })
        .sum())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::Grid;
    use num_complex::Complex64;
    use std::f64::consts::PI;

    fn gaussian(g: &Grid, w: f64) -> Field {
        Field::from_fn(g, |x| {
            let r2: f64 = x.iter().map(|v| (v - PI).powi(2)).sum();
            Complex64::new((-r2 / (w * w)).exp(), 0.0)
        })
    }

    #[test]
    fn single_band_envelope() {
        let g = Grid::new(2, 128, 2.0 * PI).unwrap();
        let f = Field::from_real_fn(&g, |x| (32.0 * x[1]).cos());
        let env = frequency_envelope(&f, 2.0, 0.01).unwrap();
        let total = sobolev_norm(&f, 2.0);
        for (j, c) in env.c.iter().enumerate() {
            let expect = 2f64.powf(-0.01 * (j as f64 - 5.0).abs()) * total;
            assert!((c - expect).abs() < 1e-10 * total);
        }
        let zero = frequency_envelope(&Field::zeros(&g), 2.0, 0.01).unwrap();
        assert!(zero.c.iter().all(|&c| c == 0.0));
    }

    #[test]
    fn envelope_properties_and_minimality() {
        let g = Grid::new(2, 64, 2.0 * PI).unwrap();
        let env = frequency_envelope(&gaussian(&g, 0.6), 2.0, 0.01).unwrap();
        assert!(env.dominates());
        assert!(env.is_slowly_varying(1e-12));
        for j in 0..env.c.len() {
            let mut lower = env.clone();
            lower.c[j] *= 1.0 - 1e-6;
            assert!(
                !(lower.dominates() && lower.is_slowly_varying(0.0)),
                "band {j}"
            );
        }
    }

    #[test]
    fn regularization_limits() {
        let g = Grid::new(2, 32, 2.0 * PI).unwrap();
        let f = gaussian(&g, 0.8);
        let k = max_band(&f);
        assert_eq!(regularize(&f, k + 3).unwrap().max_abs_diff(&f), 0.0);
        let env = frequency_envelope(&f, 2.0, 0.01).unwrap();
        let rep = regularization_report(&f, &env, 1.0).unwrap();
        assert!(rep.c_high.is_finite() && rep.c_difference.is_finite());
    }

    #[test]
    fn interp_single_band_and_zero() {
        let g = Grid::new(2, 64, 2.0 * PI).unwrap();
        let u = Field::from_real_fn(&g, |x| (8.0 * x[0]).cos());
        let mut parts = vec![Field::zeros(&g); 4];
        parts[3] = u.clone();
        let v = interp_norm(&parts, 2.0, 4.0).unwrap();
        let expect = 2f64.powi(18) * h_minus_one(&u).powi(2)
            + 2f64.powi(-12) * sobolev_norm(&u, 4.0).powi(2);
        assert!((v - expect).abs() < 1e-12 * expect);
        assert_eq!(interp_norm(&[Field::zeros(&g)], 2.0, 4.0).unwrap(), 0.0);
        assert!(interp_norm(&parts, 4.0, 2.0).is_err());
    }
}
