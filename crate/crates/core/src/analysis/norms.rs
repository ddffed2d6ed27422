use super::exponents::ExponentTable;
use crate::error::{Result, SmcfError};
use crate::spectral::{decompose, sobolev_norm, Field};

/// `‖f‖_{W^{s,p}}`.
///
/// For `p = 2` this is the exact `‖⟨D⟩^s f‖_{L²}`. Otherwise the
/// Littlewood–Paley square sum `(Σ_j (2^{js} ‖S_j f‖_{L^p})²)^{1/2}` is
/// returned, which is equivalent to the true norm up to constants.
pub fn wsp_norm(f: &Field, s: f64, p: f64) -> Result<f64> {
    if !(p >= 2.0) {
        return Err(SmcfError::Unsupported(format!(
            "W^{{s,p}} needs p >= 2, got {p}"
        )));
    }
    if p == 2.0 {
        return Ok(sobolev_norm(f, s));
    }
    let sum: f64 = decompose(f)
        .iter()
        .enumerate()
        .map(|(j, b)| (2f64.powf(j as f64 * s) * b.norm_lp(p)).powi(2))
        .sum();
    Ok(sum.sqrt())
}

/// `‖f‖_{H^{-1}} = ‖⟨D⟩^{-1} f‖_{L²}`.
pub fn h_minus_one(f: &Field) -> f64 {
    sobolev_norm(f, -1.0)
}

/// Spatial norms whose time `L²` makes up the Strichartz norm.
///
/// `d = 4` gives `[W^{1,4}, W^{s_d-2, r_d}]`; every other dimension gives the
/// single `W^{s_d-2, r_d}` component.
pub fn strichartz_components(f: &Field, table: &ExponentTable) -> Result<Vec<f64>> {
    let main = wsp_norm(f, table.sigma_d, table.r_d_f64())?;
    if table.d == 4 {
        Ok(vec![wsp_norm(f, 1.0, 4.0)?, main])
    } else {
        Ok(vec![main])
    }
}

/// Running trapezoid quadrature of the squared Strichartz components.
#[derive(Clone, Debug)]
pub struct StrichartzAccumulator {
    table: ExponentTable,
    sums: Vec<f64>,
    last: Option<(f64, Vec<f64>)>,
}

impl StrichartzAccumulator {
    pub fn new(table: ExponentTable) -> Self {
        Self {
            table,
            sums: Vec::new(),
            last: None,
        }
    }

    /// Adds a sample; times must increase strictly.
    pub fn push(&mut self, t: f64, f: &Field) -> Result<()> {
        let vals = strichartz_components(f, &self.table)?;
        if let Some((t0, v0)) = &self.last {
            if t <= *t0 {
                return Err(SmcfError::InvalidConfig(format!(
                    "sample times must increase: {t} after {t0}"
                )));
            }
            let dt = t - t0;
            self.sums.resize(vals.len(), 0.0);
            for ((s, a), b) in self.sums.iter_mut().zip(v0).zip(&vals) {
                *s += 0.5 * dt * (a * a + b * b);
            }
        }
        self.last = Some((t, vals));
        Ok(())
    }

    /// Running sums and the last sample, enough to resume the quadrature.
    pub fn state(&self) -> (Vec<f64>, Option<(f64, Vec<f64>)>) {
        (self.sums.clone(), self.last.clone())
    }

    pub fn restore(table: ExponentTable, sums: Vec<f64>, last: Option<(f64, Vec<f64>)>) -> Self {
        Self { table, sums, last }
    }

    /// Sum over components of `(∫ ‖f‖² dt)^{1/2}`.
    pub fn value(&self) -> f64 {
        self.sums.iter().map(|s| s.sqrt()).sum()
    }
}

/// Strichartz norm of a sampled trajectory by the trapezoid rule.
pub fn strichartz_accumulate(samples: &[(f64, Field)], table: &ExponentTable) -> Result<f64> {
    if samples.len() < 2 {
        return Err(SmcfError::EmptySeries);
    }
    let mut acc = StrichartzAccumulator::new(table.clone());
    for (t, f) in samples {
        acc.push(*t, f)?;
    }
    Ok(acc.value())
}
