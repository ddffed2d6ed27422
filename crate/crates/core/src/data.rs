//! Initial data families.

use num_complex::Complex64;

use crate::error::{Result, SmcfError};
use crate::spectral::{dealias, sobolev_norm, Field, Grid};

/// `exp(-|x - c|²/w²) e^{i k·x}` centred in the box, rescaled so that
/// `‖ψ‖_{H^s} = amplitude`. The result is projected onto the dealiased
/// modes before rescaling.
pub fn gaussian(
    grid: &Grid,
    amplitude: f64,
    width: f64,
    modulation: &[f64],
    s: f64,
) -> Result<Field> {
    if !(width > 0.0) {
        return Err(SmcfError::InvalidConfig(format!(
            "width must be > 0, got {width}"
        )));
    }
    if !modulation.is_empty() && modulation.len() != grid.dim() {
        return Err(SmcfError::InvalidConfig(format!(
            "modulation has {} entries for d = {}",
            modulation.len(),
            grid.dim()
        )));
    }
    if amplitude == 0.0 {
        return Ok(Field::zeros(grid));
    }
    let c = grid.length() / 2.0;
    let raw = Field::from_fn(grid, |x| {
        let r2: f64 = x.iter().map(|v| (v - c).powi(2)).sum();
        let phase: f64 = modulation.iter().zip(x).map(|(k, v)| k * v).sum();
        Complex64::from_polar((-r2 / (width * width)).exp(), phase)
    });
    let raw = dealias(&raw);
    let n = sobolev_norm(&raw, s);
    Ok(raw.scale(amplitude / n))
}

/// `ε e^{i m·x}` for an integer mode `m` (in units of `2π/L`).
pub fn single_mode(grid: &Grid, amplitude: f64, mode: &[i64]) -> Result<Field> {
    if mode.len() != grid.dim() {
        return Err(SmcfError::InvalidConfig(format!(
            "mode has {} entries for d = {}",
            mode.len(),
            grid.dim()
        )));
    }
    let k0 = 2.0 * std::f64::consts::PI / grid.length();
    Ok(Field::from_fn(grid, |x| {
        let phase: f64 = mode.iter().zip(x).map(|(m, v)| *m as f64 * k0 * v).sum();
        Complex64::from_polar(amplitude, phase)
    }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn gaussian_normalized() {
        let g = Grid::new(2, 32, 2.0 * PI).unwrap();
        let f = gaussian(&g, 1e-2, 0.8, &[1.0, 0.0], 2.0).unwrap();
        assert!((sobolev_norm(&f, 2.0) - 1e-2).abs() < 1e-15);
        assert_eq!(gaussian(&g, 0.0, 0.8, &[], 2.0).unwrap().norm_linf(), 0.0);
        assert!(gaussian(&g, 1.0, -1.0, &[], 2.0).is_err());
    }

    #[test]
    fn single_mode_is_exact() {
        let g = Grid::new(2, 16, 2.0 * PI).unwrap();
        let f = single_mode(&g, 0.1, &[1, 0]).unwrap();
        let k = 5 * g.stride(0) + 3;
        assert!((f.values()[k] - Complex64::from_polar(0.1, g.coord(k, 0))).norm() < 1e-15);
    }
}
