//! Dyadic frequency projections.
//!
//! The cutoff is `φ(r) = χ(2 - r) / (χ(2 - r) + χ(r - 1))` with
//! `χ(t) = exp(-1/t)` for `t > 0` and `0` otherwise. It equals one on
//! `r ≤ 1`, vanishes on `r ≥ 2` and is smooth in between. Every band
//! constant elsewhere in the crate is relative to this choice.

use super::field::Field;
use super::ops::Spectrum;
use crate::error::{Result, SmcfError};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LpKind {
    /// Homogeneous piece `φ(ξ/2^j) - φ(ξ/2^{j-1})`, any integer `j`.
    P,
    /// Inhomogeneous piece: `S_0 = φ(ξ)`, `S_j = P_j` for `j ≥ 1`.
    S,
    /// Low-pass `Σ_{i ≤ j} S_i`.
    SLe,
}

fn chi(t: f64) -> f64 {
    if t > 0.0 {
        (-1.0 / t).exp()
    } else {
        0.0
    }
}

/// The radial cutoff `φ(r)`.
pub fn bump(r: f64) -> f64 {
    if r <= 1.0 {
        1.0
    } else if r >= 2.0 {
        0.0
    } else {
        let a = chi(2.0 - r);
        a / (a + chi(r - 1.0))
    }
}

/// Multiplier value of the requested piece at `|ξ| = r`.
pub fn lp_symbol(r: f64, j: i32, kind: LpKind) -> f64 {
    let p = |j: i32| bump(r / 2f64.powi(j)) - bump(r / 2f64.powi(j - 1));
    match kind {
        LpKind::P => p(j),
        LpKind::S if j == 0 => bump(r),
        LpKind::S => p(j),
        LpKind::SLe => bump(r / 2f64.powi(j)),
    }
}

/// Applies `P_j`, `S_j` or `S_{≤j}`.
///
/// `S_{≤j}` is assembled as the literal sum of the `S_i` outputs so that it
/// agrees bit for bit with summing the bands by hand.
pub fn lp_project(f: &Field, j: i32, kind: LpKind) -> Result<Field> {
    if kind != LpKind::P && j < 0 {
        return Err(SmcfError::InvalidConfig(format!(
            "inhomogeneous band index must be >= 0, got {j}"
        )));
    }
    let spec = Spectrum::of(f);
    Ok(match kind {
        LpKind::SLe => {
            let mut acc = band(&spec, 0);
            for i in 1..=j {
                acc += &band(&spec, i);
            }
            acc
        }
        _ => {
            let g = f.grid();
            spec.apply_real(|k| lp_symbol(g.xi_norm(k), j, kind))
        }
    })
}

/// `S_i` for a precomputed spectrum.
pub fn band(spec: &Spectrum, i: i32) -> Field {
    let g = spec.grid().clone();
    spec.apply_real(|k| lp_symbol(g.xi_norm(k), i, LpKind::S))
}

/// Smallest `J` such that `S_0 + ... + S_J` is the identity on the grid.
pub fn max_band(f: &Field) -> i32 {
    let g = f.grid();
    let kmax = (0..g.len()).map(|k| g.xi_norm(k)).fold(0.0, f64::max);
    let mut j = 0;
    while 2f64.powi(j) < kmax {
        j += 1;
    }
    j
}

/// All inhomogeneous bands `S_0 f, ..., S_J f` with `J = max_band(f)`.
pub fn decompose(f: &Field) -> Vec<Field> {
    let spec = Spectrum::of(f);
    (0..=max_band(f)).map(|i| band(&spec, i)).collect()
}
