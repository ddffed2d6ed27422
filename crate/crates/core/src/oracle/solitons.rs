use std::f64::consts::PI;

use super::immersion::{ImmersionState, Scalar};
use crate::error::Result;
use crate::spectral::Grid;

/// Circle of radius `r` in the `x₁x₂`-plane of `ℝ³`, arc-length parameter.
/// Under the flow it translates along `e₃` with speed `1/r`.
pub fn circle(r: f64, n: usize) -> Result<ImmersionState> {
    let grid = Grid::new(1, n, 2.0 * PI * r)?;
    let s: Vec<f64> = (0..n).map(|k| grid.coord(k, 0) / r).collect();
    let f = vec![
        s.iter().map(|t| r * t.cos()).collect(),
        s.iter().map(|t| r * t.sin()).collect(),
        vec![0.0; n],
    ];
    let inward: Vec<Scalar> = vec![
        s.iter().map(|t| -t.cos()).collect(),
        s.iter().map(|t| -t.sin()).collect(),
        vec![0.0; n],
    ];
    let up = vec![vec![0.0; n], vec![0.0; n], vec![1.0; n]];
    ImmersionState::new(&grid, f, vec![vec![0.0]; 3], inward, up)
}

/// Round sphere of radius `r` in `ℝ³ × {0} ⊂ ℝ⁴`.
///
/// The polar angle runs over `[0, 2π)` so the parametrization covers the
/// sphere twice and is periodic in both angles; the grid is offset by half
/// a cell so that no node sits on a pole.
pub fn sphere(r: f64, n: usize) -> Result<ImmersionState> {
    let grid = Grid::new(2, n, 2.0 * PI)?;
    let h = PI / n as f64;
    let np = grid.len();
    let mut f = vec![vec![0.0; np]; 4];
    let mut radial = vec![vec![0.0; np]; 4];
    for k in 0..np {
        let th = grid.coord(k, 0) + h;
        let ph = grid.coord(k, 1) + h;
        let u = [th.sin() * ph.cos(), th.sin() * ph.sin(), th.cos()];
        for c in 0..3 {
            f[c][k] = r * u[c];
            radial[c][k] = -u[c];
        }
    }
    let e4 = vec![vec![0.0; np], vec![0.0; np], vec![0.0; np], vec![1.0; np]];
    ImmersionState::new(&grid, f, vec![vec![0.0; 2]; 4], radial, e4)
}

/// Flat torus patch `F(x) = (x, u(x), v(x))` in `ℝ⁴` (or `ℝ³` for `d = 1`).
pub fn normal_graph(grid: &Grid, u: &[f64], v: &[f64]) -> Result<ImmersionState> {
    let d = grid.dim();
    let np = grid.len();
    let mut f: Vec<Scalar> = vec![vec![0.0; np]; d];
    f.push(u.to_vec());
    f.push(v.to_vec());
    let base: Vec<Vec<f64>> = (0..d + 2)
        .map(|c| (0..d).map(|a| if a == c { 1.0 } else { 0.0 }).collect())
        .collect();
    let mut s1 = vec![vec![0.0; np]; d + 2];
    let mut s2 = vec![vec![0.0; np]; d + 2];
    s1[d] = vec![1.0; np];
    s2[d + 1] = vec![1.0; np];
    ImmersionState::new(grid, f, base, s1, s2)
}

/// Mean of `F` over the grid and the spread of `|F - mean|`.
pub fn center_and_radius(state: &ImmersionState) -> (Vec<f64>, f64, f64) {
    let np = state.grid().len();
    let pts: Vec<Vec<f64>> = (0..np).map(|k| state.position(k)).collect();
    let m = state.f.len();
    let c: Vec<f64> = (0..m)
        .map(|i| pts.iter().map(|p| p[i]).sum::<f64>() / np as f64)
        .collect();
    let radii: Vec<f64> = pts
        .iter()
        .map(|p| {
            p.iter()
                .zip(&c)
                .map(|(x, m)| (x - m).powi(2))
                .sum::<f64>()
                .sqrt()
        })
        .collect();
    let lo = radii.iter().cloned().fold(f64::MAX, f64::min);
    let hi = radii.iter().cloned().fold(0.0, f64::max);
    (c, lo, hi)
}
