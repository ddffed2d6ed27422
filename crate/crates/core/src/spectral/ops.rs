use num_complex::Complex64;

use super::field::Field;
use super::grid::Grid;
use crate::error::{Result, SmcfError};

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

/// Fourier coefficients of a field (unnormalized forward DFT).
#[derive(Clone, Debug)]
pub struct Spectrum {
    grid: Grid,
    data: Vec<Complex64>,
}

impl Spectrum {
    pub fn of(f: &Field) -> Self {
        let mut data = f.values().to_vec();
        f.grid().forward(&mut data);
        Self {
            grid: f.grid().clone(),
            data,
        }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.data
    }

    /// Mean of the underlying field (zero mode over point count).
    pub fn mean(&self) -> Complex64 {
        self.data[0] / self.grid.len() as f64
    }

    /// Applies a per-mode multiplier and transforms back.
    pub fn apply(&self, m: impl Fn(usize) -> Complex64) -> Field {
        let mut out: Vec<Complex64> = self
            .data
            .iter()
            .enumerate()
            .map(|(k, &c)| c * m(k))
            .collect();
        self.grid.inverse(&mut out);
        Field::from_vec(&self.grid, out).expect("spectrum length matches grid")
    }

    pub fn apply_real(&self, m: impl Fn(usize) -> f64) -> Field {
        self.apply(|k| Complex64::new(m(k), 0.0))
    }

    /// `∫ m(xi) |f̂|^2` normalized so that `m = 1` gives `‖f‖²_{L²}`.
    pub fn weighted_energy(&self, m: impl Fn(usize) -> f64) -> f64 {
        let n = self.grid.len() as f64;
        let s: f64 = self
            .data
            .iter()
            .enumerate()
            .map(|(k, c)| m(k) * c.norm_sqr())
            .sum();
        s * self.grid.volume() / (n * n)
    }
}

fn check_axis(f: &Field, axis: usize) -> Result<()> {
    if axis >= f.grid().dim() {
        return Err(SmcfError::AxisOutOfRange {
            axis,
            dim: f.grid().dim(),
        });
    }
    Ok(())
}

/// Spectral `∂_axis f`.
pub fn derivative(f: &Field, axis: usize) -> Result<Field> {
    check_axis(f, axis)?;
    let s = Spectrum::of(f);
    let g = f.grid();
    Ok(s.apply(|k| I * g.xi(k, axis)))
}

/// All first derivatives from one forward transform.
pub fn gradient(f: &Field) -> Vec<Field> {
    let s = Spectrum::of(f);
    let g = f.grid();
    (0..g.dim()).map(|a| s.apply(|k| I * g.xi(k, a))).collect()
}

/// `∂_a ∂_b f`; the diagonal uses the even-order wavenumber so that
/// `Σ_a ∂_a∂_a = Δ` exactly.
pub fn second_derivative(f: &Field, a: usize, b: usize) -> Result<Field> {
    check_axis(f, a)?;
    check_axis(f, b)?;
    let s = Spectrum::of(f);
    Ok(apply_second(&s, a, b))
}

fn apply_second(s: &Spectrum, a: usize, b: usize) -> Field {
    let g = s.grid().clone();
    if a == b {
        s.apply_real(|k| -g.xi_even(k, a).powi(2))
    } else {
        s.apply_real(|k| -g.xi(k, a) * g.xi(k, b))
    }
}

/// All second derivatives `∂_a∂_b f` as a row-major `d×d` list.
pub fn hessian(f: &Field) -> Vec<Field> {
    let s = Spectrum::of(f);
    let d = f.grid().dim();
    let mut out: Vec<Field> = Vec::with_capacity(d * d);
    for a in 0..d {
        for b in 0..d {
            if b < a {
                let sym = out[b * d + a].clone();
                out.push(sym);
            } else {
                out.push(apply_second(&s, a, b));
            }
        }
    }
    out
}

pub fn laplacian(f: &Field) -> Field {
    let s = Spectrum::of(f);
    let g = f.grid();
    s.apply_real(|k| -g.xi2(k))
}

/// Solves `Δu = f - mean(f)` with `mean(u) = 0`; returns `u` and the
/// discarded mean of `f`.
pub fn inverse_laplacian(f: &Field) -> (Field, Complex64) {
    let s = Spectrum::of(f);
    let g = f.grid();
    let u = s.apply_real(|k| if k == 0 { 0.0 } else { -1.0 / g.xi2(k) });
    (u, s.mean())
}

/// Riesz transform with multiplier `xi_axis / |xi|`, zero mode mapped to zero.
pub fn riesz(f: &Field, axis: usize) -> Result<Field> {
    check_axis(f, axis)?;
    let s = Spectrum::of(f);
    let g = f.grid();
    Ok(s.apply_real(|k| {
        if k == 0 {
            0.0
        } else {
            g.xi(k, axis) / g.xi_norm(k)
        }
    }))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SobolevKind {
    /// `(1 + |xi|^2)^{s/2}`
    Bessel,
    /// `|xi|^s`
    Riesz,
}

/// Applies `⟨D⟩^s` or `|D|^s`. For `|D|^s` with `s < 0` the zero mode is
/// dropped and its mean returned; otherwise the returned mean is zero.
pub fn sobolev_multiplier(f: &Field, s: f64, kind: SobolevKind) -> (Field, Complex64) {
    let sp = Spectrum::of(f);
    let g = f.grid();
    match kind {
        SobolevKind::Bessel => (
            sp.apply_real(|k| (1.0 + g.xi2(k)).powf(s / 2.0)),
            Complex64::new(0.0, 0.0),
        ),
        SobolevKind::Riesz => {
            let dropped = if s < 0.0 {
                sp.mean()
            } else {
                Complex64::new(0.0, 0.0)
            };
            let out = sp.apply_real(|k| {
                if k == 0 {
                    if s == 0.0 {
                        1.0
                    } else {
                        0.0
                    }
                } else {
                    g.xi2(k).powf(s / 2.0)
                }
            });
            (out, dropped)
        }
    }
}

/// `‖⟨D⟩^s f‖_{L²}` evaluated on the Fourier side; any real `s`.
pub fn sobolev_norm(f: &Field, s: f64) -> f64 {
    let sp = Spectrum::of(f);
    let g = f.grid();
    sp.weighted_energy(|k| (1.0 + g.xi2(k)).powf(s)).sqrt()
}

/// 2/3-rule truncation.
pub fn dealias(f: &Field) -> Field {
    let s = Spectrum::of(f);
    let g = f.grid();
    s.apply_real(|k| if g.keeps(k) { 1.0 } else { 0.0 })
}

/// True when no retained energy sits outside the 2/3 band (relative `tol`).
pub fn is_dealiased(f: &Field, tol: f64) -> bool {
    let s = Spectrum::of(f);
    let g = f.grid();
    let outside = s.weighted_energy(|k| if g.keeps(k) { 0.0 } else { 1.0 });
    let total = s.weighted_energy(|_| 1.0);
    outside <= tol * tol * total.max(f64::MIN_POSITIVE)
}

/// Evaluates the trigonometric interpolant of `f` at an arbitrary point.
pub fn interpolate(spec: &Spectrum, x: &[f64]) -> Complex64 {
    interpolate_many(std::slice::from_ref(spec), x)[0]
}

/// [`interpolate`] for several spectra on one grid, sharing the phase tables.
pub fn interpolate_many(specs: &[Spectrum], x: &[f64]) -> Vec<Complex64> {
    let Some(first) = specs.first() else {
        return Vec::new();
    };
    let g = first.grid();
    let d = g.dim();
    let n = g.n();
    // per-axis phase tables e^{i k_a x_a}
    let phases: Vec<Vec<Complex64>> = (0..d)
        .map(|a| {
            (0..n)
                .map(|i| {
                    let k = g.xi(i * g.stride(a), a);
                    Complex64::new(0.0, k * x[a]).exp()
                })
                .collect()
        })
        .collect();
    let mut weights = Vec::with_capacity(g.len());
    let mut idx = vec![0usize; d];
    for flat in 0..g.len() {
        super::grid::unflatten(flat, n, &mut idx);
        let mut p = Complex64::new(1.0 / g.len() as f64, 0.0);
        for a in 0..d {
            p *= phases[a][idx[a]];
        }
        weights.push(p);
    }
    specs
        .iter()
        .map(|s| s.coeffs().iter().zip(&weights).map(|(c, w)| c * w).sum())
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn grid2(n: usize) -> Grid {
        Grid::new(2, n, 2.0 * PI).unwrap()
    }

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    #[test]
    fn derivative_of_cosine() {
        let g = grid2(32);
        let f = Field::from_real_fn(&g, |x| x[0].cos());
        let df = derivative(&f, 0).unwrap();
        let exact = Field::from_real_fn(&g, |x| -x[0].sin());
        assert!(df.max_abs_diff(&exact) <= 1e-12);
    }

    #[test]
    fn derivative_of_constant_vanishes() {
        let g = grid2(16);
        let f = Field::constant(&g, c(1.0));
        for a in 0..2 {
            assert!(derivative(&f, a).unwrap().norm_linf() < 1e-14);
        }
    }

    #[test]
    fn derivative_of_single_mode() {
        let g = grid2(16);
        let f = Field::from_fn(&g, |x| Complex64::new(0.0, 3.0 * x[1]).exp());
        let df = derivative(&f, 1).unwrap();
        let exact = f.scale_c(Complex64::new(0.0, 3.0));
        assert!(df.max_abs_diff(&exact) < 1e-12);
    }

    #[test]
    fn derivative_axis_out_of_range() {
        let g = grid2(16);
        let f = Field::zeros(&g);
        assert!(matches!(
            derivative(&f, 2),
            Err(SmcfError::AxisOutOfRange { axis: 2, dim: 2 })
        ));
        assert!(riesz(&f, 3).is_err());
    }

    #[test]
    fn inverse_laplacian_examples() {
        let g = grid2(32);
        let f = Field::from_real_fn(&g, |x| x[0].cos());
        let (u, m) = inverse_laplacian(&f);
        assert!(u.max_abs_diff(&f.scale(-1.0)) < 1e-13);
        assert!(m.norm() < 1e-15);

        let f = Field::constant(&g, c(2.5));
        let (u, m) = inverse_laplacian(&f);
        assert!(u.norm_linf() < 1e-14);
        assert!((m - c(2.5)).norm() < 1e-14);

        let f = Field::from_real_fn(&g, |x| (2.0 * x[0]).cos() + x[1].cos());
        let (u, _) = inverse_laplacian(&f);
        let exact = Field::from_real_fn(&g, |x| -(2.0 * x[0]).cos() / 4.0 - x[1].cos());
        assert!(u.max_abs_diff(&exact) < 1e-13);
    }

    #[test]
    fn riesz_examples() {
        let g = grid2(16);
        let e1 = Field::from_fn(&g, |x| Complex64::new(0.0, x[0]).exp());
        assert!(riesz(&e1, 0).unwrap().max_abs_diff(&e1) < 1e-13);
        assert!(riesz(&e1, 1).unwrap().norm_linf() < 1e-13);

        // sum of squares is the identity on mean-zero fields
        let f =
            Field::from_real_fn(&g, |x| (x[0] + 2.0 * x[1]).sin() + (3.0 * x[1]).cos()).sub_mean();
        let mut acc = Field::zeros(&g);
        for a in 0..2 {
            acc += &riesz(&riesz(&f, a).unwrap(), a).unwrap();
        }
        assert!(acc.max_abs_diff(&f) < 1e-12);
    }

    #[test]
    fn sobolev_multiplier_examples() {
        let g = grid2(16);
        let e1 = Field::from_fn(&g, |x| Complex64::new(0.0, x[0]).exp());
        let (id, _) = sobolev_multiplier(&e1, 0.0, SobolevKind::Bessel);
        assert!(id.max_abs_diff(&e1) < 1e-13);
        let (two, _) = sobolev_multiplier(&e1, 2.0, SobolevKind::Bessel);
        assert!(two.max_abs_diff(&e1.scale(2.0)) < 1e-13);

        let f = Field::from_real_fn(&g, |x| (x[0] - x[1]).exp().sin() * 0.1 + x[1].cos());
        let (a, _) = sobolev_multiplier(&f, -1.7, SobolevKind::Bessel);
        let (b, _) = sobolev_multiplier(&a, 1.7, SobolevKind::Bessel);
        assert!(b.max_abs_diff(&f) < 1e-12);

        let f = Field::constant(&g, c(3.0));
        let (u, dropped) = sobolev_multiplier(&f, -1.0, SobolevKind::Riesz);
        assert!(u.norm_linf() < 1e-14);
        assert!((dropped - c(3.0)).norm() < 1e-14);
    }

    #[test]
    fn parseval() {
        let g = Grid::new(2, 16, 3.0).unwrap();
        let f = Field::from_fn(&g, |x| {
            Complex64::new((x[0] * 2.1).sin(), x[1].cos() * x[0])
        });
        let phys = f.norm_l2();
        let four = Spectrum::of(&f).weighted_energy(|_| 1.0).sqrt();
        assert!((phys - four).abs() <= 1e-10 * phys);
    }

    #[test]
    fn inverse_laplacian_after_laplacian_is_identity_minus_mean() {
        let g = Grid::new(3, 8, 2.0 * PI).unwrap();
        let f = Field::from_fn(&g, |x| {
            Complex64::new((x[0] + x[2]).sin() + 0.3, (2.0 * x[1]).cos() * x[2].sin())
        });
        let (u, _) = inverse_laplacian(&laplacian(&f));
        assert!(u.max_abs_diff(&f.sub_mean()) < 1e-10);
    }

    #[test]
    fn interpolation_reproduces_trig_polynomial() {
        let g = grid2(16);
        let f = Field::from_real_fn(&g, |x| (2.0 * x[0]).sin() * x[1].cos() + 0.5);
        let s = Spectrum::of(&f);
        let x = [0.123, 4.56];
        let v = interpolate(&s, &x);
        let exact = (2.0 * x[0]).sin() * x[1].cos() + 0.5;
        assert!((v.re - exact).abs() < 1e-13 && v.im.abs() < 1e-13);
    }

    #[test]
    fn dealias_removes_high_modes() {
        let g = grid2(24);
        let f = Field::from_real_fn(&g, |x| (10.0 * x[0]).cos() + x[1].sin());
        let t = dealias(&f);
        let low = Field::from_real_fn(&g, |x| x[1].sin());
        assert!(t.max_abs_diff(&low) < 1e-13);
        assert!(is_dealiased(&t, 1e-12));
        assert!(!is_dealiased(&f, 1e-3));
    }
}
