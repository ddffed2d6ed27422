use num_complex::Complex64;

use crate::spectral::{Field, Grid, Spectrum};

/// Accumulates a source term `Σ c_i ∂^{a_i} f_i` directly in Fourier space
/// and inverts the flat Laplacian on it.
///
/// The inversion keeps only non-zero modes inside the 2/3 dealiasing set;
/// the zero mode is returned separately as the part `Δ⁻¹` cannot absorb.
pub(crate) struct SourceBuilder {
    grid: Grid,
    acc: Vec<Complex64>,
}

impl SourceBuilder {
    pub(crate) fn new(grid: &Grid) -> Self {
        Self {
            grid: grid.clone(),
            acc: vec![Complex64::new(0.0, 0.0); grid.len()],
        }
    }

    /// `+= c f`.
    pub(crate) fn add(&mut self, f: &Field, c: f64) {
        let sp = Spectrum::of(f);
        for (a, v) in self.acc.iter_mut().zip(sp.coeffs()) {
            *a += v * c;
        }
    }

    /// `+= c ∂_axis f` for `f` given by its spectrum.
    pub(crate) fn add_spectrum_derivative(&mut self, sp: &Spectrum, axis: usize, c: f64) {
        for (k, (a, v)) in self.acc.iter_mut().zip(sp.coeffs()).enumerate() {
            *a += v * Complex64::new(0.0, c * self.grid.xi(k, axis));
        }
    }

    /// `Δ⁻¹` of the dealiased, mean-free part and the mean of the source.
    pub(crate) fn solve(self) -> (Field, Complex64) {
        let grid = self.grid;
        let mean = self.acc[0] / grid.len() as f64;
        let mut out: Vec<Complex64> = self
            .acc
            .into_iter()
            .enumerate()
            .map(|(k, v)| {
                if k == 0 || !grid.keeps(k) {
                    Complex64::new(0.0, 0.0)
                } else {
                    -v / grid.xi2(k)
                }
            })
            .collect();
        grid.inverse(&mut out);
        (Field::from_vec(&grid, out).expect("sized"), mean)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn inverts_laplacian_on_mean_free_band_limited() {
        let g = Grid::new(2, 16, 2.0 * PI).unwrap();
        let u = Field::from_real_fn(&g, |x| (x[0] + 2.0 * x[1]).sin() + 0.5 * (3.0 * x[0]).cos());
        let mut b = SourceBuilder::new(&g);
        b.add(&crate::spectral::laplacian(&u), 1.0);
        b.add(&Field::constant(&g, Complex64::new(2.0, 0.0)), 1.0);
        let (v, mean) = b.solve();
        assert!(v.max_abs_diff(&u) < 1e-13);
        assert!((mean - Complex64::new(2.0, 0.0)).norm() < 1e-14);
    }

    #[test]
    fn derivative_source() {
        // Δ⁻¹ ∂_0 (-cos x0) = Δ⁻¹ sin x0 = -sin x0
        let g = Grid::new(2, 16, 2.0 * PI).unwrap();
        let f = Field::from_real_fn(&g, |x| -x[0].cos());
        let mut b = SourceBuilder::new(&g);
        b.add_spectrum_derivative(&Spectrum::of(&f), 0, 1.0);
        let (v, _) = b.solve();
        let expect = Field::from_real_fn(&g, |x| -x[0].sin());
        assert!(v.max_abs_diff(&expect) < 1e-14);
    }
}
