use std::ops::{Add, AddAssign, Mul, Neg, Sub, SubAssign};

use num_complex::Complex64;

use super::grid::Grid;
use crate::error::{Result, SmcfError};

/// Complex samples on a periodic grid, row-major with axis 0 slowest.
///
/// Real-valued quantities (metric, connection, advection field) use the same
/// type with a vanishing imaginary part; [`Field::re`] re-projects after
/// spectral operations.
#[derive(Clone, Debug)]
pub struct Field {
    grid: Grid,
    data: Vec<Complex64>,
}

pub type ComplexField = Field;

impl Field {
    pub fn zeros(grid: &Grid) -> Self {
        Self {
            grid: grid.clone(),
            data: vec![Complex64::new(0.0, 0.0); grid.len()],
        }
    }

    pub fn constant(grid: &Grid, value: Complex64) -> Self {
        Self {
            grid: grid.clone(),
            data: vec![value; grid.len()],
        }
    }

    pub fn from_vec(grid: &Grid, data: Vec<Complex64>) -> Result<Self> {
        if data.len() != grid.len() {
            return Err(SmcfError::ShapeMismatch(format!(
                "{} samples for a grid of {} points",
                data.len(),
                grid.len()
            )));
        }
        Ok(Self {
            grid: grid.clone(),
            data,
        })
    }

    /// Samples `f(x)` at every grid point.
    pub fn from_fn(grid: &Grid, mut f: impl FnMut(&[f64]) -> Complex64) -> Self {
        let d = grid.dim();
        let mut x = vec![0.0; d];
        let data = (0..grid.len())
            .map(|flat| {
                for (a, xa) in x.iter_mut().enumerate() {
                    *xa = grid.coord(flat, a);
                }
                f(&x)
            })
            .collect();
        Self {
            grid: grid.clone(),
            data,
        }
    }

    pub fn from_real_fn(grid: &Grid, mut f: impl FnMut(&[f64]) -> f64) -> Self {
        Self::from_fn(grid, |x| Complex64::new(f(x), 0.0))
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn values(&self) -> &[Complex64] {
        &self.data
    }

    pub fn values_mut(&mut self) -> &mut [Complex64] {
        &mut self.data
    }

    pub fn into_values(self) -> Vec<Complex64> {
        self.data
    }

    pub fn map(&self, f: impl Fn(Complex64) -> Complex64) -> Self {
        Self {
            grid: self.grid.clone(),
            data: self.data.iter().map(|&v| f(v)).collect(),
        }
    }

    pub fn zip_map(&self, other: &Field, f: impl Fn(Complex64, Complex64) -> Complex64) -> Self {
        debug_assert!(self.grid == other.grid);
        Self {
            grid: self.grid.clone(),
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        }
    }

    pub fn scale(&self, c: f64) -> Self {
        self.map(|v| v * c)
    }

    pub fn scale_c(&self, c: Complex64) -> Self {
        self.map(|v| v * c)
    }

    pub fn conj(&self) -> Self {
        self.map(|v| v.conj())
    }

    /// Real part as a (real-valued) field.
    pub fn re(&self) -> Self {
        self.map(|v| Complex64::new(v.re, 0.0))
    }

    /// Imaginary part as a (real-valued) field.
    pub fn im(&self) -> Self {
        self.map(|v| Complex64::new(v.im, 0.0))
    }

    pub fn abs2(&self) -> Self {
        self.map(|v| Complex64::new(v.norm_sqr(), 0.0))
    }

    /// `self += c * other`
    pub fn axpy(&mut self, c: Complex64, other: &Field) {
        debug_assert!(self.grid == other.grid);
        for (a, b) in self.data.iter_mut().zip(&other.data) {
            *a += c * b;
        }
    }

    /// `self += other1 * other2` pointwise.
    pub fn add_product(&mut self, a: &Field, b: &Field) {
        for ((s, x), y) in self.data.iter_mut().zip(&a.data).zip(&b.data) {
            *s += x * y;
        }
    }

    /// `self += c * other1 * other2` pointwise.
    pub fn add_scaled_product(&mut self, c: Complex64, a: &Field, b: &Field) {
        for ((s, x), y) in self.data.iter_mut().zip(&a.data).zip(&b.data) {
            *s += c * x * y;
        }
    }

    /// Grid-point mean.
    pub fn mean(&self) -> Complex64 {
        let s: Complex64 = self.data.iter().sum();
        s / self.data.len() as f64
    }

    pub fn sub_mean(&self) -> Self {
        let m = self.mean();
        self.map(|v| v - m)
    }

    /// `(∫|f|^2 dx)^{1/2}` by the rectangle rule (spectrally accurate on the torus).
    pub fn norm_l2(&self) -> f64 {
        (self.data.iter().map(|v| v.norm_sqr()).sum::<f64>() * self.grid.cell_volume()).sqrt()
    }

    pub fn norm_lp(&self, p: f64) -> f64 {
        if p.is_infinite() {
            return self.norm_linf();
        }
        (self.data.iter().map(|v| v.norm().powf(p)).sum::<f64>() * self.grid.cell_volume())
            .powf(1.0 / p)
    }

    pub fn norm_linf(&self) -> f64 {
        self.data.iter().fold(0.0, |m, v| m.max(v.norm()))
    }

    /// `∫ f conj(g) dx`
    pub fn inner(&self, other: &Field) -> Complex64 {
        let s: Complex64 = self
            .data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| a * b.conj())
            .sum();
        s * self.grid.cell_volume()
    }

    pub fn is_finite(&self) -> bool {
        self.data
            .iter()
            .all(|v| v.re.is_finite() && v.im.is_finite())
    }

    /// Largest `|imag|` over the grid.
    pub fn max_imag(&self) -> f64 {
        self.data.iter().fold(0.0, |m, v| m.max(v.im.abs()))
    }

    pub fn max_abs_diff(&self, other: &Field) -> f64 {
        self.data
            .iter()
            .zip(&other.data)
            .fold(0.0, |m, (a, b)| m.max((a - b).norm()))
    }

    pub(crate) fn check_grid(&self, other: &Field) -> Result<()> {
        if self.grid != other.grid {
            return Err(SmcfError::ShapeMismatch(format!(
                "fields on {:?} and {:?}",
                self.grid, other.grid
            )));
        }
        Ok(())
    }
}

impl<'a> Add<&'a Field> for &'a Field {
    type Output = Field;
    fn add(self, rhs: &Field) -> Field {
        self.zip_map(rhs, |a, b| a + b)
    }
}

impl<'a> Sub<&'a Field> for &'a Field {
    type Output = Field;
    fn sub(self, rhs: &Field) -> Field {
        self.zip_map(rhs, |a, b| a - b)
    }
}

impl<'a> Mul<&'a Field> for &'a Field {
    type Output = Field;
    fn mul(self, rhs: &Field) -> Field {
        self.zip_map(rhs, |a, b| a * b)
    }
}

impl Neg for &Field {
    type Output = Field;
    fn neg(self) -> Field {
        self.map(|v| -v)
    }
}

impl AddAssign<&Field> for Field {
    fn add_assign(&mut self, rhs: &Field) {
        for (a, b) in self.data.iter_mut().zip(&rhs.data) {
            *a += b;
        }
    }
}

impl SubAssign<&Field> for Field {
    fn sub_assign(&mut self, rhs: &Field) {
        for (a, b) in self.data.iter_mut().zip(&rhs.data) {
            *a -= b;
        }
    }
}
