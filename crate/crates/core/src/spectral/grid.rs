use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::error::{Result, SmcfError};

/// Upper bound on grid points, roughly 2 GiB worth of complex samples per
/// hundred fields. Larger grids are refused at construction.
pub const MAX_POINTS: usize = 1 << 22;

/// Uniform periodic grid on the box `[0, L)^d`.
///
/// Cheap to clone: the FFT plans and the wavenumber tables live behind an
/// `Arc` and are shared by every field on the grid.
#[derive(Clone)]
pub struct Grid {
    inner: Arc<GridInner>,
}

struct GridInner {
    dim: usize,
    n: usize,
    length: f64,
    len: usize,
    fwd: Arc<dyn Fft<f64>>,
    inv: Arc<dyn Fft<f64>>,
    /// Physical wavenumber per axis index, Nyquist mapped to zero.
    k_odd: Vec<f64>,
    /// Physical wavenumber per axis index, Nyquist kept at `n/2`.
    k_even: Vec<f64>,
    /// `|xi|^2` for every flat mode (Nyquist included).
    k2: Vec<f64>,
    /// 2/3-rule mask.
    keep: Vec<bool>,
}

impl Grid {
    /// Builds a `d`-dimensional grid with `n` points per axis on `[0, L)^d`.
    ///
    /// `n` must be even and at least 8. Powers of two are fastest but any
    /// even size works with the mixed-radix FFT.
    pub fn new(dim: usize, n: usize, length: f64) -> Result<Self> {
        if !(1..=4).contains(&dim) {
            return Err(SmcfError::InvalidGrid(format!(
                "dimension {dim} outside 1..=4"
            )));
        }
        if n < 8 || !n.is_multiple_of(2) {
            return Err(SmcfError::InvalidGrid(format!(
                "points per axis must be even and >= 8, got {n}"
            )));
        }
        if !(length.is_finite() && length > 0.0) {
            return Err(SmcfError::InvalidGrid(format!("box length {length}")));
        }
        let len = n
            .checked_pow(dim as u32)
            .filter(|&l| l <= MAX_POINTS)
            .ok_or_else(|| {
                SmcfError::InvalidGrid(format!("{n}^{dim} points exceed the memory budget"))
            })?;

        let mut planner = FftPlanner::new();
        let fwd = planner.plan_fft_forward(n);
        let inv = planner.plan_fft_inverse(n);

        let scale = 2.0 * std::f64::consts::PI / length;
        let half = (n / 2) as i64;
        let mut k_odd = Vec::with_capacity(n);
        let mut k_even = Vec::with_capacity(n);
        for j in 0..n as i64 {
            let m = if j < half { j } else { j - n as i64 };
            k_even.push(if j == half {
                half as f64 * scale
            } else {
                m as f64 * scale
            });
            k_odd.push(if j == half { 0.0 } else { m as f64 * scale });
        }

        // 2/3 rule on integer mode index: keep |m| < n/3 on every axis.
        let cutoff = n as f64 / 3.0;
        let mut k2 = vec![0.0; len];
        let mut keep = vec![true; len];
        let mut idx = vec![0usize; dim];
        for flat in 0..len {
            unflatten(flat, n, &mut idx);
            let mut s = 0.0;
            let mut ok = true;
            for &i in &idx {
                s += k_even[i] * k_even[i];
                let m = if i < n / 2 {
                    i as f64
                } else {
                    n as f64 - i as f64
                };
                if m >= cutoff {
                    ok = false;
                }
            }
            k2[flat] = s;
            keep[flat] = ok;
        }

        Ok(Self {
            inner: Arc::new(GridInner {
                dim,
                n,
                length,
                len,
                fwd,
                inv,
                k_odd,
                k_even,
                k2,
                keep,
            }),
        })
    }

    pub fn dim(&self) -> usize {
        self.inner.dim
    }

    pub fn n(&self) -> usize {
        self.inner.n
    }

    pub fn length(&self) -> f64 {
        self.inner.length
    }

    /// Total number of grid points, `n^d`.
    pub fn len(&self) -> usize {
        self.inner.len
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn dx(&self) -> f64 {
        self.inner.length / self.inner.n as f64
    }

    /// Volume element `dx^d` used by every quadrature on the grid.
    pub fn cell_volume(&self) -> f64 {
        self.dx().powi(self.inner.dim as i32)
    }

    pub fn volume(&self) -> f64 {
        self.inner.length.powi(self.inner.dim as i32)
    }

    /// Physical coordinate of grid point `flat` along `axis`.
    pub fn coord(&self, flat: usize, axis: usize) -> f64 {
        let stride = self.stride(axis);
        let i = (flat / stride) % self.inner.n;
        i as f64 * self.dx()
    }

    /// Row-major stride of `axis` (axis 0 varies slowest).
    pub fn stride(&self, axis: usize) -> usize {
        self.inner.n.pow((self.inner.dim - 1 - axis) as u32)
    }

    pub(crate) fn axis_index(&self, flat: usize, axis: usize) -> usize {
        (flat / self.stride(axis)) % self.inner.n
    }

    /// Wavenumber of mode `flat` along `axis` for odd-order multipliers
    /// (Nyquist mapped to zero so real fields stay real).
    pub fn xi(&self, flat: usize, axis: usize) -> f64 {
        self.inner.k_odd[self.axis_index(flat, axis)]
    }

    /// Wavenumber along `axis` with the Nyquist mode kept at `+n/2`.
    pub fn xi_even(&self, flat: usize, axis: usize) -> f64 {
        self.inner.k_even[self.axis_index(flat, axis)]
    }

    /// `|xi|^2` of mode `flat`.
    pub fn xi2(&self, flat: usize) -> f64 {
        self.inner.k2[flat]
    }

    pub fn xi_norm(&self, flat: usize) -> f64 {
        self.inner.k2[flat].sqrt()
    }

    pub fn keeps(&self, flat: usize) -> bool {
        self.inner.keep[flat]
    }

    /// Largest `|xi|` retained by the 2/3 rule along a single axis.
    pub fn dealias_radius(&self) -> f64 {
        (self.inner.n as f64 / 3.0).floor() * 2.0 * std::f64::consts::PI / self.inner.length
    }

    /// Unnormalized forward transform in place.
    pub(crate) fn forward(&self, data: &mut [Complex64]) {
        self.transform(data, &self.inner.fwd);
    }

    /// Inverse transform in place, normalized by `1/n^d`.
    pub(crate) fn inverse(&self, data: &mut [Complex64]) {
        self.transform(data, &self.inner.inv);
        let s = 1.0 / self.inner.len as f64;
        for v in data.iter_mut() {
            *v *= s;
        }
    }

    fn transform(&self, data: &mut [Complex64], plan: &Arc<dyn Fft<f64>>) {
        debug_assert_eq!(data.len(), self.inner.len);
        let n = self.inner.n;
        let len = self.inner.len;
        let mut scratch = vec![Complex64::new(0.0, 0.0); plan.get_inplace_scratch_len()];
        // Last axis is contiguous: transform every line in one call.
        plan.process_with_scratch(data, &mut scratch);
        if self.inner.dim == 1 {
            return;
        }
        let mut buf = vec![Complex64::new(0.0, 0.0); len];
        for axis in 0..self.inner.dim - 1 {
            let stride = self.stride(axis);
            let block = n * stride;
            // gather lines along `axis` into contiguous rows
            let mut row = 0;
            for outer in (0..len).step_by(block) {
                for inner in 0..stride {
                    let base = outer + inner;
                    let dst = &mut buf[row * n..(row + 1) * n];
                    for (j, d) in dst.iter_mut().enumerate() {
                        *d = data[base + j * stride];
                    }
                    row += 1;
                }
            }
            plan.process_with_scratch(&mut buf, &mut scratch);
            let mut row = 0;
            for outer in (0..len).step_by(block) {
                for inner in 0..stride {
                    let base = outer + inner;
                    let src = &buf[row * n..(row + 1) * n];
                    for (j, s) in src.iter().enumerate() {
                        data[base + j * stride] = *s;
                    }
                    row += 1;
                }
            }
        }
    }
}

pub(crate) fn unflatten(mut flat: usize, n: usize, out: &mut [usize]) {
    for slot in out.iter_mut().rev() {
        *slot = flat % n;
        flat /= n;
    }
}

impl PartialEq for Grid {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.inner, &other.inner)
            || (self.inner.dim == other.inner.dim
                && self.inner.n == other.inner.n
                && self.inner.length == other.inner.length)
    }
}

impl fmt::Debug for Grid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Grid")
            .field("dim", &self.inner.dim)
            .field("n", &self.inner.n)
            .field("length", &self.inner.length)
            .finish()
    }
}
