use nalgebra::DMatrix;
use num_complex::Complex64;

use super::tensor::Tensor;
use crate::error::{Result, SmcfError};
use crate::spectral::{gradient, Field, Grid};

/// Riemannian metric `g = I + h` on the grid with the derived quantities
/// every tensor operation needs, computed once at construction.
#[derive(Clone, Debug)]
pub struct MetricField {
    grid: Grid,
    h: Vec<Field>,
    g_inv: Vec<Field>,
    sqrt_det: Field,
    /// `dg[c][a][b] = ∂_c g_ab`
    dg: Vec<Field>,
    /// `gamma[γ][α][β] = Γ^γ_{αβ}`
    gamma: Vec<Field>,
    min_eig: f64,
}

fn real(v: Complex64) -> Complex64 {
    Complex64::new(v.re, 0.0)
}

impl MetricField {
    pub fn flat(grid: &Grid) -> Self {
        let d = grid.dim();
        Self::new(grid, vec![Field::zeros(grid); d * d]).expect("identity metric is valid")
    }

    /// Builds the metric from the perturbation `h` (row-major `d×d`).
    ///
    /// Only the real part is used and `h` is symmetrized, so symmetry holds
    /// exactly. Fails with [`SmcfError::LostPositivity`] if `I + h` is not
    /// positive definite at some grid point.
    pub fn new(grid: &Grid, h: Vec<Field>) -> Result<Self> {
        let d = grid.dim();
        if h.len() != d * d {
            return Err(SmcfError::IndexStructure(format!(
                "metric perturbation needs {} components, got {}",
                d * d,
                h.len()
            )));
        }
        let mut hs = vec![Field::zeros(grid); d * d];
        for a in 0..d {
            for b in a..d {
                let s = if a == b {
                    h[a * d + a].re()
                } else {
                    h[a * d + b].zip_map(&h[b * d + a], |x, y| real((x + y) * 0.5))
                };
                hs[b * d + a] = s.clone();
                hs[a * d + b] = s;
            }
        }

        let n = grid.len();
        let mut g_inv_data = vec![vec![Complex64::new(0.0, 0.0); n]; d * d];
        let mut sd = vec![Complex64::new(0.0, 0.0); n];
        let mut min_eig = f64::INFINITY;
        let mut m = DMatrix::<f64>::zeros(d, d);
        for p in 0..n {
            for a in 0..d {
                for b in 0..d {
                    m[(a, b)] = hs[a * d + b].values()[p].re + if a == b { 1.0 } else { 0.0 };
                }
            }
            if !m.iter().all(|v| v.is_finite()) {
                return Err(SmcfError::NonFinite {
                    stage: "metric".into(),
                    t: f64::NAN,
                });
            }
            let eig = m.clone().symmetric_eigenvalues().min();
            min_eig = min_eig.min(eig);
            if eig <= 0.0 {
                return Err(SmcfError::LostPositivity {
                    min_eigenvalue: eig,
                });
            }
            let chol = m.clone().cholesky().ok_or(SmcfError::LostPositivity {
                min_eigenvalue: eig,
            })?;
            let det_sqrt: f64 = chol.l_dirty().diagonal().iter().product();
            sd[p] = Complex64::new(det_sqrt, 0.0);
            let inv = chol.inverse();
            for a in 0..d {
                for b in 0..d {
                    g_inv_data[a * d + b][p] = Complex64::new(inv[(a, b)], 0.0);
                }
            }
        }
        let g_inv: Vec<Field> = g_inv_data
            .into_iter()
            .map(|v| Field::from_vec(grid, v).expect("sized"))
            .collect();
        let sqrt_det = Field::from_vec(grid, sd).expect("sized");

        // derivatives of the independent entries, mirrored
        let mut dg = vec![Field::zeros(grid); d * d * d];
        for a in 0..d {
            for b in a..d {
                let grad = gradient(&hs[a * d + b]);
                for (c, gc) in grad.into_iter().enumerate() {
                    let gc = gc.re();
                    dg[c * d * d + b * d + a] = gc.clone();
                    dg[c * d * d + a * d + b] = gc;
                }
            }
        }

        let mut first = vec![Field::zeros(grid); d * d * d];
        for s in 0..d {
            for a in 0..d {
                for b in a..d {
                    let mut f = dg[b * d * d + a * d + s].clone();
                    f += &dg[a * d * d + b * d + s];
                    f -= &dg[s * d * d + a * d + b];
                    let f = f.scale(0.5);
                    first[s * d * d + b * d + a] = f.clone();
                    first[s * d * d + a * d + b] = f;
                }
            }
        }
        let mut gamma = vec![Field::zeros(grid); d * d * d];
        for c in 0..d {
            for a in 0..d {
                for b in a..d {
                    let mut acc = Field::zeros(grid);
                    for s in 0..d {
                        acc.add_product(&g_inv[c * d + s], &first[s * d * d + a * d + b]);
                    }
                    gamma[c * d * d + b * d + a] = acc.clone();
                    gamma[c * d * d + a * d + b] = acc;
                }
            }
        }

        Ok(Self {
            grid: grid.clone(),
            h: hs,
            g_inv,
            sqrt_det,
            dg,
            gamma,
            min_eig,
        })
    }

    /// Builds from full metric components `g_ab` instead of `h`.
    pub fn from_metric(grid: &Grid, g: Vec<Field>) -> Result<Self> {
        let d = grid.dim();
        let h = g
            .into_iter()
            .enumerate()
            .map(|(k, f)| {
                if k / d == k % d {
                    f.map(|v| v - 1.0)
                } else {
                    f
                }
            })
            .collect();
        Self::new(grid, h)
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn dim(&self) -> usize {
        self.grid.dim()
    }

    pub fn h(&self, a: usize, b: usize) -> &Field {
        &self.h[a * self.dim() + b]
    }

    pub fn h_comps(&self) -> &[Field] {
        &self.h
    }

    /// `g_ab = δ_ab + h_ab` (allocates).
    pub fn g(&self, a: usize, b: usize) -> Field {
        let h = self.h(a, b);
        if a == b {
            h.map(|v| v + 1.0)
        } else {
            h.clone()
        }
    }

    pub fn ginv(&self, a: usize, b: usize) -> &Field {
        &self.g_inv[a * self.dim() + b]
    }

    pub fn sqrt_det(&self) -> &Field {
        &self.sqrt_det
    }

    pub fn dg(&self, c: usize, a: usize, b: usize) -> &Field {
        let d = self.dim();
        &self.dg[c * d * d + a * d + b]
    }

    /// `∂_c g^{ab} = -g^{ai} ∂_c g_ij g^{jb}` (allocates).
    pub fn dginv(&self, c: usize, a: usize, b: usize) -> Field {
        let d = self.dim();
        let mut acc = Field::zeros(&self.grid);
        for i in 0..d {
            for j in 0..d {
                let t = self.ginv(a, i) * self.dg(c, i, j);
                acc.add_scaled_product(Complex64::new(-1.0, 0.0), &t, self.ginv(j, b));
            }
        }
        acc
    }

    /// `Γ^c_{ab}`.
    pub fn christoffel(&self, c: usize, a: usize, b: usize) -> &Field {
        let d = self.dim();
        &self.gamma[c * d * d + a * d + b]
    }

    /// First-kind symbol `Γ_{s,ab} = g_{sm} Γ^m_{ab}` (allocates).
    pub fn christoffel_first(&self, s: usize, a: usize, b: usize) -> Field {
        let mut f = self.dg(b, a, s).clone();
        f += self.dg(a, b, s);
        f -= self.dg(s, a, b);
        f.scale(0.5)
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.min_eig
    }

    /// `g^{ab} Γ^c_{ab}` for each `c`; vanishes in harmonic coordinates.
    pub fn harmonic_residual(&self) -> Vec<Field> {
        let d = self.dim();
        (0..d)
            .map(|c| {
                let mut acc = Field::zeros(&self.grid);
                for a in 0..d {
                    for b in 0..d {
                        acc.add_product(self.ginv(a, b), self.christoffel(c, a, b));
                    }
                }
                acc
            })
            .collect()
    }

    /// The metric itself as a `(0,2)` tensor.
    pub fn as_tensor(&self) -> Tensor {
        let d = self.dim();
        let comps = (0..d * d).map(|k| self.g(k / d, k % d)).collect();
        Tensor::from_components(&self.grid, 0, 2, comps).expect("sized")
    }

    /// Inverse metric as a `(2,0)` tensor.
    pub fn inverse_tensor(&self) -> Tensor {
        Tensor::from_components(&self.grid, 2, 0, self.g_inv.clone()).expect("sized")
    }

    /// `∫ f √det g dx`.
    pub fn integrate(&self, f: &Field) -> Complex64 {
        let s: Complex64 = f
            .values()
            .iter()
            .zip(self.sqrt_det.values())
            .map(|(a, w)| a * w.re)
            .sum();
        s * self.grid.cell_volume()
    }

    /// Laplace-Beltrami `g^{ab}(∂_a∂_b f - Γ^c_{ab}∂_c f)`.
    pub fn laplace_beltrami(&self, f: &Field) -> Field {
        let d = self.dim();
        let hess = crate::spectral::hessian(f);
        let grad = gradient(f);
        let mut out = Field::zeros(&self.grid);
        for a in 0..d {
            for b in 0..d {
                let mut inner = hess[a * d + b].clone();
                for (c, gc) in grad.iter().enumerate() {
                    inner.add_scaled_product(
                        Complex64::new(-1.0, 0.0),
                        self.christoffel(c, a, b),
                        gc,
                    );
                }
                out.add_product(self.ginv(a, b), &inner);
            }
        }
        out
    }

    /// `max |g_ac g^{cb} - δ_ab|` over the grid.
    pub fn inverse_defect(&self) -> f64 {
        let d = self.dim();
        let mut worst: f64 = 0.0;
        for a in 0..d {
            for b in 0..d {
                let mut acc = Field::zeros(&self.grid);
                for c in 0..d {
                    acc.add_product(&self.g(a, c), self.ginv(c, b));
                }
                let delta = if a == b { 1.0 } else { 0.0 };
                worst = worst.max(acc.map(|v| v - delta).norm_linf());
            }
        }
        worst
    }
}
