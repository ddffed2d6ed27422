use num_complex::Complex64;

use super::metric::MetricField;
use super::tensor::Tensor;
use crate::error::{Result, SmcfError};
use crate::spectral::{Field, Grid};

/// Complex second fundamental form `λ_{αβ}`, stored row-major `d×d`.
#[derive(Clone, Debug)]
pub struct SecondFundamentalField {
    grid: Grid,
    comps: Vec<Field>,
}

impl SecondFundamentalField {
    pub fn zeros(grid: &Grid) -> Self {
        let d = grid.dim();
        Self {
            grid: grid.clone(),
            comps: vec![Field::zeros(grid); d * d],
        }
    }

    /// Symmetrizes the input: `λ_{αβ} = (m_{αβ} + m_{βα}) / 2`.
    pub fn new(grid: &Grid, comps: Vec<Field>) -> Result<Self> {
        let mut s = Self::from_raw(grid, comps)?;
        s.symmetrize();
        Ok(s)
    }

    /// Keeps the components exactly as given, asymmetry included. Used to
    /// probe the symmetry residual.
    pub fn from_raw(grid: &Grid, comps: Vec<Field>) -> Result<Self> {
        let d = grid.dim();
        if comps.len() != d * d {
            return Err(SmcfError::IndexStructure(format!(
                "second fundamental form needs {} components, got {}",
                d * d,
                comps.len()
            )));
        }
        Ok(Self {
            grid: grid.clone(),
            comps,
        })
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn dim(&self) -> usize {
        self.grid.dim()
    }

    pub fn get(&self, a: usize, b: usize) -> &Field {
        &self.comps[a * self.dim() + b]
    }

    pub fn comps(&self) -> &[Field] {
        &self.comps
    }

    pub(crate) fn comps_mut(&mut self) -> &mut [Field] {
        &mut self.comps
    }

    pub(crate) fn symmetrize(&mut self) {
        let d = self.dim();
        for a in 0..d {
            for b in a + 1..d {
                let s = self.comps[a * d + b].zip_map(&self.comps[b * d + a], |x, y| (x + y) * 0.5);
                self.comps[b * d + a] = s.clone();
                self.comps[a * d + b] = s;
            }
        }
    }

    pub fn as_tensor(&self) -> Tensor {
        Tensor::from_components(&self.grid, 0, 2, self.comps.clone()).expect("sized")
    }

    /// `g^{αβ} λ_{αβ}`.
    pub fn trace(&self, g: &MetricField) -> Field {
        let d = self.dim();
        let mut acc = Field::zeros(&self.grid);
        for a in 0..d {
            for b in 0..d {
                acc.add_product(g.ginv(a, b), self.get(a, b));
            }
        }
        acc
    }

    /// `λ^γ_α = g^{γμ} λ_{μα}`, indexed `[γ][α]`.
    pub fn mixed(&self, g: &MetricField) -> Vec<Field> {
        let d = self.dim();
        let mut out = Vec::with_capacity(d * d);
        for c in 0..d {
            for a in 0..d {
                let mut acc = Field::zeros(&self.grid);
                for m in 0..d {
                    acc.add_product(g.ginv(c, m), self.get(m, a));
                }
                out.push(acc);
            }
        }
        out
    }

    /// `λ^{αβ} = g^{αμ} λ^β_μ`, indexed `[α][β]`, from precomputed mixed components.
    pub fn raised(&self, g: &MetricField, mixed: &[Field]) -> Vec<Field> {
        let d = self.dim();
        let mut out = Vec::with_capacity(d * d);
        for a in 0..d {
            for b in 0..d {
                let mut acc = Field::zeros(&self.grid);
                for m in 0..d {
                    acc.add_product(g.ginv(a, m), &mixed[b * d + m]);
                }
                out.push(acc);
            }
        }
        out
    }

    pub fn norm_linf(&self) -> f64 {
        self.comps.iter().fold(0.0, |m, c| m.max(c.norm_linf()))
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.comps
            .iter()
            .zip(&other.comps)
            .fold(0.0, |m, (a, b)| m.max(a.max_abs_diff(b)))
    }

    pub fn scale_c(&self, c: Complex64) -> Self {
        Self {
            grid: self.grid.clone(),
            comps: self.comps.iter().map(|f| f.scale_c(c)).collect(),
        }
    }
}

/// Normal-bundle connection `A_α`, temporal coefficient `B` and advection
/// field `V^γ`. All real-valued.
#[derive(Clone, Debug)]
pub struct ConnectionField {
    pub a: Vec<Field>,
    pub b: Field,
    pub v: Vec<Field>,
}

impl ConnectionField {
    pub fn zeros(grid: &Grid) -> Self {
        let d = grid.dim();
        Self {
            a: vec![Field::zeros(grid); d],
            b: Field::zeros(grid),
            v: vec![Field::zeros(grid); d],
        }
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        let va = self
            .a
            .iter()
            .zip(&other.a)
            .chain(self.v.iter().zip(&other.v))
            .fold(0.0_f64, |m, (x, y)| m.max(x.max_abs_diff(y)));
        va.max(self.b.max_abs_diff(&other.b))
    }

    pub fn is_finite(&self) -> bool {
        self.a.iter().chain(&self.v).all(Field::is_finite) && self.b.is_finite()
    }
}
