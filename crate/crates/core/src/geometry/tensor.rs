use num_complex::Complex64;

use super::metric::MetricField;
use crate::error::{Result, SmcfError};
use crate::spectral::{Field, Grid, Spectrum};

/// A tensor field with `upper` contravariant and `lower` covariant indices.
///
/// Components are stored for every multi-index, upper indices first, in
/// base-`d` order with the first index most significant. No symmetry is
/// assumed, so the layout is uniform for every operation that appends or
/// contracts an index.
#[derive(Clone, Debug)]
pub struct Tensor {
    grid: Grid,
    upper: usize,
    lower: usize,
    comps: Vec<Field>,
}

impl Tensor {
    pub fn zeros(grid: &Grid, upper: usize, lower: usize) -> Self {
        let count = grid.dim().pow((upper + lower) as u32);
        Self {
            grid: grid.clone(),
            upper,
            lower,
            comps: vec![Field::zeros(grid); count],
        }
    }

    pub fn from_components(
        grid: &Grid,
        upper: usize,
        lower: usize,
        comps: Vec<Field>,
    ) -> Result<Self> {
        let count = grid.dim().pow((upper + lower) as u32);
        if comps.len() != count {
            return Err(SmcfError::IndexStructure(format!(
                "({upper},{lower}) tensor in dimension {} needs {count} components, got {}",
                grid.dim(),
                comps.len()
            )));
        }
        for c in &comps {
            if c.grid() != grid {
                return Err(SmcfError::ShapeMismatch(
                    "component on a different grid".into(),
                ));
            }
        }
        Ok(Self {
            grid: grid.clone(),
            upper,
            lower,
            comps,
        })
    }

    pub fn scalar(f: Field) -> Self {
        Self {
            grid: f.grid().clone(),
            upper: 0,
            lower: 0,
            comps: vec![f],
        }
    }

    pub fn covector(comps: Vec<Field>) -> Result<Self> {
        let grid = comps
            .first()
            .ok_or_else(|| SmcfError::IndexStructure("empty covector".into()))?
            .grid()
            .clone();
        Self::from_components(&grid, 0, 1, comps)
    }

    pub fn vector(comps: Vec<Field>) -> Result<Self> {
        let grid = comps
            .first()
            .ok_or_else(|| SmcfError::IndexStructure("empty vector".into()))?
            .grid()
            .clone();
        Self::from_components(&grid, 1, 0, comps)
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn dim(&self) -> usize {
        self.grid.dim()
    }

    pub fn upper(&self) -> usize {
        self.upper
    }

    pub fn lower(&self) -> usize {
        self.lower
    }

    pub fn rank(&self) -> usize {
        self.upper + self.lower
    }

    pub fn comps(&self) -> &[Field] {
        &self.comps
    }

    pub fn comps_mut(&mut self) -> &mut [Field] {
        &mut self.comps
    }

    pub fn into_comps(self) -> Vec<Field> {
        self.comps
    }

    pub fn index_of(&self, idx: &[usize]) -> usize {
        debug_assert_eq!(idx.len(), self.rank());
        idx.iter().fold(0, |acc, &i| acc * self.dim() + i)
    }

    pub fn multi_index(&self, mut flat: usize) -> Vec<usize> {
        let d = self.dim();
        let mut idx = vec![0; self.rank()];
        for slot in idx.iter_mut().rev() {
            *slot = flat % d;
            flat /= d;
        }
        idx
    }

    pub fn component(&self, idx: &[usize]) -> &Field {
        &self.comps[self.index_of(idx)]
    }

    pub fn component_mut(&mut self, idx: &[usize]) -> &mut Field {
        let k = self.index_of(idx);
        &mut self.comps[k]
    }

    fn check_shape(&self, other: &Tensor) -> Result<()> {
        if self.upper != other.upper || self.lower != other.lower || self.grid != other.grid {
            return Err(SmcfError::IndexStructure(format!(
                "({},{}) vs ({},{})",
                self.upper, self.lower, other.upper, other.lower
            )));
        }
        Ok(())
    }

    pub fn sub(&self, other: &Tensor) -> Result<Tensor> {
        self.check_shape(other)?;
        Ok(Tensor {
            grid: self.grid.clone(),
            upper: self.upper,
            lower: self.lower,
            comps: self
                .comps
                .iter()
                .zip(&other.comps)
                .map(|(a, b)| a - b)
                .collect(),
        })
    }

    pub fn scale_c(&self, c: Complex64) -> Tensor {
        Tensor {
            grid: self.grid.clone(),
            upper: self.upper,
            lower: self.lower,
            comps: self.comps.iter().map(|f| f.scale_c(c)).collect(),
        }
    }

    pub fn max_abs_diff(&self, other: &Tensor) -> f64 {
        self.comps
            .iter()
            .zip(&other.comps)
            .fold(0.0, |m, (a, b)| m.max(a.max_abs_diff(b)))
    }

    pub fn norm_linf(&self) -> f64 {
        self.comps.iter().fold(0.0, |m, c| m.max(c.norm_linf()))
    }

    /// Flat `(Σ_components ∫|T|^2 dx)^{1/2}`.
    pub fn norm_l2(&self) -> f64 {
        self.comps
            .iter()
            .map(|c| c.norm_l2().powi(2))
            .sum::<f64>()
            .sqrt()
    }

    /// Flat `H^k` norm: all partial derivatives up to order `k` of all
    /// components, evaluated exactly on the Fourier side.
    pub fn flat_sobolev_norm(&self, k: usize) -> f64 {
        let g = &self.grid;
        self.comps
            .iter()
            .map(|c| {
                Spectrum::of(c).weighted_energy(|m| {
                    let x = g.xi2(m);
                    (0..=k).map(|l| x.powi(l as i32)).sum()
                })
            })
            .sum::<f64>()
            .sqrt()
    }

    /// Replaces index slot `pos` by `Σ_b M(a, b) T[.., b, ..]`.
    fn transform_slot(&self, pos: usize, m: &dyn Fn(usize, usize) -> Field) -> Vec<Field> {
        let d = self.dim();
        let stride = d.pow((self.rank() - 1 - pos) as u32);
        let mats: Vec<Field> = (0..d * d).map(|k| m(k / d, k % d)).collect();
        (0..self.comps.len())
            .map(|flat| {
                let a = (flat / stride) % d;
                let base = flat - a * stride;
                let mut acc = Field::zeros(&self.grid);
                for b in 0..d {
                    acc.add_product(&mats[a * d + b], &self.comps[base + b * stride]);
                }
                acc
            })
            .collect()
    }

    /// Raises lower slot `j` (counted among the lower indices) with `g^{-1}`;
    /// the raised index is moved to the end of the upper block.
    pub fn raise(&self, j: usize, g: &MetricField) -> Result<Tensor> {
        if j >= self.lower {
            return Err(SmcfError::IndexStructure(format!("no lower slot {j}")));
        }
        let pos = self.upper + j;
        let comps = self.transform_slot(pos, &|a, b| g.ginv(a, b).clone());
        let t = Tensor {
            grid: self.grid.clone(),
            upper: self.upper,
            lower: self.lower,
            comps,
        };
        Ok(t.move_slot(pos, self.upper)
            .with_counts(self.upper + 1, self.lower - 1))
    }

    /// Lowers upper slot `i` with `g`; the lowered index becomes the first
    /// lower slot.
    pub fn lower_index(&self, i: usize, g: &MetricField) -> Result<Tensor> {
        if i >= self.upper {
            return Err(SmcfError::IndexStructure(format!("no upper slot {i}")));
        }
        let comps = self.transform_slot(i, &|a, b| g.g(a, b));
        let t = Tensor {
            grid: self.grid.clone(),
            upper: self.upper,
            lower: self.lower,
            comps,
        };
        Ok(t.move_slot(i, self.upper - 1)
            .with_counts(self.upper - 1, self.lower + 1))
    }

    fn with_counts(mut self, upper: usize, lower: usize) -> Self {
        self.upper = upper;
        self.lower = lower;
        self
    }

    /// Moves slot `from` to position `to`, shifting the slots in between.
    fn move_slot(self, from: usize, to: usize) -> Tensor {
        if from == to {
            return self;
        }
        let r = self.rank();
        let mut perm: Vec<usize> = (0..r).collect();
        let s = perm.remove(from);
        perm.insert(to, s);
        // perm[new_pos] = old_pos
        let d = self.dim();
        let mut out = vec![Field::zeros(&self.grid); self.comps.len()];
        let mut old = vec![0; r];
        for (flat, slot) in out.iter_mut().enumerate() {
            let new_idx = self.multi_index(flat);
            for (np, &op) in perm.iter().enumerate() {
                old[op] = new_idx[np];
            }
            let k = old.iter().fold(0, |acc, &i| acc * d + i);
            *slot = self.comps[k].clone();
        }
        Tensor {
            grid: self.grid,
            upper: self.upper,
            lower: self.lower,
            comps: out,
        }
    }

    /// Pointwise `|T|^2_g`: every index contracted with the metric.
    pub fn norm2_density(&self, g: &MetricField) -> Field {
        // Build the fully index-flipped tensor, then pair with conj(T).
        let mut t = self.clone();
        for _ in 0..self.lower {
            t = Tensor {
                grid: t.grid.clone(),
                upper: t.upper,
                lower: t.lower,
                comps: t.transform_slot(t.upper, &|a, b| g.ginv(a, b).clone()),
            }
            .move_slot(t.upper, t.rank() - 1);
        }
        for _ in 0..self.upper {
            t = Tensor {
                grid: t.grid.clone(),
                upper: t.upper,
                lower: t.lower,
                comps: t.transform_slot(0, &|a, b| g.g(a, b)),
            }
            .move_slot(0, t.upper.saturating_sub(1));
        }
        // Slot order is preserved by the rotations above, so components
        // pair index for index.
        let mut acc = Field::zeros(&self.grid);
        for (a, b) in t.comps.iter().zip(&self.comps) {
            acc.add_product(a, &b.conj());
        }
        acc.re()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn metric(g: &Grid, eps: f64) -> MetricField {
        let d = g.dim();
        let mut h = vec![Field::zeros(g); d * d];
        for a in 0..d {
            for b in 0..d {
                h[a * d + b] = Field::from_real_fn(g, |x| {
                    eps * ((a + 1) as f64 * x[0] + (b + 1) as f64 * x[d - 1]).sin()
                        * if a == b { 1.0 } else { 0.5 }
                });
            }
        }
        MetricField::new(g, h).unwrap()
    }

    #[test]
    fn raise_then_lower_is_identity() {
        let grid = Grid::new(2, 8, 2.0 * PI).unwrap();
        let g = metric(&grid, 0.1);
        let comps: Vec<Field> = (0..8)
            .map(|k| Field::from_real_fn(&grid, |x| (x[0] * k as f64).cos() + x[1]))
            .collect();
        let t = Tensor::from_components(&grid, 1, 2, comps).unwrap();
        let r = t.raise(1, &g).unwrap();
        assert_eq!((r.upper(), r.lower()), (2, 1));
        let back = r.lower_index(1, &g).unwrap();
        // lowered slot lands first among lowers; original order was (u; l0, l1)
        // and we raised l1, so back = (u; l1, l0): swap to compare.
        for a in 0..2 {
            for b in 0..2 {
                for c in 0..2 {
                    let x = back.component(&[a, c, b]);
                    let y = t.component(&[a, b, c]);
                    assert!(x.max_abs_diff(y) < 1e-12);
                }
            }
        }
    }

    #[test]
    fn flat_norm_density_is_sum_of_squares() {
        let grid = Grid::new(2, 8, 2.0 * PI).unwrap();
        let g = MetricField::flat(&grid);
        let comps: Vec<Field> = (0..4)
            .map(|k| Field::from_fn(&grid, |x| Complex64::new(x[0] + k as f64, x[1])))
            .collect();
        let t = Tensor::from_components(&grid, 1, 1, comps.clone()).unwrap();
        let n2 = t.norm2_density(&g);
        let mut expect = Field::zeros(&grid);
        for c in &comps {
            expect += &c.abs2();
        }
        assert!(n2.max_abs_diff(&expect) < 1e-12);
    }

    #[test]
    fn covector_norm_uses_inverse_metric() {
        let grid = Grid::new(2, 8, 2.0 * PI).unwrap();
        let g = metric(&grid, 0.2);
        let w = Tensor::covector(vec![
            Field::from_real_fn(&grid, |x| x[0].sin()),
            Field::from_real_fn(&grid, |x| x[1].cos()),
        ])
        .unwrap();
        let n2 = w.norm2_density(&g);
        let mut expect = Field::zeros(&grid);
        for a in 0..2 {
            for b in 0..2 {
                let p = &(g.ginv(a, b) * &w.comps()[a]) * &w.comps()[b];
                expect += &p;
            }
        }
        assert!(n2.max_abs_diff(&expect) < 1e-12);
    }

    #[test]
    fn wrong_component_count_rejected() {
        let grid = Grid::new(2, 8, 1.0).unwrap();
        assert!(Tensor::from_components(&grid, 1, 1, vec![Field::zeros(&grid); 3]).is_err());
    }
}
