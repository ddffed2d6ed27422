use num_complex::Complex64;

use super::metric::MetricField;
use crate::spectral::{Field, Spectrum};

/// Riemann and Ricci tensors of a metric.
///
/// Riemann is stored fully lowered, `R_{σγαβ} = g_{μσ} R^μ_{γαβ}`, only for
/// `σ < γ` and `α < β`; the remaining components follow from the two
/// antisymmetries and are reconstructed on access.
#[derive(Clone, Debug)]
pub struct Curvature {
    dim: usize,
    pairs: Vec<(usize, usize)>,
    riemann: Vec<Field>,
    ricci: Vec<Field>,
}

fn pair_index(pairs: &[(usize, usize)], a: usize, b: usize) -> Option<(usize, f64)> {
    if a == b {
        return None;
    }
    let (lo, hi, sign) = if a < b { (a, b, 1.0) } else { (b, a, -1.0) };
    pairs.iter().position(|&p| p == (lo, hi)).map(|k| (k, sign))
}

impl Curvature {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn pairs(&self) -> &[(usize, usize)] {
        &self.pairs
    }

    /// Stored component for pair indices `(p, q)` into [`Curvature::pairs`].
    pub fn riemann_pair(&self, p: usize, q: usize) -> &Field {
        &self.riemann[p * self.pairs.len() + q]
    }

    /// `R_{σγαβ}`; `None` when an antisymmetric pair repeats an index.
    pub fn riemann(&self, s: usize, c: usize, a: usize, b: usize) -> Option<Field> {
        let (p, s1) = pair_index(&self.pairs, s, c)?;
        let (q, s2) = pair_index(&self.pairs, a, b)?;
        let f = self.riemann_pair(p, q);
        Some(if s1 * s2 > 0.0 {
            f.clone()
        } else {
            f.scale(-1.0)
        })
    }

    /// `Ric_{γβ} = R^σ_{γσβ}`.
    pub fn ricci(&self, c: usize, b: usize) -> &Field {
        &self.ricci[c * self.dim + b]
    }
}

/// Riemann and Ricci curvature of `g` from the Christoffel symbols:
/// `R^σ_{γαβ} = ∂_α Γ^σ_{βγ} - ∂_β Γ^σ_{αγ} + Γ^m_{βγ} Γ^σ_{αm} - Γ^m_{αγ} Γ^σ_{βm}`.
pub fn curvature(g: &MetricField) -> Curvature {
    let d = g.dim();
    let grid = g.grid();
    let spectra: Vec<Spectrum> = (0..d * d * d)
        .map(|k| Spectrum::of(g.christoffel(k / (d * d), (k / d) % d, k % d)))
        .collect();
    let spec = |s: usize, a: usize, b: usize| &spectra[s * d * d + a * d + b];
    let deriv =
        |sp: &Spectrum, axis: usize| sp.apply(|k| Complex64::new(0.0, grid.xi(k, axis))).re();

    let pairs: Vec<(usize, usize)> = (0..d)
        .flat_map(|a| (a + 1..d).map(move |b| (a, b)))
        .collect();
    let np = pairs.len();
    let mut riemann = vec![Field::zeros(grid); np * np];
    let mut ricci = vec![Field::zeros(grid); d * d];
    let neg = Complex64::new(-1.0, 0.0);

    for (q, &(a, b)) in pairs.iter().enumerate() {
        // mixed R^σ_{γab} for all σ, γ
        let mut mixed = vec![Field::zeros(grid); d * d];
        for s in 0..d {
            for c in 0..d {
                let mut r = deriv(spec(s, b, c), a);
                r -= &deriv(spec(s, a, c), b);
                for m in 0..d {
                    r.add_product(g.christoffel(m, b, c), g.christoffel(s, a, m));
                    r.add_scaled_product(neg, g.christoffel(m, a, c), g.christoffel(s, b, m));
                }
                mixed[s * d + c] = r;
            }
        }
        for c in 0..d {
            ricci[c * d + b] += &mixed[a * d + c];
            ricci[c * d + a] -= &mixed[b * d + c];
        }
        for (p, &(s, c)) in pairs.iter().enumerate() {
            let mut low = Field::zeros(grid);
            for mu in 0..d {
                low.add_product(&g.g(mu, s), &mixed[mu * d + c]);
            }
            riemann[p * np + q] = low;
        }
    }
    Curvature {
        dim: d,
        pairs,
        riemann,
        ricci,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::Grid;
    use std::f64::consts::PI;

    fn random_metric(dim: usize, n: usize, eps: f64, seed: u64) -> MetricField {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let grid = Grid::new(dim, n, 2.0 * PI).unwrap();
        let mut h = vec![Field::zeros(&grid); dim * dim];
        for a in 0..dim {
            for b in a..dim {
                let k: Vec<f64> = (0..dim).map(|_| rng.gen_range(-2..=2) as f64).collect();
                let phase: f64 = rng.gen_range(0.0..6.0);
                let amp: f64 = rng.gen_range(-1.0..1.0) * eps;
                let f = Field::from_real_fn(&grid, |x| {
                    amp * (k.iter().zip(x).map(|(k, x)| k * x).sum::<f64>() + phase).cos()
                });
                h[a * dim + b] = f.clone();
                h[b * dim + a] = f;
            }
        }
        MetricField::new(&grid, h).unwrap()
    }

    #[test]
    fn flat_curvature_vanishes() {
        let g = MetricField::flat(&Grid::new(3, 8, 2.0 * PI).unwrap());
        let c = curvature(&g);
        for f in c.riemann.iter().chain(&c.ricci) {
            assert_eq!(f.norm_linf(), 0.0);
        }
    }

    #[test]
    fn first_bianchi_identity() {
        for seed in 0..3 {
            let g = random_metric(3, 32, 0.05, seed);
            let c = curvature(&g);
            for a in 0..3 {
                for b in 0..3 {
                    for cc in 0..3 {
                        for s in 0..3 {
                            let get = |w, x, y, z| {
                                c.riemann(w, x, y, z)
                                    .unwrap_or_else(|| Field::zeros(g.grid()))
                            };
                            let mut sum = get(a, b, cc, s);
                            sum += &get(a, cc, s, b);
                            sum += &get(a, s, b, cc);
                            assert!(sum.norm_linf() < 1e-8, "{}", sum.norm_linf());
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn ricci_symmetric_and_pair_symmetry() {
        let g = random_metric(3, 32, 0.05, 7);
        let c = curvature(&g);
        for a in 0..3 {
            for b in 0..3 {
                assert!(
                    c.ricci(a, b).max_abs_diff(c.ricci(b, a)) < 1e-10,
                    "{}",
                    c.ricci(a, b).max_abs_diff(c.ricci(b, a))
                );
            }
        }
        let r1 = c.riemann(0, 1, 0, 2).unwrap();
        let r2 = c.riemann(0, 2, 0, 1).unwrap();
        assert!(r1.max_abs_diff(&r2) < 1e-10);
    }

    #[test]
    fn conformal_two_dim_gauss_curvature() {
        // g = e^{2u} I has K = -e^{-2u} Δu and R_{1212} = K det g.
        let grid = Grid::new(2, 32, 2.0 * PI).unwrap();
        let eps = 0.05;
        let u = Field::from_real_fn(&grid, |x| eps * x[0].sin() * x[1].cos());
        let e2u = u.map(|v| (2.0 * v).exp());
        let hdiag = e2u.map(|v| v - 1.0);
        let g = MetricField::new(
            &grid,
            vec![
                hdiag.clone(),
                Field::zeros(&grid),
                Field::zeros(&grid),
                hdiag,
            ],
        )
        .unwrap();
        let c = curvature(&g);
        let lap = crate::spectral::laplacian(&u);
        // K det g = -e^{-2u} Δu e^{4u} = -e^{2u} Δu
        let expect = (&e2u * &lap).scale(-1.0);
        let r = c.riemann(0, 1, 0, 1).unwrap();
        assert!(r.max_abs_diff(&expect) < 1e-10);
        // Ric = K g
        let k = (&lap * &e2u.map(|v| 1.0 / v)).scale(-1.0);
        let ric_expect = &k * &e2u;
        assert!(c.ricci(0, 0).max_abs_diff(&ric_expect) < 1e-10);
    }
}
