use num_complex::Complex64;

use crate::error::{Result, SmcfError};
use crate::spectral::{derivative, Field, Grid};

/// Real scalar on the parameter grid.
pub(crate) type Scalar = Vec<f64>;

pub(crate) fn to_field(grid: &Grid, v: &[f64]) -> Field {
    Field::from_vec(grid, v.iter().map(|&x| Complex64::new(x, 0.0)).collect()).expect("sized")
}

pub(crate) fn deriv(grid: &Grid, v: &[f64], axis: usize) -> Scalar {
    derivative(&to_field(grid, v), axis)
        .expect("axis in range")
        .values()
        .iter()
        .map(|z| z.re)
        .collect()
}

pub(crate) fn dot(a: &[Scalar], b: &[Scalar], k: usize) -> f64 {
    a.iter().zip(b).map(|(x, y)| x[k] * y[k]).sum()
}

/// Immersion `F: T^d → ℝ^{d+2}` with an oriented orthonormal normal frame.
#[derive(Clone, Debug)]
pub struct ImmersionState {
    grid: Grid,
    /// Periodic part of each ambient component of `F`.
    pub f: Vec<Scalar>,
    /// Linear part: `F = base · x + f`, with `base[c][α]`.
    pub base: Vec<Vec<f64>>,
    pub nu1: Vec<Scalar>,
    pub nu2: Vec<Scalar>,
}

/// Tangents, metric and mean curvature of an immersion.
#[derive(Clone, Debug)]
pub struct InducedGeometry {
    /// `∂_α F`, indexed `[α][component]`.
    pub tangents: Vec<Vec<Scalar>>,
    /// `g_{αβ}` row-major.
    pub g: Vec<Scalar>,
    pub ginv: Vec<Scalar>,
    /// `∂_α∂_β F` row-major in `(α, β)`.
    pub second: Vec<Vec<Scalar>>,
    /// Mean curvature vector `g^{αβ}(∂²_{αβ}F - Γ^γ_{αβ}∂_γF)`.
    pub h: Vec<Scalar>,
}

fn invert(g: &[f64], d: usize) -> Option<Vec<f64>> {
    match d {
        1 => (g[0] != 0.0).then(|| vec![1.0 / g[0]]),
        2 => {
            let det = g[0] * g[3] - g[1] * g[2];
            (det > 0.0).then(|| vec![g[3] / det, -g[1] / det, -g[2] / det, g[0] / det])
        }
        _ => None,
    }
}

/// Induced metric and mean curvature vector of `F = base · x + f`.
pub fn induced_geometry(grid: &Grid, f: &[Scalar], base: &[Vec<f64>]) -> Result<InducedGeometry> {
    let d = grid.dim();
    if d > 2 || f.len() != d + 2 {
        return Err(SmcfError::Unsupported(format!(
            "immersions need d in {{1, 2}} and d+2 components, got d={d}, {} components",
            f.len()
        )));
    }
    let first: Vec<Vec<Scalar>> = (0..d)
        .map(|a| f.iter().map(|c| deriv(grid, c, a)).collect())
        .collect();
    let mut second = Vec::with_capacity(d * d);
    for a in 0..d {
        for b in 0..d {
            second.push(
                first[b]
                    .iter()
                    .map(|c| deriv(grid, c, a))
                    .collect::<Vec<_>>(),
            );
        }
    }
    let tangents: Vec<Vec<Scalar>> = first
        .into_iter()
        .enumerate()
        .map(|(a, comps)| {
            comps
                .into_iter()
                .zip(base)
                .map(|(v, row)| v.into_iter().map(|x| x + row[a]).collect())
                .collect()
        })
        .collect();
    let np = grid.len();
    let mut g = vec![vec![0.0; np]; d * d];
    let mut ginv = vec![vec![0.0; np]; d * d];
    let m = f.len();
    let mut h = vec![vec![0.0; np]; m];
    for k in 0..np {
        let gk: Vec<f64> = (0..d * d)
            .map(|ab| dot(&tangents[ab / d], &tangents[ab % d], k))
            .collect();
        let gi = invert(&gk, d).ok_or_else(|| {
            SmcfError::DegenerateImmersion(format!("singular induced metric at point {k}"))
        })?;
        // trace of the Hessian, then remove the tangential part; the
        // removed part is exactly Γ^γ_{αβ}∂_γF contracted with g^{αβ}
        let mut lap = vec![0.0; m];
        for ab in 0..d * d {
            for (c, l) in lap.iter_mut().enumerate() {
                *l += gi[ab] * second[ab][c][k];
            }
        }
        let proj: Vec<f64> = (0..d)
            .map(|a| (0..m).map(|c| lap[c] * tangents[a][c][k]).sum())
            .collect();
        for c in 0..m {
            let mut t = 0.0;
            for a in 0..d {
                for b in 0..d {
                    t += tangents[a][c][k] * gi[a * d + b] * proj[b];
                }
            }
            h[c][k] = lap[c] - t;
        }
        for ab in 0..d * d {
            g[ab][k] = gk[ab];
            ginv[ab][k] = gi[ab];
        }
    }
    Ok(InducedGeometry {
        tangents,
        g,
        ginv,
        second,
        h,
    })
}

/// Orientation sign of `(∂_1F, …, ∂_dF, a, b)` at point `k`.
fn orientation(tangents: &[Vec<Scalar>], a: &[Scalar], b: &[Scalar], k: usize) -> f64 {
    let cols: Vec<Vec<f64>> = tangents
        .iter()
        .map(|t| t.iter().map(|c| c[k]).collect())
        .chain([
            a.iter().map(|c| c[k]).collect(),
            b.iter().map(|c| c[k]).collect(),
        ])
        .collect();
    let m = cols.len();
    nalgebra::DMatrix::from_fn(m, m, |i, j| cols[j][i]).determinant()
}

/// Projects `(ν₁, ν₂)` onto the normal space of `tangents`, then
/// Gram–Schmidt, flipping `ν₂` if needed to keep the orientation positive.
pub(crate) fn transport_frame(
    tangents: &[Vec<Scalar>],
    ginv: &[Scalar],
    nu1: &[Scalar],
    nu2: &[Scalar],
) -> Result<(Vec<Scalar>, Vec<Scalar>)> {
    let d = tangents.len();
    let m = nu1.len();
    let np = nu1[0].len();
    let mut n1 = vec![vec![0.0; np]; m];
    let mut n2 = vec![vec![0.0; np]; m];
    let project = |v: &[Scalar], k: usize| -> Vec<f64> {
        let p: Vec<f64> = (0..d)
            .map(|a| (0..m).map(|c| v[c][k] * tangents[a][c][k]).sum())
            .collect();
        (0..m)
            .map(|c| {
                let mut t = v[c][k];
                for a in 0..d {
                    for b in 0..d {
                        t -= tangents[a][c][k] * ginv[a * d + b][k] * p[b];
                    }
                }
                t
            })
            .collect()
    };
    for k in 0..np {
        let mut a = project(nu1, k);
        let na = a.iter().map(|x| x * x).sum::<f64>().sqrt();
        if na < 1e-8 {
            return Err(SmcfError::DegenerateImmersion(format!(
                "frame collapsed at point {k}"
            )));
        }
        a.iter_mut().for_each(|x| *x /= na);
        let mut b = project(nu2, k);
        let ab: f64 = a.iter().zip(&b).map(|(x, y)| x * y).sum();
        b.iter_mut().zip(&a).for_each(|(y, x)| *y -= ab * x);
        let nb = b.iter().map(|x| x * x).sum::<f64>().sqrt();
        if nb < 1e-8 {
            return Err(SmcfError::DegenerateImmersion(format!(
                "frame collapsed at point {k}"
            )));
        }
        b.iter_mut().for_each(|y| *y /= nb);
        for c in 0..m {
            n1[c][k] = a[c];
            n2[c][k] = b[c];
        }
    }
    let sign = orientation(tangents, &n1, &n2, 0);
    if sign < 0.0 {
        n2.iter_mut().flatten().for_each(|x| *x = -*x);
    }
    Ok((n1, n2))
}

impl ImmersionState {
    /// Builds the state and a normal frame from the seed vectors, which
    /// need only be transverse to the tangent space.
    pub fn new(
        grid: &Grid,
        f: Vec<Scalar>,
        base: Vec<Vec<f64>>,
        seed1: Vec<Scalar>,
        seed2: Vec<Scalar>,
    ) -> Result<Self> {
        if base.len() != f.len() || base.iter().any(|r| r.len() != grid.dim()) {
            return Err(SmcfError::ShapeMismatch(
                "linear part has the wrong shape".into(),
            ));
        }
        let geo = induced_geometry(grid, &f, &base)?;
        let (nu1, nu2) = transport_frame(&geo.tangents, &geo.ginv, &seed1, &seed2)?;
        Ok(Self {
            grid: grid.clone(),
            f,
            base,
            nu1,
            nu2,
        })
    }

    /// `F` at grid point `k`, linear part included.
    pub fn position(&self, k: usize) -> Vec<f64> {
        self.f
            .iter()
            .zip(&self.base)
            .map(|(c, row)| {
                c[k] + row
                    .iter()
                    .enumerate()
                    .map(|(a, b)| b * self.grid.coord(k, a))
                    .sum::<f64>()
            })
            .collect()
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn dim(&self) -> usize {
        self.grid.dim()
    }

    pub fn geometry(&self) -> Result<InducedGeometry> {
        induced_geometry(&self.grid, &self.f, &self.base)
    }

    /// Largest `|ν_i·ν_j - δ_ij|` and `|ν_i·∂_αF|` over the grid.
    pub fn frame_defect(&self) -> Result<f64> {
        let geo = self.geometry()?;
        let mut worst = 0.0_f64;
        for k in 0..self.grid.len() {
            worst = worst
                .max((dot(&self.nu1, &self.nu1, k) - 1.0).abs())
                .max((dot(&self.nu2, &self.nu2, k) - 1.0).abs())
                .max(dot(&self.nu1, &self.nu2, k).abs());
            for t in &geo.tangents {
                worst = worst
                    .max(dot(t, &self.nu1, k).abs())
                    .max(dot(t, &self.nu2, k).abs());
            }
        }
        Ok(worst)
    }

    /// Rotates `(ν₁, ν₂)` pointwise: `ν₁ ← cos θ ν₁ + sin θ ν₂`,
    /// `ν₂ ← -sin θ ν₁ + cos θ ν₂`. This shifts `A` by `dθ`.
    pub fn rotate_frame(&mut self, theta: &[f64]) {
        for c in 0..self.nu1.len() {
            for (k, &th) in theta.iter().enumerate() {
                let (s, co) = th.sin_cos();
                let (a, b) = (self.nu1[c][k], self.nu2[c][k]);
                self.nu1[c][k] = co * a + s * b;
                self.nu2[c][k] = -s * a + co * b;
            }
        }
    }
}

/// `J H` with `J ν₁ = ν₂`, `J ν₂ = -ν₁`.
type Stage = (Vec<Scalar>, Vec<Scalar>, Vec<Scalar>);

fn velocity(
    grid: &Grid,
    base: &[Vec<f64>],
    f: &[Scalar],
    nu1: &[Scalar],
    nu2: &[Scalar],
) -> Result<Stage> {
    let geo = induced_geometry(grid, f, base)?;
    let (n1, n2) = transport_frame(&geo.tangents, &geo.ginv, nu1, nu2)?;
    let m = f.len();
    let mut v = vec![vec![0.0; grid.len()]; m];
    for k in 0..grid.len() {
        let h1 = dot(&geo.h, &n1, k);
        let h2 = dot(&geo.h, &n2, k);
        for c in 0..m {
            v[c][k] = h1 * n2[c][k] - h2 * n1[c][k];
        }
    }
    Ok((v, n1, n2))
}

fn axpy(base: &[Scalar], c: f64, dir: &[Scalar]) -> Vec<Scalar> {
    base.iter()
        .zip(dir)
        .map(|(b, v)| b.iter().zip(v).map(|(x, y)| x + c * y).collect())
        .collect()
}

/// Classical RK4 step of `∂_t F = J H`. The frame is carried through every
/// stage by projection onto the new normal space, the minimal rotation.
pub fn smcf_step(state: &ImmersionState, dt: f64) -> Result<ImmersionState> {
    let grid = &state.grid;
    let base = &state.base;
    let (k1, a1, b1) = velocity(grid, base, &state.f, &state.nu1, &state.nu2)?;
    let f2 = axpy(&state.f, 0.5 * dt, &k1);
    let (k2, a2, b2) = velocity(grid, base, &f2, &a1, &b1)?;
    let f3 = axpy(&state.f, 0.5 * dt, &k2);
    let (k3, a3, b3) = velocity(grid, base, &f3, &a2, &b2)?;
    let f4 = axpy(&state.f, dt, &k3);
    let (k4, a4, b4) = velocity(grid, base, &f4, &a3, &b3)?;
    let mut f = state.f.clone();
    for c in 0..f.len() {
        for k in 0..grid.len() {
            f[c][k] += dt / 6.0 * (k1[c][k] + 2.0 * k2[c][k] + 2.0 * k3[c][k] + k4[c][k]);
        }
    }
    if f.iter().flatten().any(|x| !x.is_finite()) {
        return Err(SmcfError::NonFinite {
            stage: "immersion step".into(),
            t: f64::NAN,
        });
    }
    let geo = induced_geometry(grid, &f, base)?;
    let (nu1, nu2) = transport_frame(&geo.tangents, &geo.ginv, &a4, &b4)?;
    Ok(ImmersionState {
        grid: grid.clone(),
        f,
        base: base.clone(),
        nu1,
        nu2,
    })
}
