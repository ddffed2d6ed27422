use num_complex::Complex64;

use super::poisson::SourceBuilder;
use super::state::{EllipticConfig, EllipticDiagnostics, EquationResiduals, GaugeState, NonDecay};
use crate::analysis::exponents;
use crate::error::{Result, SmcfError};
use crate::geometry::{
    connection_residuals, covariant_derivative, curvature_of_connection, div_curl_lambda,
    ConnectionField, MetricField, SecondFundamentalField, Tensor,
};
use crate::spectral::{derivative, gradient, hessian, sobolev_norm, Field, Grid, Spectrum};

const NEG: Complex64 = Complex64 { re: -1.0, im: 0.0 };
const TWO: Complex64 = Complex64 { re: 2.0, im: 0.0 };

fn c(x: f64) -> Complex64 {
    Complex64::new(x, 0.0)
}

fn corrected(x: &Field, corr: &Field, omega: f64) -> Field {
    let mut out = x.clone();
    out.axpy(c(-omega), corr);
    out
}

fn mean_free_solve(src: &Field) -> (Field, f64) {
    let mut b = SourceBuilder::new(src.grid());
    b.add(src, 1.0);
    let (u, m) = b.solve();
    (u, m.norm())
}

/// Fixes the zero mode of `λ` to `μ δ_{αβ}`, with `μ` chosen so that the
/// trace `g^{αβ} λ_{αβ}` has the same mean as `ψ`.
fn set_lambda_mean(lam: &mut SecondFundamentalField, psi: &Field, g: &MetricField) {
    let d = lam.dim();
    for comp in lam.comps_mut() {
        let m = comp.mean();
        *comp = comp.map(|v| v - m);
    }
    let tr_mean = lam.trace(g).mean();
    let diag_mean: f64 = (0..d).map(|a| g.ginv(a, a).mean().re).sum();
    let mu = (psi.mean() - tr_mean) / diag_mean;
    for a in 0..d {
        let comp = &mut lam.comps_mut()[a * d + a];
        *comp = comp.map(|v| v + mu);
    }
}

/// One correction of `λ` from the div-curl residuals, using
/// `Δλ_{βγ} = ∂_β(∂^α λ_{αγ}) + ∂^α(∂_α λ_{βγ} - ∂_β λ_{αγ})`.
pub(crate) fn lambda_sweep(
    lam: &SecondFundamentalField,
    psi: &Field,
    g: &MetricField,
    a: &[Field],
    omega: f64,
) -> Result<(SecondFundamentalField, f64)> {
    let d = g.dim();
    let grid = g.grid();
    let (div, cod) = div_curl_lambda(lam, psi, g, a)?;
    let div_sp: Vec<Spectrum> = div.iter().map(Spectrum::of).collect();
    let cod_sp: Vec<Option<Spectrum>> = (0..d * d * d)
        .map(|k| {
            let (al, b) = (k / (d * d), (k / d) % d);
            (al != b).then(|| Spectrum::of(&cod[k]))
        })
        .collect();
    let mut comps = Vec::with_capacity(d * d);
    for b in 0..d {
        for cc in 0..d {
            let mut src = SourceBuilder::new(grid);
            src.add_spectrum_derivative(&div_sp[cc], b, 1.0);
            for al in 0..d {
                if let Some(sp) = &cod_sp[(al * d + b) * d + cc] {
                    src.add_spectrum_derivative(sp, al, 1.0);
                }
            }
            let (corr, _) = src.solve();
            comps.push(corrected(lam.get(b, cc), &corr, omega));
        }
    }
    let mut new = SecondFundamentalField::new(grid, comps)?;
    set_lambda_mean(&mut new, psi, g);
    let upd = new.max_abs_diff(lam);
    Ok((new, upd))
}

/// Left-minus-right side of the metric equation, symmetrized, indexed `[γ][σ]`.
pub(crate) fn metric_residual(
    g: &MetricField,
    lam: &SecondFundamentalField,
    psi: &Field,
) -> Vec<Field> {
    let d = g.dim();
    let grid = g.grid();
    let idx3 = |x: usize, y: usize, z: usize| (x * d + y) * d + z;
    let dginv: Vec<Field> = (0..d * d * d)
        .map(|k| g.dginv(k / (d * d), (k / d) % d, k % d))
        .collect();
    let gam1: Vec<Field> = (0..d * d * d)
        .map(|k| g.christoffel_first(k / (d * d), (k / d) % d, k % d))
        .collect();
    // u[(γ, a, ν)] = g^{ab} Γ^ν_{bγ}
    let mut u = Vec::with_capacity(d * d * d);
    for gm in 0..d {
        for a in 0..d {
            for nu in 0..d {
                let mut acc = Field::zeros(grid);
                for b in 0..d {
                    acc.add_product(g.ginv(a, b), g.christoffel(nu, b, gm));
                }
                u.push(acc);
            }
        }
    }
    let mixed = lam.mixed(g);
    let psibar = psi.conj();

    let mut lhs = vec![Field::zeros(grid); d * d];
    for gm in 0..d {
        for sg in gm..d {
            let hs = hessian(g.h(gm, sg));
            let mut acc = Field::zeros(grid);
            for a in 0..d {
                for b in 0..d {
                    acc.add_product(g.ginv(a, b), &hs[a * d + b]);
                }
            }
            lhs[sg * d + gm] = acc.clone();
            lhs[gm * d + sg] = acc;
        }
    }

    let mut r = Vec::with_capacity(d * d);
    for gm in 0..d {
        for sg in 0..d {
            let mut rhs = Field::zeros(grid);
            for a in 0..d {
                for b in 0..d {
                    rhs.add_scaled_product(NEG, &dginv[idx3(gm, a, b)], g.dg(b, a, sg));
                    rhs.add_scaled_product(NEG, &dginv[idx3(sg, a, b)], g.dg(b, a, gm));
                    rhs.add_product(g.dg(gm, a, b), &dginv[idx3(sg, a, b)]);
                }
                for nu in 0..d {
                    rhs.add_scaled_product(TWO, &gam1[idx3(nu, sg, a)], &u[idx3(gm, a, nu)]);
                }
            }
            let mut ric = lam.get(gm, sg) * &psibar;
            for al in 0..d {
                ric.add_scaled_product(NEG, lam.get(al, gm), &mixed[al * d + sg].conj());
            }
            rhs.axpy(c(-2.0), &ric.re());
            r.push((&lhs[gm * d + sg] - &rhs).re());
        }
    }
    for gm in 0..d {
        for sg in gm + 1..d {
            let s = (&r[gm * d + sg] + &r[sg * d + gm]).scale(0.5);
            r[sg * d + gm] = s.clone();
            r[gm * d + sg] = s;
        }
    }
    r
}

/// One correction of `h`; returns the new metric, update size, largest
/// discarded source mean and the input residual `L^∞`.
pub(crate) fn metric_sweep(
    g: &MetricField,
    lam: &SecondFundamentalField,
    psi: &Field,
    omega: f64,
) -> Result<(MetricField, f64, f64, f64)> {
    let d = g.dim();
    let r = metric_residual(g, lam, psi);
    let mut h = g.h_comps().to_vec();
    let mut mean: f64 = 0.0;
    let mut res: f64 = 0.0;
    for gm in 0..d {
        for sg in gm..d {
            let rr = &r[gm * d + sg];
            res = res.max(rr.norm_linf());
            let (corr, m) = mean_free_solve(rr);
            mean = mean.max(m);
            let new = corrected(&h[gm * d + sg], &corr, omega);
            h[sg * d + gm] = new.clone();
            h[gm * d + sg] = new;
        }
    }
    let upd = h
        .iter()
        .zip(g.h_comps())
        .fold(0.0_f64, |m, (a, b)| m.max(a.max_abs_diff(b)));
    Ok((MetricField::new(g.grid(), h)?, upd, mean, res))
}

/// Contracted second covariant derivative `g^{ab} (∇∇T)_{..ba}` of a tensor
/// whose derivative indices are the last two slots.
fn trace_last_two(t: &Tensor, g: &MetricField) -> Vec<Field> {
    let d = g.dim();
    let n = t.comps().len() / (d * d);
    (0..n)
        .map(|base| {
            let mut acc = Field::zeros(g.grid());
            for a in 0..d {
                for b in 0..d {
                    acc.add_product(g.ginv(a, b), &t.comps()[(base * d + b) * d + a]);
                }
            }
            acc
        })
        .collect()
}

/// `g^{γm} ∇_m K_γ` for a covector `K`.
fn covector_divergence(k: Vec<Field>, g: &MetricField) -> Result<Field> {
    let d = g.dim();
    let dk = covariant_derivative(&Tensor::covector(k)?, g, None)?;
    let mut acc = Field::zeros(g.grid());
    for gm in 0..d {
        for m in 0..d {
            acc.add_product(g.ginv(gm, m), &dk.comps()[gm * d + m]);
        }
    }
    Ok(acc)
}

/// Per-sweep quantities shared by the `V`, `A`, `B` equations.
struct Sources {
    mixed: Vec<Field>,
    raised: Vec<Field>,
    curv: Vec<Field>,
    psibar: Field,
}

impl Sources {
    fn new(lam: &SecondFundamentalField, psi: &Field, g: &MetricField) -> Self {
        let mixed = lam.mixed(g);
        let raised = lam.raised(g, &mixed);
        let curv = curvature_of_connection(lam, &mixed);
        Self {
            mixed,
            raised,
            curv,
            psibar: psi.conj(),
        }
    }
}

/// `∇^α∇_α V^γ - RHS^γ` for the advection equation, plus `∇_m V^γ` as
/// `[γ][m]`.
fn v_residual(
    v: &[Field],
    lam: &SecondFundamentalField,
    psi: &Field,
    g: &MetricField,
    s: &Sources,
) -> Result<(Vec<Field>, Vec<Field>)> {
    let d = g.dim();
    let grid = g.grid();
    let dv = covariant_derivative(&Tensor::vector(v.to_vec())?, g, None)?;
    let ddv = covariant_derivative(&dv, g, None)?;
    let lhs = trace_last_two(&ddv, g);

    let w: Vec<Field> = s.raised.iter().map(|l| (l * &s.psibar).im()).collect();
    let dw = covariant_derivative(&Tensor::from_components(grid, 2, 0, w)?, g, None)?;

    let mut out = Vec::with_capacity(d);
    for gm in 0..d {
        let mut rhs = Field::zeros(grid);
        for al in 0..d {
            rhs.axpy(TWO, &dw.comps()[(al * d + gm) * d + al]);
        }
        for sg in 0..d {
            let mut coef = &s.mixed[gm * d + sg] * &s.psibar;
            for al in 0..d {
                coef.add_scaled_product(NEG, lam.get(al, sg), &s.raised[al * d + gm].conj());
            }
            rhs.add_scaled_product(NEG, &coef.re(), &v[sg]);
        }
        for al in 0..d {
            for b in 0..d {
                let mut k = (psi * &s.raised[al * d + b].conj()).im();
                for m in 0..d {
                    k.add_product(g.ginv(al, m), &dv.comps()[b * d + m]);
                }
                rhs.add_scaled_product(TWO, &k, g.christoffel(gm, al, b));
            }
        }
        out.push((&lhs[gm] - &rhs).re());
    }
    Ok((out, dv.into_comps()))
}

/// `Δ_g B - RHS` for the temporal coefficient.
fn b_residual(
    conn: &ConnectionField,
    dv: &[Field],
    psi: &Field,
    g: &MetricField,
    s: &Sources,
) -> Result<Field> {
    let d = g.dim();
    let grid = g.grid();
    let lhs = g.laplace_beltrami(&conn.b);

    let m: Vec<Field> = s.mixed.iter().map(|l| (l * &s.psibar).re()).collect();
    let dm = covariant_derivative(&Tensor::from_components(grid, 1, 1, m)?, g, None)?;
    let n: Vec<Field> = (0..d)
        .map(|gm| {
            let mut acc = Field::zeros(grid);
            for sg in 0..d {
                acc += &dm.comps()[(sg * d + gm) * d + sg];
            }
            acc
        })
        .collect();
    let mut rhs = covector_divergence(n, g)?.scale(-1.0);
    rhs.axpy(c(0.5), &g.laplace_beltrami(&psi.abs2()));

    let k: Vec<Field> = (0..d)
        .map(|gm| {
            let mut acc = Field::zeros(grid);
            for b in 0..d {
                acc.add_product(&s.curv[gm * d + b], &conn.v[b]);
            }
            acc
        })
        .collect();
    rhs += &covector_divergence(k, g)?;

    let da: Vec<Vec<Field>> = conn.a.iter().map(gradient).collect();
    for b in 0..d {
        for gm in 0..d {
            let mut coef = (psi * &s.raised[b * d + gm].conj()).im().scale(2.0);
            for mm in 0..d {
                coef.add_product(g.ginv(b, mm), &dv[gm * d + mm]);
                coef.add_product(g.ginv(gm, mm), &dv[b * d + mm]);
            }
            // ∂_β A_γ
            rhs.add_product(&coef, &da[gm][b]);
        }
    }
    Ok((&lhs - &rhs).re())
}

/// Second-order form of the `A` equation,
/// `∂_γ(g^{γβ}∂_β A_α) - ∂_γ(g^{γβ}∂_α A_β) + ∂_α(g^{γβ}∂_γ A_β) + ∂_γ Im(λ_{ασ} conj λ^{γσ})`.
fn a_second_order_residual(
    a: &[Field],
    lam: &SecondFundamentalField,
    g: &MetricField,
    s: &Sources,
) -> Vec<Field> {
    let d = g.dim();
    let grid = g.grid();
    let da: Vec<Vec<Field>> = a.iter().map(gradient).collect();
    let mut div_all = Field::zeros(grid);
    for gm in 0..d {
        for b in 0..d {
            div_all.add_product(g.ginv(gm, b), &da[b][gm]);
        }
    }
    let ddiv = gradient(&div_all);
    (0..d)
        .map(|al| {
            let mut total = ddiv[al].clone();
            for gm in 0..d {
                let mut f = Field::zeros(grid);
                for b in 0..d {
                    f.add_product(g.ginv(gm, b), &da[al][b]);
                    f.add_scaled_product(NEG, g.ginv(gm, b), &da[b][al]);
                }
                let mut q = Field::zeros(grid);
                for sg in 0..d {
                    q.add_product(lam.get(al, sg), &s.raised[gm * d + sg].conj());
                }
                f += &q.im();
                total += &derivative(&f, gm).expect("axis in range");
            }
            total.re()
        })
        .collect()
}

/// One Gauss–Seidel pass over `A`, then `V`, then `B`.
pub(crate) fn connection_sweep(
    conn: &ConnectionField,
    lam: &SecondFundamentalField,
    psi: &Field,
    g: &MetricField,
    omega: f64,
) -> Result<(ConnectionField, f64, NonDecay, EquationResiduals)> {
    let d = g.dim();
    let grid = g.grid();
    let s = Sources::new(lam, psi, g);
    let mut nd = NonDecay::default();
    let mut eq = EquationResiduals::default();

    // A from its curl and divergence residuals
    let (curl, coul) = connection_residuals(&conn.a, &s.curv, g);
    let curl_sp: Vec<Spectrum> = curl.iter().map(Spectrum::of).collect();
    let coul_sp = Spectrum::of(&coul);
    let mut a_new = Vec::with_capacity(d);
    for b in 0..d {
        let mut src = SourceBuilder::new(grid);
        for al in 0..d {
            if al != b {
                src.add_spectrum_derivative(&curl_sp[al * d + b], al, 1.0);
            }
        }
        src.add_spectrum_derivative(&coul_sp, b, 1.0);
        let (corr, m) = src.solve();
        nd.a = nd.a.max(m.norm());
        a_new.push(corrected(&conn.a[b], &corr, omega).re());
    }

    let (rv, _) = v_residual(&conn.v, lam, psi, g, &s)?;
    let mut v_new = Vec::with_capacity(d);
    for (vi, r) in conn.v.iter().zip(&rv) {
        eq.v = eq.v.max(r.norm_linf());
        let (corr, m) = mean_free_solve(r);
        nd.v = nd.v.max(m);
        v_new.push(corrected(vi, &corr, omega).re());
    }

    let mut next = ConnectionField {
        a: a_new,
        b: conn.b.clone(),
        v: v_new,
    };
    let dv = covariant_derivative(&Tensor::vector(next.v.clone())?, g, None)?.into_comps();
    let rb = b_residual(&next, &dv, psi, g, &s)?;
    eq.b = rb.norm_linf();
    let (corr, m) = mean_free_solve(&rb);
    nd.b = m;
    next.b = corrected(&conn.b, &corr, omega).re();

    eq.a_second_order = a_second_order_residual(&next.a, lam, g, &s)
        .iter()
        .fold(0.0, |m, f| m.max(f.norm_linf()));
    let upd = next.max_abs_diff(conn);
    Ok((next, upd, nd, eq))
}

/// Tracks update norms and reports a stall.
struct StallGuard {
    window: usize,
    streak: usize,
    last: f64,
}

impl StallGuard {
    fn new(window: usize) -> Self {
        Self {
            window,
            streak: 0,
            last: f64::INFINITY,
        }
    }

    fn check(&mut self, stage: &str, it: usize, upd: f64) -> Result<()> {
        if !upd.is_finite() {
            return Err(SmcfError::NotContracting {
                stage: stage.into(),
                iterations: it,
                residual: upd,
            });
        }
        if upd >= self.last {
            self.streak += 1;
        } else {
            self.streak = 0;
        }
        self.last = upd;
        if self.streak >= self.window {
            return Err(SmcfError::NotContracting {
                stage: stage.into(),
                iterations: it,
                residual: upd,
            });
        }
        Ok(())
    }
}

fn exhausted(stage: &str, cfg: &EllipticConfig, upd: f64) -> SmcfError {
    SmcfError::NotContracting {
        stage: stage.into(),
        iterations: cfg.max_iter,
        residual: upd,
    }
}

fn check_grids(psi: &Field, g: &MetricField) -> Result<()> {
    if psi.grid() != g.grid() {
        return Err(SmcfError::ShapeMismatch(
            "psi and metric on different grids".into(),
        ));
    }
    Ok(())
}

/// Solves the div-curl system for `λ` with `g` and `A` held fixed.
pub fn recover_lambda(
    psi: &Field,
    g: &MetricField,
    a: &[Field],
    cfg: &EllipticConfig,
) -> Result<SecondFundamentalField> {
    cfg.validate()?;
    check_grids(psi, g)?;
    let mut lam = SecondFundamentalField::zeros(g.grid());
    let mut guard = StallGuard::new(cfg.stall_window);
    for it in 1..=cfg.max_iter {
        let (next, upd) = lambda_sweep(&lam, psi, g, a, cfg.under_relaxation)?;
        lam = next;
        if upd < cfg.tol {
            return Ok(lam);
        }
        guard.check("lambda", it, upd)?;
    }
    Err(exhausted("lambda", cfg, f64::NAN))
}

/// Solves the harmonic-gauge metric equation with `λ` fixed, from `g = I`.
pub fn solve_metric(
    lam: &SecondFundamentalField,
    psi: &Field,
    cfg: &EllipticConfig,
) -> Result<MetricField> {
    cfg.validate()?;
    let mut g = MetricField::flat(lam.grid());
    check_grids(psi, &g)?;
    let mut guard = StallGuard::new(cfg.stall_window);
    for it in 1..=cfg.max_iter {
        let (next, upd, _, _) = metric_sweep(&g, lam, psi, cfg.under_relaxation)?;
        g = next;
        if upd < cfg.tol {
            return Ok(g);
        }
        guard.check("metric", it, upd)?;
    }
    Err(exhausted("metric", cfg, f64::NAN))
}

/// Solves for `(V, A, B)` with `λ` and `g` fixed, from zero.
pub fn solve_vab(
    lam: &SecondFundamentalField,
    psi: &Field,
    g: &MetricField,
    cfg: &EllipticConfig,
) -> Result<ConnectionField> {
    cfg.validate()?;
    check_grids(psi, g)?;
    let mut conn = ConnectionField::zeros(g.grid());
    let mut guard = StallGuard::new(cfg.stall_window);
    for it in 1..=cfg.max_iter {
        let (next, upd, _, _) = connection_sweep(&conn, lam, psi, g, cfg.under_relaxation)?;
        conn = next;
        if upd < cfg.tol {
            return Ok(conn);
        }
        guard.check("connection", it, upd)?;
    }
    Err(exhausted("connection", cfg, f64::NAN))
}

/// `‖ψ‖_{H^s}` with `s` from the config or the dimension's `s_d`.
pub fn smallness_norm(psi: &Field, cfg: &EllipticConfig) -> Result<f64> {
    let s = match cfg.regularity {
        Some(s) => s,
        None => exponents(psi.grid().dim())?.s_d,
    };
    Ok(sobolev_norm(psi, s))
}

/// Joint fixed point of the `λ`, metric and connection equations.
pub fn solve_elliptic_system(psi: &Field, cfg: &EllipticConfig) -> Result<GaugeState> {
    solve_elliptic_system_from(psi, cfg, None)
}

/// As [`solve_elliptic_system`], starting the iteration from `warm`.
pub fn solve_elliptic_system_from(
    psi: &Field,
    cfg: &EllipticConfig,
    warm: Option<&GaugeState>,
) -> Result<GaugeState> {
    cfg.validate()?;
    let grid: &Grid = psi.grid();
    if grid.dim() < 2 {
        return Err(SmcfError::Unsupported(
            "the gauge system needs d >= 2".into(),
        ));
    }
    if !psi.is_finite() {
        return Err(SmcfError::NonFinite {
            stage: "elliptic input".into(),
            t: f64::NAN,
        });
    }
    let norm = smallness_norm(psi, cfg)?;
    if norm > cfg.smallness {
        return Err(SmcfError::SmallnessViolated {
            norm,
            threshold: cfg.smallness,
        });
    }
    let (mut g, mut lam, mut conn) = match warm {
        Some(w) if w.grid() == grid => (w.g.clone(), w.lambda.clone(), w.conn.clone()),
        _ => (
            MetricField::flat(grid),
            SecondFundamentalField::zeros(grid),
            ConnectionField::zeros(grid),
        ),
    };
    let omega = cfg.under_relaxation;
    let mut history = Vec::new();
    let mut guard = StallGuard::new(cfg.stall_window);
    for it in 1..=cfg.max_iter {
        let (lam_next, du_l) = lambda_sweep(&lam, psi, &g, &conn.a, omega)?;
        lam = lam_next;
        let (g_next, du_g, nd_g, res_g) = metric_sweep(&g, &lam, psi, omega)?;
        g = g_next;
        let (conn_next, du_c, mut nd, mut eq) = connection_sweep(&conn, &lam, psi, &g, omega)?;
        conn = conn_next;
        nd.metric = nd_g;
        eq.metric = res_g;
        let upd = du_l.max(du_g).max(du_c);
        history.push(upd);
        if upd < cfg.tol {
            let mut state = GaugeState {
                g,
                lambda: lam,
                conn,
                diagnostics: EllipticDiagnostics {
                    iterations: it,
                    update_norm: upd,
                    update_history: history,
                    non_decay: nd,
                    equations: eq,
                    ..Default::default()
                },
            };
            state.diagnostics.constraints = state.constraints(psi)?;
            return Ok(state);
        }
        let stage = if du_l >= du_g && du_l >= du_c {
            "lambda"
        } else if du_g >= du_c {
            "metric"
        } else {
            "connection"
        };
        guard.check(stage, it, upd)?;
    }
    Err(exhausted(
        "outer",
        cfg,
        *history.last().unwrap_or(&f64::NAN),
    ))
}
