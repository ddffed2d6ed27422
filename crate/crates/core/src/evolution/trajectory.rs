use num_complex::Complex64;
use serde::Serialize;

use super::config::EvolutionConfig;
use super::step::{advance_psi, gauge_for};
use crate::analysis::{exponents, ExponentTable, StrichartzAccumulator};
use crate::error::{Result, SmcfError};
use crate::gauge::GaugeState;
use crate::geometry::{covariant_derivative, energy, intrinsic_norm, ConstraintReport, Tensor};
use crate::spectral::{sobolev_norm, Field, Grid};

/// `G_{αβ} = Im(ψ conj λ_{αβ}) + ½(∇_α V_β + ∇_β V_α)`, row-major.
pub fn g_tensor(psi: &Field, state: &GaugeState) -> Result<Vec<Field>> {
    let g = &state.g;
    let d = g.dim();
    let lowered: Vec<Field> = (0..d)
        .map(|b| {
            let mut acc = Field::zeros(psi.grid());
            for (c, vc) in state.conn.v.iter().enumerate() {
                acc.add_product(&g.g(b, c), vc);
            }
            acc
        })
        .collect();
    let dv = covariant_derivative(&Tensor::covector(lowered)?, g, None)?;
    let mut out = Vec::with_capacity(d * d);
    for a in 0..d {
        for b in 0..d {
            // dv index (β, α) holds ∇_α V_β
            let sym = (&dv.comps()[b * d + a] + &dv.comps()[a * d + b]).scale(0.5);
            let im = psi.zip_map(state.lambda.get(a, b), |p, l| {
                Complex64::new((p * l.conj()).im, 0.0)
            });
            out.push(&im + &sym);
        }
    }
    Ok(out)
}

/// One row of monitored quantities.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TrajectorySample {
    pub t: f64,
    pub step: usize,
    /// `E^k` for each monitored `k`, in configuration order.
    pub energies: Vec<f64>,
    pub l2_norm: f64,
    pub h_sd_norm: f64,
    pub lambda_linf: f64,
    /// Strichartz accumulator over `[0, t]`.
    pub strichartz: f64,
    pub constraints: ConstraintReport,
    /// Growth ratio since the previous sample for each `k`, when defined.
    pub rho: Vec<Option<f64>>,
    /// `‖g_integrated - g_resolved‖_{L^∞}`.
    pub metric_dev: f64,
    pub dt_used: f64,
    pub elliptic_iterations: usize,
}

#[derive(Clone, Debug, Serialize)]
pub struct TrajectoryReport {
    pub d: usize,
    pub n: usize,
    pub length: f64,
    pub dt: f64,
    /// `dt / Δx²`.
    pub cfl: f64,
    pub monitor_ks: Vec<usize>,
    pub samples: Vec<TrajectorySample>,
    pub sup_h_sd: f64,
    pub strichartz: f64,
    /// `max |ρ|` over samples where it is defined, per `k`.
    pub max_rho: Vec<f64>,
    /// `ψ` at each sample when requested.
    #[serde(skip)]
    pub fields: Vec<Field>,
}

impl TrajectoryReport {
    pub fn times(&self) -> Vec<f64> {
        self.samples.iter().map(|s| s.t).collect()
    }

    /// Stored `ψ` at the sample closest to `t`, if fields were kept.
    pub fn field_near(&self, t: f64) -> Option<(f64, &Field)> {
        self.samples
            .iter()
            .zip(&self.fields)
            .min_by(|a, b| (a.0.t - t).abs().total_cmp(&(b.0.t - t).abs()))
            .map(|(s, f)| (s.t, f))
    }

    /// Relative drift `(E^k(T) - E^k(0)) / E^k(0)` for monitor slot `i`.
    pub fn energy_drift(&self, i: usize) -> f64 {
        let (Some(a), Some(b)) = (self.samples.first(), self.samples.last()) else {
            return 0.0;
        };
        let e0 = a.energies[i];
        if e0 == 0.0 {
            0.0
        } else {
            (b.energies[i] - e0) / e0
        }
    }
}

/// Quantities carried between samples, enough to resume a run exactly.
#[derive(Clone, Debug)]
pub struct Carry {
    pub step: usize,
    pub t: f64,
    pub acc_sums: Vec<f64>,
    pub acc_last: Option<(f64, Vec<f64>)>,
    /// Integrated metric `g_ab`, row-major.
    pub g_int: Vec<Field>,
    /// `2G` at the current time.
    pub rate: Vec<Field>,
    pub prev: Option<PrevSample>,
    pub sup_h: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct PrevSample {
    pub t: f64,
    pub energies: Vec<f64>,
    pub lambda_linf: f64,
    pub lambda_hk: Vec<f64>,
}

impl Carry {
    /// Flat little-endian-friendly encoding.
    pub fn to_words(&self) -> Vec<f64> {
        let mut w = vec![
            self.step as f64,
            self.t,
            self.sup_h,
            self.acc_sums.len() as f64,
        ];
        w.extend(&self.acc_sums);
        match &self.acc_last {
            Some((t, v)) => {
                w.extend([1.0, *t, v.len() as f64]);
                w.extend(v);
            }
            None => w.push(0.0),
        }
        for f in self.g_int.iter().chain(&self.rate) {
            w.extend(f.values().iter().map(|v| v.re));
        }
        match &self.prev {
            Some(p) => {
                w.extend([1.0, p.t, p.lambda_linf, p.energies.len() as f64]);
                w.extend(&p.energies);
                w.extend(&p.lambda_hk);
            }
            None => w.push(0.0),
        }
        w
    }

    pub fn from_words(words: &[f64], grid: &Grid) -> Result<Self> {
        let bad = || SmcfError::ShapeMismatch("truncated evolution carry".into());
        let mut it = words.iter().copied();
        let mut next = || it.next().ok_or_else(bad);
        let step = next()? as usize;
        let t = next()?;
        let sup_h = next()?;
        let ns = next()? as usize;
        let acc_sums = (0..ns).map(|_| next()).collect::<Result<Vec<_>>>()?;
        let acc_last = if next()? != 0.0 {
            let lt = next()?;
            let nv = next()? as usize;
            Some((lt, (0..nv).map(|_| next()).collect::<Result<Vec<_>>>()?))
        } else {
            None
        };
        let d = grid.dim();
        let mut field = || -> Result<Field> {
            let v = (0..grid.len())
                .map(|_| next().map(|x| Complex64::new(x, 0.0)))
                .collect::<Result<Vec<_>>>()?;
            Field::from_vec(grid, v)
        };
        let g_int = (0..d * d).map(|_| field()).collect::<Result<Vec<_>>>()?;
        let rate = (0..d * d).map(|_| field()).collect::<Result<Vec<_>>>()?;
        let prev = if next()? != 0.0 {
            let pt = next()?;
            let lambda_linf = next()?;
            let nk = next()? as usize;
            let energies = (0..nk).map(|_| next()).collect::<Result<Vec<_>>>()?;
            let lambda_hk = (0..nk).map(|_| next()).collect::<Result<Vec<_>>>()?;
            Some(PrevSample {
                t: pt,
                energies,
                lambda_linf,
                lambda_hk,
            })
        } else {
            None
        };
        Ok(Self {
            step,
            t,
            acc_sums,
            acc_last,
            g_int,
            rate,
            prev,
            sup_h,
        })
    }
}

/// Below this `‖λ‖_{L^∞}` the growth ratio is not reported.
pub const RHO_FLOOR: f64 = 1e-6;

/// Step-by-step driver behind [`evolve`], exposing the state between steps
/// for checkpointing.
pub struct Evolution {
    cfg: EvolutionConfig,
    table: ExponentTable,
    psi: Field,
    state: GaugeState,
    acc: StrichartzAccumulator,
    carry_step: usize,
    t: f64,
    g_int: Vec<Field>,
    rate: Vec<Field>,
    prev: Option<PrevSample>,
    sup_h: f64,
    report: TrajectoryReport,
}

impl Evolution {
    pub fn new(psi0: &Field, cfg: &EvolutionConfig) -> Result<Self> {
        cfg.validate()?;
        let state = gauge_for(psi0, cfg, None)?;
        let rate = g_tensor(psi0, &state)?
            .iter()
            .map(|f| f.scale(2.0))
            .collect();
        let d = psi0.grid().dim();
        let g_int = (0..d * d).map(|k| state.g.g(k / d, k % d)).collect();
        let table = exponents(d)?;
        let mut ev = Self::assemble(
            psi0.clone(),
            state,
            cfg,
            table.clone(),
            StrichartzAccumulator::new(table),
        );
        ev.g_int = g_int;
        ev.rate = rate;
        ev.record(cfg.dt)?;
        Ok(ev)
    }

    /// Continues from a carry taken at a step where the coefficients were
    /// re-solved. No sample is recorded for the resume point itself.
    pub fn resume(psi: &Field, carry: Carry, cfg: &EvolutionConfig) -> Result<Self> {
        cfg.validate()?;
        let state = gauge_for(psi, cfg, None)?;
        let table = exponents(psi.grid().dim())?;
        let acc = StrichartzAccumulator::restore(table.clone(), carry.acc_sums, carry.acc_last);
        let mut ev = Self::assemble(psi.clone(), state, cfg, table, acc);
        ev.carry_step = carry.step;
        ev.t = carry.t;
        ev.g_int = carry.g_int;
        ev.rate = carry.rate;
        ev.prev = carry.prev;
        ev.sup_h = carry.sup_h;
        Ok(ev)
    }

    fn assemble(
        psi: Field,
        state: GaugeState,
        cfg: &EvolutionConfig,
        table: ExponentTable,
        acc: StrichartzAccumulator,
    ) -> Self {
        let grid = psi.grid().clone();
        let report = TrajectoryReport {
            d: grid.dim(),
            n: grid.n(),
            length: grid.length(),
            dt: cfg.dt,
            cfl: cfg.cfl(&grid),
            monitor_ks: cfg.monitor_ks.clone(),
            samples: Vec::new(),
            sup_h_sd: 0.0,
            strichartz: 0.0,
            max_rho: vec![0.0; cfg.monitor_ks.len()],
            fields: Vec::new(),
        };
        Self {
            cfg: cfg.clone(),
            table,
            psi,
            state,
            acc,
            carry_step: 0,
            t: 0.0,
            g_int: Vec::new(),
            rate: Vec::new(),
            prev: None,
            sup_h: 0.0,
            report,
        }
    }

    pub fn psi(&self) -> &Field {
        &self.psi
    }

    pub fn state(&self) -> &GaugeState {
        &self.state
    }

    pub fn t(&self) -> f64 {
        self.t
    }

    pub fn step_index(&self) -> usize {
        self.carry_step
    }

    pub fn is_done(&self) -> bool {
        self.carry_step >= self.cfg.steps()
    }

    /// True when the coefficients at the current step were solved for the
    /// current `ψ`, so that a carry taken now resumes exactly.
    pub fn at_resolve_point(&self) -> bool {
        self.carry_step.is_multiple_of(self.cfg.resolve_every)
    }

    pub fn report(&self) -> &TrajectoryReport {
        &self.report
    }

    pub fn into_report(self) -> TrajectoryReport {
        self.report
    }

    pub fn carry(&self) -> Carry {
        let (acc_sums, acc_last) = self.acc.state();
        Carry {
            step: self.carry_step,
            t: self.t,
            acc_sums,
            acc_last,
            g_int: self.g_int.clone(),
            rate: self.rate.clone(),
            prev: self.prev.clone(),
            sup_h: self.sup_h,
        }
    }

    /// Takes one step; returns false once `t_end` has been reached.
    pub fn advance(&mut self) -> Result<bool> {
        if self.is_done() {
            return Ok(false);
        }
        let k = self.carry_step;
        let t_next = if k + 1 >= self.cfg.steps() {
            self.cfg.t_end
        } else {
            (k + 1) as f64 * self.cfg.dt
        };
        let dt = t_next - self.t;
        let frozen = !k.is_multiple_of(self.cfg.resolve_every);
        let next = advance_psi(&self.psi, &self.state, &self.cfg, dt, self.t, frozen)?;
        let state = if (k + 1).is_multiple_of(self.cfg.resolve_every) {
            gauge_for(&next, &self.cfg, None)?
        } else {
            self.state.clone()
        };
        let rate: Vec<Field> = g_tensor(&next, &state)?
            .iter()
            .map(|f| f.scale(2.0))
            .collect();
        for ((gi, r0), r1) in self.g_int.iter_mut().zip(&self.rate).zip(&rate) {
            gi.axpy(Complex64::new(0.5 * dt, 0.0), r0);
            gi.axpy(Complex64::new(0.5 * dt, 0.0), r1);
        }
        self.rate = rate;
        self.psi = next;
        self.state = state;
        self.t = t_next;
        self.carry_step = k + 1;
        if self.carry_step.is_multiple_of(self.cfg.sample_every) || self.is_done() {
            self.record(dt)?;
        }
        Ok(true)
    }

    fn metric_dev(&self) -> f64 {
        let g = &self.state.g;
        let d = g.dim();
        self.g_int
            .iter()
            .enumerate()
            .map(|(k, f)| f.max_abs_diff(&g.g(k / d, k % d)))
            .fold(0.0, f64::max)
    }

    fn record(&mut self, dt: f64) -> Result<()> {
        let psi = &self.psi;
        let st = &self.state;
        let norms = spatial_norms_with(psi, st, &self.cfg.monitor_ks, &self.table)?;
        let SpatialNorms {
            energies,
            l2_norm,
            h_sd_norm: h_sd,
            lambda_linf,
            lambda_hk,
            constraints,
        } = norms;
        self.sup_h = self.sup_h.max(h_sd);
        self.acc.push(self.t, psi)?;
        let rho: Vec<Option<f64>> = match &self.prev {
            Some(p) if p.lambda_linf > RHO_FLOOR => p
                .energies
                .iter()
                .zip(&energies)
                .zip(&p.lambda_hk)
                .map(|((e0, e1), lh)| {
                    let den = (self.t - p.t) * p.lambda_linf.powi(2) * lh.powi(2);
                    (den > 0.0).then(|| (e1 - e0) / den)
                })
                .collect(),
            _ => vec![None; energies.len()],
        };
        for (m, r) in self.report.max_rho.iter_mut().zip(&rho) {
            if let Some(r) = r {
                *m = m.max(r.abs());
            }
        }
        let sample = TrajectorySample {
            t: self.t,
            step: self.carry_step,
            energies: energies.clone(),
            l2_norm,
            h_sd_norm: h_sd,
            lambda_linf,
            strichartz: self.acc.value(),
            constraints,
            rho,
            metric_dev: self.metric_dev(),
            dt_used: dt,
            elliptic_iterations: st.diagnostics.iterations,
        };
        self.prev = Some(PrevSample {
            t: self.t,
            energies,
            lambda_linf,
            lambda_hk,
        });
        self.report.sup_h_sd = self.sup_h;
        self.report.strichartz = self.acc.value();
        self.report.samples.push(sample);
        if self.cfg.store_fields {
            self.report.fields.push(psi.clone());
        }
        Ok(())
    }
}

/// The instantaneous, history-free part of a sample.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SpatialNorms {
    pub energies: Vec<f64>,
    pub l2_norm: f64,
    pub h_sd_norm: f64,
    pub lambda_linf: f64,
    /// `‖λ‖_{𝖧^k}` for each monitored `k`.
    pub lambda_hk: Vec<f64>,
    pub constraints: ConstraintReport,
}

/// Solves the gauge for `ψ` as the evolution would and evaluates the
/// spatial monitors. Matches the corresponding fields of a trajectory
/// sample taken at a resolve point.
pub fn spatial_norms(psi: &Field, cfg: &EvolutionConfig) -> Result<(SpatialNorms, GaugeState)> {
    cfg.validate()?;
    let state = gauge_for(psi, cfg, None)?;
    let table = exponents(psi.grid().dim())?;
    let norms = spatial_norms_with(psi, &state, &cfg.monitor_ks, &table)?;
    Ok((norms, state))
}

fn spatial_norms_with(
    psi: &Field,
    st: &GaugeState,
    ks: &[usize],
    table: &ExponentTable,
) -> Result<SpatialNorms> {
    let a = Some(st.conn.a.as_slice());
    let energies = ks
        .iter()
        .map(|&k| energy(psi, &st.g, a, k))
        .collect::<Result<Vec<_>>>()?;
    let lambda_hk = ks
        .iter()
        .map(|&k| intrinsic_norm(&st.lambda.as_tensor(), &st.g, a, k))
        .collect::<Result<Vec<_>>>()?;
    Ok(SpatialNorms {
        energies,
        l2_norm: psi.norm_l2(),
        h_sd_norm: sobolev_norm(psi, table.s_d),
        lambda_linf: st.lambda.norm_linf(),
        lambda_hk,
        constraints: st.constraints(psi)?,
    })
}

/// Runs from `ψ₀` to `t_end`, recording every monitor.
pub fn evolve(psi0: &Field, cfg: &EvolutionConfig) -> Result<TrajectoryReport> {
    let mut ev = Evolution::new(psi0, cfg)?;
    while ev.advance()? {}
    Ok(ev.into_report())
}
