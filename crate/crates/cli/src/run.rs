//! The `run` pipeline and the thin subcommand wrappers.

use std::path::Path;

use serde::Serialize;
use smcf_core::analysis::{exponents, pair_check, Exponent, ExponentTable, PairVerdict};
use smcf_core::evolution::{spatial_norms, Evolution, SpatialNorms, TrajectorySample};
use smcf_core::gauge::{smallness_norm, solve_elliptic_system, EllipticDiagnostics};
use smcf_core::geometry::ConstraintReport;
use smcf_core::oracle::{oracle_compare, CompareReport};

use crate::checkpoint::Checkpoint;
use crate::config::RunConfig;
use crate::error::{CliError, CliResult};
use crate::output::{emit_json, CsvWriter, CSV_SCHEMA_VERSION};

#[derive(Clone, Debug, Serialize)]
pub struct SupStats {
    pub h_sd_norm: f64,
    pub lambda_linf: f64,
    pub constraint_linf: f64,
    pub metric_dev: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct RunSummary {
    pub csv_schema_version: u32,
    pub completed: bool,
    pub resumed_from_step: Option<usize>,
    pub steps: usize,
    pub t_final: f64,
    pub dt: f64,
    pub cfl: f64,
    pub data_seed: u64,
    pub samples_written: usize,
    pub checkpoints_written: usize,
    pub monitor_ks: Vec<usize>,
    /// Over the samples of this invocation.
    pub sup: SupStats,
    pub max_rho: Vec<f64>,
    pub strichartz_acc: f64,
    pub final_sample: Option<TrajectorySample>,
}

fn save_checkpoint(ev: &Evolution, path: &Path) -> CliResult<()> {
    let carry = ev.carry();
    Checkpoint::new(ev.psi(), ev.t(), ev.step_index() as u64, Some(&carry)).save(path)
}

/// Runs the evolution described by `cfg`, optionally continuing from a
/// checkpoint, and writes the configured artifacts.
pub fn run(cfg: &RunConfig, resume: Option<&Path>) -> CliResult<RunSummary> {
    cfg.validate()?;
    let grid = cfg.grid()?;
    let ecfg = cfg.evolution_config(&grid);

    let (mut ev, resumed_from) = match resume {
        Some(path) => {
            let ck = Checkpoint::load(path)?;
            let psi = ck.psi(&grid)?;
            let carry = ck.carry(&grid)?.ok_or_else(|| {
                CliError::checkpoint("checkpoint has no evolution carry to resume from")
            })?;
            let step = carry.step;
            if step % ecfg.resolve_every != 0 {
                return Err(CliError::checkpoint(format!(
                    "step {step} is not a multiple of time.resolve_every = {}",
                    ecfg.resolve_every
                )));
            }
            let ev = Evolution::resume(&psi, carry, &ecfg)
                .map_err(|e| CliError::solver("evolution", e).at(ck.t))?;
            (ev, Some(step))
        }
        None => {
            let psi = cfg.initial_data(&grid)?;
            let ev = Evolution::new(&psi, &ecfg)
                .map_err(|e| CliError::solver("evolution", e).at(0.0))?;
            (ev, None)
        }
    };

    let mut csv = match &cfg.output.csv {
        Some(p) => Some(CsvWriter::open(
            p,
            &ecfg.monitor_ks,
            resumed_from.is_some(),
        )?),
        None => None,
    };
    let mut written = 0;
    let mut checkpoints = 0;
    let flush_rows =
        |ev: &Evolution, csv: &mut Option<CsvWriter>, written: &mut usize| -> CliResult<()> {
            let samples = &ev.report().samples;
            if let Some(w) = csv.as_mut() {
                for s in &samples[*written..] {
                    w.row(s)?;
                }
            }
            *written = samples.len();
            Ok(())
        };
    flush_rows(&ev, &mut csv, &mut written)?;

    let limit = cfg.time.max_steps.map(|m| resumed_from.unwrap_or(0) + m);
    loop {
        if limit.is_some_and(|l| ev.step_index() >= l) {
            break;
        }
        let t = ev.t();
        let more = ev
            .advance()
            .map_err(|e| CliError::solver("evolution", e).at(t))?;
        if !more {
            break;
        }
        flush_rows(&ev, &mut csv, &mut written)?;
        if let Some(p) = &cfg.output.checkpoint {
            let every = cfg.output.checkpoint_every;
            if every > 0 && ev.step_index() % every == 0 && ev.at_resolve_point() && !ev.is_done() {
                save_checkpoint(&ev, p)?;
                checkpoints += 1;
            }
        }
    }
    if let Some(w) = csv.as_mut() {
        w.flush()?;
    }
    if let Some(p) = &cfg.output.checkpoint {
        if ev.at_resolve_point() {
            save_checkpoint(&ev, p)?;
            checkpoints += 1;
        }
    }

    let completed = ev.is_done();
    let steps = ev.step_index();
    let t_final = ev.t();
    let report = ev.into_report();
    let samples = &report.samples;
    let fold = |f: &dyn Fn(&TrajectorySample) -> f64| samples.iter().map(f).fold(0.0, f64::max);
    let summary = RunSummary {
        csv_schema_version: CSV_SCHEMA_VERSION,
        completed,
        resumed_from_step: resumed_from,
        steps,
        t_final,
        dt: report.dt,
        cfl: report.cfl,
        data_seed: cfg.data.seed,
        samples_written: samples.len(),
        checkpoints_written: checkpoints,
        monitor_ks: report.monitor_ks.clone(),
        sup: SupStats {
            h_sd_norm: fold(&|s| s.h_sd_norm),
            lambda_linf: fold(&|s| s.lambda_linf),
            constraint_linf: fold(&|s| s.constraints.max_linf()),
            metric_dev: fold(&|s| s.metric_dev),
        },
        max_rho: report.max_rho.clone(),
        strichartz_acc: report.strichartz,
        final_sample: samples.last().cloned(),
    };
    if let Some(p) = &cfg.output.json {
        emit_json(&summary, Some(p))?;
    }
    Ok(summary)
}

#[derive(Clone, Debug, Serialize)]
pub struct EllipticSummary {
    pub smallness_norm: f64,
    pub diagnostics: EllipticDiagnostics,
    pub lambda_linf: f64,
    pub metric_deviation_linf: f64,
    pub min_metric_eigenvalue: f64,
}

pub fn elliptic(cfg: &RunConfig) -> CliResult<EllipticSummary> {
    cfg.validate()?;
    let grid = cfg.grid()?;
    let psi = cfg.initial_data(&grid)?;
    let small = smallness_norm(&psi, &cfg.elliptic).map_err(|e| CliError::solver("elliptic", e))?;
    let st =
        solve_elliptic_system(&psi, &cfg.elliptic).map_err(|e| CliError::solver("elliptic", e))?;
    Ok(EllipticSummary {
        smallness_norm: small,
        lambda_linf: st.lambda.norm_linf(),
        metric_deviation_linf: st
            .g
            .h_comps()
            .iter()
            .map(|h| h.norm_linf())
            .fold(0.0, f64::max),
        min_metric_eigenvalue: st.g.min_eigenvalue(),
        diagnostics: st.diagnostics,
    })
}

pub fn oracle(cfg: &RunConfig) -> CliResult<CompareReport> {
    cfg.validate()?;
    let grid = cfg.grid()?;
    let psi = cfg.initial_data(&grid)?;
    oracle_compare(&psi, &cfg.compare_config()).map_err(|e| CliError::solver("oracle", e))
}

#[derive(Clone, Debug, Serialize)]
pub struct NormTable {
    pub t: f64,
    pub step: u64,
    pub monitor_ks: Vec<usize>,
    pub energies: Vec<f64>,
    pub l2_norm: f64,
    pub h_sd_norm: f64,
    pub lambda_linf: f64,
    pub lambda_hk: Vec<f64>,
    pub constraints: ConstraintReport,
}

/// Spatial norms of the `ψ` stored in a checkpoint, computed exactly as
/// the evolution computes them at a sample.
pub fn norms(cfg: &RunConfig, checkpoint: &Path) -> CliResult<NormTable> {
    let ck = Checkpoint::load(checkpoint)?;
    let mut cfg = cfg.clone();
    cfg.dimension = ck.d;
    cfg.grid.n = ck.n;
    cfg.grid.length = ck.length;
    cfg.validate()?;
    let grid = cfg.grid()?;
    let psi = ck.psi(&grid)?;
    let (n, _) = spatial_norms(&psi, &cfg.evolution_config(&grid))
        .map_err(|e| CliError::solver("norms", e).at(ck.t))?;
    let SpatialNorms {
        energies,
        l2_norm,
        h_sd_norm,
        lambda_linf,
        lambda_hk,
        constraints,
    } = n;
    Ok(NormTable {
        t: ck.t,
        step: ck.step,
        monitor_ks: cfg.monitors.k_list.clone(),
        energies,
        l2_norm,
        h_sd_norm,
        lambda_linf,
        lambda_hk,
        constraints,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct PairReport {
    pub d: usize,
    pub q: Exponent,
    pub r: Exponent,
    pub q_tilde: Exponent,
    pub r_tilde: Exponent,
    pub verdict: PairVerdict,
    pub exponents: Option<ExponentTable>,
}

pub fn check_pairs(d: usize, q: &str, r: &str, qt: &str, rt: &str) -> CliResult<PairReport> {
    if d < 1 {
        return Err(CliError::config("check-pairs", "dimension must be >= 1"));
    }
    let p = |s: &str| -> CliResult<Exponent> {
        s.parse()
            .map_err(|e: smcf_core::SmcfError| CliError::config("check-pairs", e.to_string()))
    };
    let (q, r, qt, rt) = (p(q)?, p(r)?, p(qt)?, p(rt)?);
    Ok(PairReport {
        d,
        q,
        r,
        q_tilde: qt,
        r_tilde: rt,
        verdict: pair_check(q, r, qt, rt, d),
        exponents: exponents(d).ok(),
    })
}
