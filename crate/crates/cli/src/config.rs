//! Flat `section.key = value` run configuration.
//!
//! A configuration file holds one assignment per line. `#` starts a comment
//! and a `[section]` header prefixes the keys that follow it, so
//! `[grid]` then `n = 32` is the same as `grid.n = 32`. Command-line
//! overrides use the same keys as `--grid.n=32`. Unknown keys are errors.

use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::Serialize;
use smcf_core::data::{gaussian, single_mode};
use smcf_core::evolution::{default_dt, EvolutionConfig, GaugeMode, Scheme};
use smcf_core::gauge::EllipticConfig;
use smcf_core::oracle::CompareConfig;
use smcf_core::{Field, Grid};

use crate::checkpoint::Checkpoint;
use crate::error::{CliError, CliResult};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum DataKind {
    Gaussian,
    SingleMode,
    File,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GridSection {
    pub n: usize,
    pub length: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DataSection {
    pub kind: DataKind,
    pub amplitude: f64,
    pub width: f64,
    /// Carrier wavenumber of the Gaussian, one entry per axis (or empty).
    pub modulation: Vec<f64>,
    /// Integer mode of `single_mode` data.
    pub mode: Vec<i64>,
    /// Sobolev index in which `amplitude` is measured; `None` uses `s_d`.
    pub regularity: Option<f64>,
    pub seed: u64,
    pub file: Option<PathBuf>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TimeSection {
    /// `None` selects `0.25 (L/n)²`.
    pub dt: Option<f64>,
    pub t_end: f64,
    pub scheme: Scheme,
    pub resolve_every: usize,
    pub sample_every: usize,
    pub gauge: GaugeMode,
    pub force_v_zero: bool,
    /// Stop after this many steps even if `t_end` is not reached.
    pub max_steps: Option<usize>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MonitorSection {
    pub k_list: Vec<usize>,
    pub c_e_budget: f64,
    pub c_lin_budget: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct OutputSection {
    pub csv: Option<PathBuf>,
    pub checkpoint: Option<PathBuf>,
    /// Steps between checkpoints; 0 writes only the final one.
    pub checkpoint_every: usize,
    pub json: Option<PathBuf>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct OracleSection {
    pub t: f64,
    pub dt: Option<f64>,
    pub immersion_ratio: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RunConfig {
    pub dimension: usize,
    pub grid: GridSection,
    pub data: DataSection,
    pub elliptic: EllipticConfig,
    pub time: TimeSection,
    pub monitors: MonitorSection,
    pub output: OutputSection,
    pub oracle: OracleSection,
}

impl Default for RunConfig {
    fn default() -> Self {
        let oracle = CompareConfig::default();
        Self {
            dimension: 2,
            grid: GridSection {
                n: 32,
                length: 2.0 * std::f64::consts::PI,
            },
            data: DataSection {
                kind: DataKind::Gaussian,
                amplitude: 1e-2,
                width: 0.8,
                modulation: Vec::new(),
                mode: Vec::new(),
                regularity: None,
                seed: 0,
                file: None,
            },
            elliptic: EllipticConfig::default(),
            time: TimeSection {
                dt: None,
                t_end: 1.0,
                scheme: Scheme::SplitStep,
                resolve_every: 1,
                sample_every: 1,
                gauge: GaugeMode::Solved,
                force_v_zero: false,
                max_steps: None,
            },
            monitors: MonitorSection {
                k_list: vec![0, 1, 2],
                c_e_budget: 100.0,
                c_lin_budget: 10.0,
            },
            output: OutputSection {
                csv: None,
                checkpoint: None,
                checkpoint_every: 0,
                json: None,
            },
            oracle: OracleSection {
                t: oracle.t,
                dt: None,
                immersion_ratio: oracle.immersion_ratio,
            },
        }
    }
}

fn parse<T: FromStr>(key: &str, value: &str) -> CliResult<T> {
    value
        .trim()
        .parse()
        .map_err(|_| CliError::config("config", format!("{key}: cannot parse {value:?}")))
}

/// Accepts plain numbers and multiples of π written as `2pi` or `pi`.
fn parse_f64(key: &str, value: &str) -> CliResult<f64> {
    let v = value.trim();
    if let Some(head) = v.strip_suffix("pi") {
        let head = head.trim().trim_end_matches('*').trim();
        let k = if head.is_empty() {
            1.0
        } else {
            parse::<f64>(key, head)?
        };
        return Ok(k * std::f64::consts::PI);
    }
    parse(key, v)
}

fn parse_list<T: FromStr>(key: &str, value: &str) -> CliResult<Vec<T>> {
    let v = value.trim();
    if v.is_empty() {
        return Ok(Vec::new());
    }
    v.split(',').map(|p| parse(key, p)).collect()
}

fn parse_optional<T: FromStr>(key: &str, value: &str) -> CliResult<Option<T>> {
    match value.trim() {
        "" | "auto" | "none" => Ok(None),
        v => parse(key, v).map(Some),
    }
}

fn parse_path(value: &str) -> Option<PathBuf> {
    match value.trim() {
        "" | "none" => None,
        v => Some(PathBuf::from(v)),
    }
}

impl RunConfig {
    /// Applies one assignment.
    pub fn set(&mut self, key: &str, value: &str) -> CliResult<()> {
        let key = key.trim();
        match key {
            "dimension" => self.dimension = parse(key, value)?,
            "grid.n" => self.grid.n = parse(key, value)?,
            "grid.length" => self.grid.length = parse_f64(key, value)?,
            "data.kind" => {
                self.data.kind = match value.trim() {
                    "gaussian" => DataKind::Gaussian,
                    "single_mode" => DataKind::SingleMode,
                    "file" => DataKind::File,
                    other => {
                        return Err(CliError::config(
                            "config",
                            format!("data.kind: unknown kind {other:?}"),
                        ))
                    }
                }
            }
            "data.amplitude" => self.data.amplitude = parse_f64(key, value)?,
            "data.width" => self.data.width = parse_f64(key, value)?,
            "data.modulation" => self.data.modulation = parse_list(key, value)?,
            "data.mode" => self.data.mode = parse_list(key, value)?,
            "data.regularity" => self.data.regularity = parse_optional(key, value)?,
            "data.seed" => self.data.seed = parse(key, value)?,
            "data.file" => self.data.file = parse_path(value),
            "elliptic.tol" => self.elliptic.tol = parse(key, value)?,
            "elliptic.max_iter" => self.elliptic.max_iter = parse(key, value)?,
            "elliptic.under_relaxation" => self.elliptic.under_relaxation = parse(key, value)?,
            "elliptic.smallness" => self.elliptic.smallness = parse(key, value)?,
            "elliptic.stall_window" => self.elliptic.stall_window = parse(key, value)?,
            "time.dt" => self.time.dt = parse_optional(key, value)?,
            "time.t_end" => self.time.t_end = parse_f64(key, value)?,
            "time.scheme" => {
                self.time.scheme = value
                    .trim()
                    .parse()
                    .map_err(|e: smcf_core::SmcfError| CliError::config("config", e.to_string()))?
            }
            "time.resolve_every" => self.time.resolve_every = parse(key, value)?,
            "time.sample_every" => self.time.sample_every = parse(key, value)?,
            "time.gauge" => {
                self.time.gauge = match value.trim() {
                    "solved" => GaugeMode::Solved,
                    "trivial" => GaugeMode::Trivial,
                    other => {
                        return Err(CliError::config(
                            "config",
                            format!("time.gauge: unknown mode {other:?}"),
                        ))
                    }
                }
            }
            "time.force_v_zero" => self.time.force_v_zero = parse(key, value)?,
            "time.max_steps" => self.time.max_steps = parse_optional(key, value)?,
            "monitors.k_list" => self.monitors.k_list = parse_list(key, value)?,
            "monitors.c_e_budget" => self.monitors.c_e_budget = parse(key, value)?,
            "monitors.c_lin_budget" => self.monitors.c_lin_budget = parse(key, value)?,
            "output.csv" => self.output.csv = parse_path(value),
            "output.checkpoint" => self.output.checkpoint = parse_path(value),
            "output.checkpoint_every" => self.output.checkpoint_every = parse(key, value)?,
            "output.json" => self.output.json = parse_path(value),
            "oracle.t" => self.oracle.t = parse_f64(key, value)?,
            "oracle.dt" => self.oracle.dt = parse_optional(key, value)?,
            "oracle.immersion_ratio" => self.oracle.immersion_ratio = parse(key, value)?,
            _ => return Err(CliError::config("config", format!("unknown key {key:?}"))),
        }
        Ok(())
    }

    /// Applies the assignments in a configuration text.
    pub fn apply_text(&mut self, text: &str) -> CliResult<()> {
        let mut section = String::new();
        for (no, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            if let Some(name) = line.strip_prefix('[').and_then(|l| l.strip_suffix(']')) {
                section = name.trim().to_string();
                continue;
            }
            let (k, v) = line.split_once('=').ok_or_else(|| {
                CliError::config(
                    "config",
                    format!("line {}: expected key = value, got {raw:?}", no + 1),
                )
            })?;
            let key = if section.is_empty() {
                k.trim().to_string()
            } else {
                format!("{section}.{}", k.trim())
            };
            self.set(&key, v).map_err(|mut e| {
                e.message = format!("line {}: {}", no + 1, e.message);
                e
            })?;
        }
        Ok(())
    }

    pub fn apply_file(&mut self, path: &Path) -> CliResult<()> {
        let text = fs::read_to_string(path).map_err(|e| CliError::io("config", path, e))?;
        self.apply_text(&text)
    }

    /// Applies `--key=value` overrides.
    pub fn apply_overrides<S: AsRef<str>>(&mut self, args: &[S]) -> CliResult<()> {
        for a in args {
            let a = a.as_ref();
            let body = a.strip_prefix("--").ok_or_else(|| {
                CliError::config("config", format!("expected --key=value, got {a:?}"))
            })?;
            let (k, v) = body.split_once('=').ok_or_else(|| {
                CliError::config("config", format!("expected --key=value, got {a:?}"))
            })?;
            self.set(k, v)?;
        }
        Ok(())
    }

    pub fn grid(&self) -> CliResult<Grid> {
        Grid::new(self.dimension, self.grid.n, self.grid.length)
            .map_err(|e| CliError::solver("config", e))
    }

    pub fn regularity(&self) -> f64 {
        self.data.regularity.unwrap_or(match self.dimension {
            1 => 2.0,
            d => smcf_core::analysis::exponents(d)
                .map(|t| t.s_d)
                .unwrap_or(2.0),
        })
    }

    pub fn evolution_config(&self, grid: &Grid) -> EvolutionConfig {
        let mut cfg = EvolutionConfig::for_grid(grid, self.time.t_end);
        cfg.dt = self.time.dt.unwrap_or_else(|| default_dt(grid));
        cfg.scheme = self.time.scheme;
        cfg.resolve_every = self.time.resolve_every;
        cfg.sample_every = self.time.sample_every;
        cfg.gauge = self.time.gauge;
        cfg.force_v_zero = self.time.force_v_zero;
        cfg.monitor_ks = self.monitors.k_list.clone();
        cfg.c_e_budget = self.monitors.c_e_budget;
        cfg.c_lin_budget = self.monitors.c_lin_budget;
        cfg.elliptic = self.elliptic.clone();
        cfg
    }

    pub fn compare_config(&self) -> CompareConfig {
        CompareConfig {
            t: self.oracle.t,
            dt_gauge: self.oracle.dt,
            immersion_ratio: self.oracle.immersion_ratio,
            elliptic: self.elliptic.clone(),
            ..Default::default()
        }
    }

    /// Checks every field before any computation starts.
    pub fn validate(&self) -> CliResult<()> {
        let bad = |m: String| Err(CliError::config("config", m));
        let grid = self.grid()?;
        if !(self.data.amplitude.is_finite() && self.data.amplitude >= 0.0) {
            return bad(format!(
                "data.amplitude must be finite and >= 0, got {}",
                self.data.amplitude
            ));
        }
        match self.data.kind {
            DataKind::Gaussian => {
                if !(self.data.width > 0.0) {
                    return bad(format!("data.width must be > 0, got {}", self.data.width));
                }
                if !self.data.modulation.is_empty() && self.data.modulation.len() != self.dimension
                {
                    return bad(format!(
                        "data.modulation has {} entries for dimension {}",
                        self.data.modulation.len(),
                        self.dimension
                    ));
                }
            }
            DataKind::SingleMode => {
                if self.data.mode.len() != self.dimension {
                    return bad(format!(
                        "data.mode needs {} entries, got {}",
                        self.dimension,
                        self.data.mode.len()
                    ));
                }
            }
            DataKind::File => match &self.data.file {
                Some(p) if p.is_file() => {}
                Some(p) => return bad(format!("data.file {} does not exist", p.display())),
                None => return bad("data.kind = file needs data.file".into()),
            },
        }
        if self.monitors.k_list.is_empty() {
            return bad("monitors.k_list must not be empty".into());
        }
        if !(self.oracle.t > 0.0 && self.oracle.immersion_ratio > 0.0) {
            return bad("oracle.t and oracle.immersion_ratio must be > 0".into());
        }
        self.elliptic
            .validate()
            .map_err(|e| CliError::solver("config", e))?;
        self.evolution_config(&grid)
            .validate()
            .map_err(|e| CliError::solver("config", e))?;
        for p in [&self.output.csv, &self.output.checkpoint, &self.output.json]
            .into_iter()
            .flatten()
        {
            check_writable(p)?;
        }
        Ok(())
    }

    /// Builds `ψ₀` on the configured grid.
    pub fn initial_data(&self, grid: &Grid) -> CliResult<Field> {
        let err = |e| CliError::solver("data", e);
        match self.data.kind {
            DataKind::Gaussian => gaussian(
                grid,
                self.data.amplitude,
                self.data.width,
                &self.data.modulation,
                self.regularity(),
            )
            .map_err(err),
            DataKind::SingleMode => {
                single_mode(grid, self.data.amplitude, &self.data.mode).map_err(err)
            }
            DataKind::File => {
                let path = self.data.file.as_ref().expect("validated");
                let ck = Checkpoint::load(path)?;
                ck.check_grid(grid)?;
                ck.psi(grid)
            }
        }
    }
}

/// The parent directory must exist and the target, if present, must not be
/// read-only.
fn check_writable(path: &Path) -> CliResult<()> {
    let parent = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p.to_path_buf(),
        _ => PathBuf::from("."),
    };
    if !parent.is_dir() {
        return Err(CliError::config(
            "config",
            format!("output directory {} does not exist", parent.display()),
        ));
    }
    let ro = |p: &Path| {
        fs::metadata(p)
            .map(|m| m.permissions().readonly())
            .unwrap_or(false)
    };
    if ro(&parent) || (path.exists() && ro(path)) {
        return Err(CliError::config(
            "config",
            format!("{} is not writable", path.display()),
        ));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sections_and_dotted_keys_agree() {
        let mut a = RunConfig::default();
        a.apply_text("[grid]\nn = 16\nlength = 4pi\n[time]\nt_end = 0.5 # short\n")
            .unwrap();
        let mut b = RunConfig::default();
        b.apply_overrides(&["--grid.n=16", "--grid.length=4*pi", "--time.t_end=0.5"])
            .unwrap();
        assert_eq!(a, b);
        assert_eq!(a.grid.length, 4.0 * std::f64::consts::PI);
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let mut c = RunConfig::default();
        let e = c.apply_text("grid.nn = 16\n").unwrap_err();
        assert!(e.message.contains("unknown key"));
        assert_eq!(e.exit_code(), 2);
        assert!(c.apply_overrides(&["--grid.n"]).is_err());
    }

    #[test]
    fn validation_catches_bad_values() {
        let mut c = RunConfig::default();
        c.data.amplitude = -1.0;
        assert!(c.validate().is_err());
        let mut c = RunConfig::default();
        c.data.modulation = vec![1.0];
        assert!(c.validate().is_err());
        let mut c = RunConfig::default();
        c.output.csv = Some(PathBuf::from("/nonexistent-dir/x.csv"));
        assert!(c.validate().is_err());
        assert!(RunConfig::default().validate().is_ok());
    }
}
