//! CSV rows and JSON documents.

use std::fs::{File, OpenOptions};
use std::io::{BufWriter, Write};
use std::path::Path;

use serde::Serialize;
use smcf_core::evolution::TrajectorySample;

use crate::error::{CliError, CliResult};

/// Bumped whenever the column set or order changes.
pub const CSV_SCHEMA_VERSION: u32 = 1;

const TAIL_COLUMNS: [&str; 13] = [
    "h_sd_norm",
    "lambda_linf",
    "strichartz_acc",
    "res_gauss",
    "res_codazzi",
    "res_div",
    "res_curlA",
    "res_coulomb",
    "res_harmonic",
    "res_symm",
    "res_trace",
    "metric_dev",
    "dt_used",
];

/// 17 significant digits, enough to round-trip any `f64`.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn csv_header(ks: &[usize]) -> String {
    let mut cols = vec!["t".to_string()];
    cols.extend(ks.iter().map(|k| format!("E{k}")));
    cols.extend(TAIL_COLUMNS.iter().map(|c| c.to_string()));
    cols.join(",")
}

pub fn csv_row(s: &TrajectorySample) -> String {
    let c = &s.constraints;
    let mut vals = vec![s.t];
    vals.extend(&s.energies);
    vals.extend([
        s.h_sd_norm,
        s.lambda_linf,
        s.strichartz,
        c.gauss.linf,
        c.codazzi.linf,
        c.divergence.linf,
        c.curl_a.linf,
        c.coulomb.linf,
        c.harmonic.linf,
        c.symmetry.linf,
        c.trace.linf,
        s.metric_dev,
        s.dt_used,
    ]);
    vals.into_iter().map(fmt_f64).collect::<Vec<_>>().join(",")
}

/// Row sink. With `append`, an existing file is continued without a new
/// header, which is how a resumed run extends the interrupted one.
pub struct CsvWriter {
    out: BufWriter<File>,
    path: std::path::PathBuf,
}

impl CsvWriter {
    pub fn open(path: &Path, ks: &[usize], append: bool) -> CliResult<Self> {
        let io = |e| CliError::io("output", path, e);
        let continuing = append && path.exists() && std::fs::metadata(path).map_err(io)?.len() > 0;
        let file = if continuing {
            OpenOptions::new().append(true).open(path)
        } else {
            File::create(path)
        }
        .map_err(io)?;
        let mut w = Self {
            out: BufWriter::new(file),
            path: path.to_path_buf(),
        };
        if !continuing {
            w.line(&csv_header(ks))?;
        }
        Ok(w)
    }

    fn line(&mut self, s: &str) -> CliResult<()> {
        writeln!(self.out, "{s}").map_err(|e| CliError::io("output", &self.path, e))
    }

    pub fn row(&mut self, s: &TrajectorySample) -> CliResult<()> {
        self.line(&csv_row(s))
    }

    pub fn flush(&mut self) -> CliResult<()> {
        self.out
            .flush()
            .map_err(|e| CliError::io("output", &self.path, e))
    }
}

/// Serializes to pretty JSON and writes it to `path`, or to stdout when no
/// path is given.
pub fn emit_json<T: Serialize>(value: &T, path: Option<&Path>) -> CliResult<()> {
    let text = serde_json::to_string_pretty(value)
        .map_err(|e| CliError::new(crate::error::FailureKind::Io, "output", e.to_string()))?;
    match path {
        Some(p) => std::fs::write(p, text + "\n").map_err(|e| CliError::io("output", p, e)),
        None => {
            let mut out = std::io::stdout().lock();
            writeln!(out, "{text}")
                .and_then(|_| out.flush())
                .or_else(|e| match e.kind() {
                    std::io::ErrorKind::BrokenPipe => Ok(()),
                    _ => Err(e),
                })
                .map_err(|e| CliError::io("output", Path::new("<stdout>"), e))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn header_column_order() {
        assert_eq!(
            csv_header(&[0, 1]),
            "t,E0,E1,h_sd_norm,lambda_linf,strichartz_acc,res_gauss,res_codazzi,res_div,\
             res_curlA,res_coulomb,res_harmonic,res_symm,res_trace,metric_dev,dt_used"
        );
    }

    #[test]
    fn floats_round_trip() {
        for x in [0.1, 1.0 / 3.0, 2.0f64.sqrt() * 1e-300, f64::MAX, -0.0] {
            let s = fmt_f64(x);
            assert_eq!(s.parse::<f64>().unwrap().to_bits(), x.to_bits(), "{s}");
            assert_eq!(
                s.split('e').next().unwrap().replace(['-', '.'], "").len(),
                17
            );
        }
    }
}
