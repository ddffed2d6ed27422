use std::fmt;
use std::time::{SystemTime, UNIX_EPOCH};

use smcf_core::SmcfError;

/// Broad failure class; each maps to its own process exit code.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FailureKind {
    Config,
    Solver,
    Io,
    Checkpoint,
}

impl FailureKind {
    pub fn exit_code(self) -> i32 {
        match self {
            FailureKind::Config => 2,
            FailureKind::Solver => 3,
            FailureKind::Io => 4,
            FailureKind::Checkpoint => 5,
        }
    }
}

/// An error tagged with the pipeline stage that raised it, the simulation
/// time when one applies, and the wall-clock time it was observed.
#[derive(Debug)]
pub struct CliError {
    pub kind: FailureKind,
    pub stage: String,
    pub t: Option<f64>,
    pub unix_time: f64,
    pub message: String,
}

impl CliError {
    pub fn new(kind: FailureKind, stage: &str, message: impl Into<String>) -> Self {
        let unix_time = SystemTime::now()
            .duration_since(UNIX_EPOCH)
            .map(|d| d.as_secs_f64())
            .unwrap_or(0.0);
        Self {
            kind,
            stage: stage.to_string(),
            t: None,
            unix_time,
            message: message.into(),
        }
    }

    pub fn config(stage: &str, message: impl Into<String>) -> Self {
        Self::new(FailureKind::Config, stage, message)
    }

    pub fn io(stage: &str, path: &std::path::Path, err: std::io::Error) -> Self {
        Self::new(FailureKind::Io, stage, format!("{}: {err}", path.display()))
    }

    pub fn checkpoint(message: impl Into<String>) -> Self {
        Self::new(FailureKind::Checkpoint, "checkpoint", message)
    }

    /// Classifies a core error: bad input is a configuration failure,
    /// everything else a solver failure.
    pub fn solver(stage: &str, err: SmcfError) -> Self {
        let kind = match err {
            SmcfError::InvalidConfig(_) | SmcfError::InvalidGrid(_) | SmcfError::Unsupported(_) => {
                FailureKind::Config
            }
            _ => FailureKind::Solver,
        };
        let t = match &err {
            SmcfError::NonFinite { t, .. } if t.is_finite() => Some(*t),
            _ => None,
        };
        let mut e = Self::new(kind, stage, err.to_string());
        e.t = t;
        e
    }

    pub fn at(mut self, t: f64) -> Self {
        self.t.get_or_insert(t);
        self
    }

    pub fn exit_code(&self) -> i32 {
        self.kind.exit_code()
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "stage '{}' failed", self.stage)?;
        if let Some(t) = self.t {
            write!(f, " at t = {t}")?;
        }
        write!(f, " [unix {:.3}]: {}", self.unix_time, self.message)
    }
}

impl std::error::Error for CliError {}

pub type CliResult<T> = std::result::Result<T, CliError>;
