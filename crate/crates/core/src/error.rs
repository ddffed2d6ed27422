use thiserror::Error;

pub type Result<T> = std::result::Result<T, SmcfError>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SmcfError {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("axis {axis} out of range for dimension {dim}")]
    AxisOutOfRange { axis: usize, dim: usize },

    #[error("index structure mismatch: {0}")]
    IndexStructure(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("{stage} not contracting after {iterations} iterations (last update {residual:.3e})")]
    NotContracting {
        stage: String,
        iterations: usize,
        residual: f64,
    },

    #[error("metric lost positivity (min eigenvalue {min_eigenvalue:.3e})")]
    LostPositivity { min_eigenvalue: f64 },

    #[error("data too large: norm {norm:.3e} exceeds threshold {threshold:.3e}")]
    SmallnessViolated { norm: f64, threshold: f64 },

    #[error("degenerate immersion: {0}")]
    DegenerateImmersion(String),

    #[error("non-finite values in {stage} at t = {t}")]
    NonFinite { stage: String, t: f64 },

    #[error("empty sample series")]
    EmptySeries,
}
