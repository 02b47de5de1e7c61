use thiserror::Error;

pub type Result<T> = std::result::Result<T, MccaError>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MccaError {
    #[error("dimension mismatch in {op}: expected {expected}, got {got}")]
    DimensionMismatch {
        op: &'static str,
        expected: String,
        got: String,
    },

    #[error("matrix must be square, got {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },

    #[error("matrix is not symmetric (max asymmetry {asymmetry:e})")]
    NotSymmetric { asymmetry: f64 },

    #[error("non-finite value at ({row}, {col})")]
    NonFinite { row: usize, col: usize },

    #[error("invalid data: {0}")]
    InvalidData(String),

    #[error("set {set} has {got} columns, model expects {expected}")]
    SetDimensionMismatch {
        set: usize,
        expected: usize,
        got: usize,
    },

    /// Every eigenvalue of the set's covariance block falls below the rank tolerance.
    #[error("set {set} is degenerate: covariance block has no direction above the rank tolerance")]
    DegenerateSet { set: usize },

    /// D is singular for the one-step route.
    #[error(
        "covariance block of set {set} is rank deficient; use the two-step method or gamma > 0"
    )]
    RankDeficient { set: usize },

    #[error("complex eigenvalue detected (imaginary part {imag:e}); matrix is not similar to a symmetric one")]
    ComplexEigenvalue { imag: f64 },

    #[error("eigenvalue iteration did not converge after {iterations} steps")]
    NoConvergence { iterations: usize },

    #[error("inter-set correlation undefined: within-set variance is zero")]
    UndefinedIsc,

    #[error("component index {index} out of range ({available} available)")]
    InvalidComponent { index: usize, available: usize },

    #[error("invalid options: {0}")]
    InvalidOptions(String),

    #[error("invalid synthetic spec: {0}")]
    InvalidSpec(String),

    #[error("{0}")]
    Io(String),

    #[error("malformed model file: {0}")]
    ModelFormat(String),
}

impl MccaError {
    /// True for failures caused by a degenerate covariance structure rather than bad input.
    pub fn is_degenerate(&self) -> bool {
        matches!(
            self,
            MccaError::DegenerateSet { .. }
                | MccaError::RankDeficient { .. }
                | MccaError::ComplexEigenvalue { .. }
                | MccaError::UndefinedIsc
        )
    }
}

impl From<std::io::Error> for MccaError {
    fn from(e: std::io::Error) -> Self {
        MccaError::Io(e.to_string())
    }
}
