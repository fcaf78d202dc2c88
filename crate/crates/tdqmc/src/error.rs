use thiserror::Error;

/// Crate-wide error type.
#[derive(Debug, Error)]
pub enum Error {
    /// A field with (numerically) zero norm cannot be normalized.
    #[error("degenerate field: zero norm")]
    DegenerateField,

    /// Bandwidth selection needs at least two distinct samples.
    #[error("degenerate ensemble: {0}")]
    DegenerateEnsemble(&'static str),

    /// The effective potential is undefined for an empty walker set.
    #[error("empty ensemble")]
    EmptyEnsemble,

    /// Off-grid evaluation; the caller decides whether this means escape.
    #[error("walker left grid: x = {x}")]
    WalkerLeftGrid { x: f64 },

    /// NaN/Inf appeared during propagation.
    #[error("propagation blow-up at step {step}: {detail}")]
    PropagationBlowUp { step: usize, detail: String },

    /// Imaginary-time relaxation did not reach the energy tolerance.
    #[error("ground state did not converge within {max_steps} steps (|dE| = {delta:.3e})")]
    NotConverged { max_steps: usize, delta: f64 },

    /// Grids of two fields that must match do not.
    #[error("mismatched grids: {0}")]
    GridMismatch(&'static str),

    /// Aggregated configuration problems, one message per violation.
    #[error("invalid configuration:\n{}", .0.join("\n"))]
    Config(Vec<String>),

    #[error("grid must have at least {min} points, got {got}")]
    GridTooSmall { min: usize, got: usize },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error("checkpoint: {0}")]
    Checkpoint(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// Stable one-word category used by the CLI for machine-parsable exits.
    pub fn category(&self) -> &'static str {
        match self {
            Error::DegenerateField => "degenerate-field",
            Error::DegenerateEnsemble(_) => "degenerate-ensemble",
            Error::EmptyEnsemble => "empty-ensemble",
            Error::WalkerLeftGrid { .. } => "walker-left-grid",
            Error::PropagationBlowUp { .. } => "propagation-blow-up",
            Error::NotConverged { .. } => "not-converged",
            Error::GridMismatch(_) => "grid-mismatch",
            Error::Config(_) => "config",
            Error::GridTooSmall { .. } => "grid-too-small",
            Error::Io(_) => "io",
            Error::Checkpoint(_) => "checkpoint",
        }
    }
}
