//! Crate-wide error type.

use thiserror::Error;

/// Stage labels for domain escapes inside composed map evaluations.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stage {
    /// Undoing the rescaling (normalized coordinates -> chart coordinates).
    RescaleIn,
    /// The linear saddle iterates.
    Local,
    /// The polynomial global map.
    Global,
    /// Applying the rescaling to the output.
    RescaleOut,
}

impl std::fmt::Display for Stage {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let name = match self {
            Stage::RescaleIn => "rescale-in",
            Stage::Local => "local",
            Stage::Global => "global",
            Stage::RescaleOut => "rescale-out",
        };
        write!(f, "{name}")
    }
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("saddle validation failed: {0}")]
    InvalidSaddle(String),

    #[error("point ({x}, {y}) escaped the {stage} domain")]
    DomainEscape { stage: Stage, x: f64, y: f64 },

    #[error("overflow while iterating: {0}")]
    Overflow(String),

    #[error("work budget exceeded: {0}")]
    Budget(String),

    #[error("nonisolated periodic points: {0}")]
    Nonisolated(String),

    #[error("iterate polynomial is not square-free (gcd degree {gcd_degree})")]
    NonSquareFree { gcd_degree: usize },

    #[error("Newton iteration failed to converge (best residual {best_residual:e})")]
    NewtonDivergence { best_residual: f64 },

    #[error("degeneracy certificate failed: {0}")]
    CertificateFailure(String),

    #[error("config schema violation: {0}")]
    Schema(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("experiment `{experiment}` failed: {source}")]
    Experiment {
        experiment: String,
        #[source]
        source: Box<Error>,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidParameter(msg.into())
    }

    pub fn in_experiment(self, experiment: &str) -> Self {
        Error::Experiment {
            experiment: experiment.to_string(),
            source: Box::new(self),
        }
    }
}
