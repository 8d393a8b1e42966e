use thiserror::Error;

/// Errors raised by the numerical routines and the command layer.
#[derive(Debug, Error)]
pub enum Error {
    /// Malformed or semantically invalid configuration.
    #[error("config error at `{path}`: {message}")]
    Config { path: String, message: String },

    /// Config document that does not parse at all.
    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },

    /// An operation was called outside of its domain.
    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("field length mismatch: expected {expected}, found {found}")]
    Shape { expected: usize, found: usize },

    /// The quotient has a vanishing denominator.
    #[error("undefined quotient: {0}")]
    UndefinedQuotient(String),

    /// Analytic tail estimate is larger than the requested tolerance.
    #[error("tail bound {bound:.3e} exceeds tolerance {tolerance:.3e}; try a truncation radius of at least {suggested_radius:.1}")]
    TailBound {
        bound: f64,
        tolerance: f64,
        suggested_radius: f64,
    },

    /// |ρ₁| lies inside the band where its sign cannot be trusted.
    #[error("first Dirichlet eigenvalue {rho1:.6e} is within the indeterminate band ±{band:.3e}")]
    Indeterminate { rho1: f64, band: f64 },

    /// Energies drift to -∞; the weighted Escobar constant is likely -∞.
    #[error("Λ = -∞ suspected: {0}")]
    UnboundedBelow(String),

    #[error("linear solve breakdown after {iterations} iterations (shift {shift:.6e}, residual {residual:.3e})")]
    LinearSolve {
        iterations: usize,
        shift: f64,
        residual: f64,
    },

    #[error("no convergence after {iterations} iterations (residual {residual:.3e})")]
    NonConvergence { iterations: usize, residual: f64 },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub fn config(path: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Config {
            path: path.into(),
            message: message.into(),
        }
    }

    /// Process exit code: 2 for configuration problems, 3 for refused
    /// numerics, 4 for non-convergence.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config { .. } | Error::Parse { .. } => 2,
            Error::NonConvergence { .. } => 4,
            Error::Io(_) | Error::Json(_) | Error::Csv(_) => 1,
            _ => 3,
        }
    }

    /// Short machine-readable tag for error records.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Config { .. } => "config",
            Error::Parse { .. } => "parse",
            Error::Precondition(_) => "precondition",
            Error::Shape { .. } => "shape",
            Error::UndefinedQuotient(_) => "undefined_quotient",
            Error::TailBound { .. } => "tail_bound",
            Error::Indeterminate { .. } => "indeterminate",
            Error::UnboundedBelow(_) => "unbounded_below",
            Error::LinearSolve { .. } => "linear_solve",
            Error::NonConvergence { .. } => "non_convergence",
            Error::Io(_) => "io",
            Error::Json(_) => "json",
            Error::Csv(_) => "csv",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
