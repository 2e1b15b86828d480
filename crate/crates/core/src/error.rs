use thiserror::Error;

/// Errors raised by the numerical routines in this crate.
#[derive(Debug, Error)]
pub enum SylError {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("no shooting bracket found for v0 in [{lo}, {hi}]")]
    NoBracket { lo: f64, hi: f64 },

    #[error("{what} did not converge after {iterations} iterations (residual {residual:e})")]
    NotConverged {
        what: &'static str,
        iterations: usize,
        residual: f64,
    },

    #[error("ODE integration failed at r = {r}: {reason}")]
    IntegrationFailure { r: f64, reason: String },

    #[error("singular metric at ({s}, {t}): det g = {det:e}")]
    SingularMetric { s: f64, t: f64, det: f64 },

    #[error("geodesic left the chart domain at ({s}, {t})")]
    GeodesicLeftDomain { s: f64, t: f64 },

    #[error("spinor does not decay at the quadrature boundary (|psi| = {boundary:e})")]
    InsufficientDecay { boundary: f64 },

    #[error("profile tail is identically zero; no decay rate can be fitted")]
    TailUnderflow,

    #[error("derivative of t -> I(tu) shows no sign change on the scanned interval")]
    NoSignChange,

    #[error("energy increased for every trial step (last step size {step:e})")]
    SaddleEscapeFailed { step: f64 },

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl SylError {
    /// Short machine-readable tag, used by the CLI error payloads.
    pub fn kind(&self) -> &'static str {
        match self {
            SylError::InvalidParameter(_) => "INVALID_PARAMETER",
            SylError::NoBracket { .. } => "NO_BRACKET",
            SylError::NotConverged { .. } => "NOT_CONVERGED",
            SylError::IntegrationFailure { .. } => "INTEGRATION_FAILURE",
            SylError::SingularMetric { .. } => "SINGULAR_METRIC",
            SylError::GeodesicLeftDomain { .. } => "GEODESIC_LEFT_DOMAIN",
            SylError::InsufficientDecay { .. } => "INSUFFICIENT_DECAY",
            SylError::TailUnderflow => "TAIL_UNDERFLOW",
            SylError::NoSignChange => "NO_SIGN_CHANGE",
            SylError::SaddleEscapeFailed { .. } => "SADDLE_ESCAPE_FAILED",
            SylError::Parse(_) => "PARSE",
            SylError::Io(_) => "IO",
            SylError::Json(_) => "JSON",
        }
    }

    /// True for failures of a numerical method, as opposed to bad input.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            SylError::NoBracket { .. }
                | SylError::NotConverged { .. }
                | SylError::IntegrationFailure { .. }
                | SylError::GeodesicLeftDomain { .. }
                | SylError::InsufficientDecay { .. }
                | SylError::TailUnderflow
                | SylError::NoSignChange
                | SylError::SaddleEscapeFailed { .. }
        )
    }
}

pub type Result<T> = std::result::Result<T, SylError>;
