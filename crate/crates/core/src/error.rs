use thiserror::Error;

/// Errors raised by the construction and verification pipeline.
#[derive(Debug, Error)]
pub enum Error {
    #[error("curvature must be negative, got {0}")]
    NonNegativeCurvature(f64),

    #[error("invalid series parameter: {0}")]
    InvalidSeries(String),

    #[error("coefficient A_{k} overflows f64 for curvature {curvature}")]
    CoefficientOverflow { k: usize, curvature: f64 },

    #[error("identity needs an interior margin of at least {required}, window has {actual}")]
    InsufficientMargin { required: usize, actual: usize },

    #[error("window half-width {half_width} too small: {reason}")]
    WindowTooSmall { half_width: usize, reason: String },

    #[error(
        "tail mass {tail:.3e} exceeds {eps:.1e} on window N={half_width}; retry with N={suggested}"
    )]
    TailBreach {
        tail: f64,
        eps: f64,
        half_width: usize,
        suggested: usize,
    },

    #[error("tail breach at grid point ({x}, {y}): {source}")]
    GridPoint {
        x: f64,
        y: f64,
        #[source]
        source: Box<Error>,
    },

    #[error("Mobius denominator |cz+d| = {0:.3e} is a numerical pole")]
    NumericalPole(f64),

    #[error("matrix determinant {0} is not 1")]
    NotUnimodular(f64),

    #[error("unitarity drift {drift:.3e} after {steps} steps; use more than {steps} steps")]
    UnitarityDrift { drift: f64, steps: usize },

    #[error("tridiagonal eigensolver did not converge at index {0}")]
    EigenNoConvergence(usize),

    #[error("quadrature did not reach tolerance {tolerance:.1e} (estimate {estimate})")]
    QuadratureNoConvergence { tolerance: f64, estimate: f64 },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
