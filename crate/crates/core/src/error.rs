use thiserror::Error;

/// Errors raised by the geometry, belief, pushforward, agent and oracle layers.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("point lies on or near the projective singular plane (denominator {denominator:e})")]
    SingularPlane { denominator: f64 },

    #[error("degenerate direction: position and object coincide")]
    DegenerateDirection,

    #[error("invalid frame: {0}")]
    InvalidFrame(String),

    #[error("transform is singular (|det| = {0:e})")]
    SingularTransform(f64),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("unsupported dimension {0} (expected 2 or 3)")]
    UnsupportedDimension(usize),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("covariance is not positive definite (min eigenvalue {min_eigenvalue:e})")]
    NotPositiveDefinite { min_eigenvalue: f64 },

    #[error("covariance is not symmetric (max asymmetry {0:e})")]
    NotSymmetric(f64),

    #[error("belief mass on the singular plane too large (probability {probability:e})")]
    SingularMass { probability: f64 },

    #[error("pushed covariance is degenerate after regularization")]
    DegenerateCovariance,

    #[error("node grid misses {fraction:.4} of the mapped cloud mass")]
    InsufficientCoverage { fraction: f64 },

    #[error("sensor radius {epsilon} too large for cloud spread (min marginal std {min_std})")]
    EpsilonTooLarge { epsilon: f64, min_std: f64 },

    #[error("every candidate move failed to score")]
    NoScorableMove,
}

pub type Result<T> = std::result::Result<T, Error>;
